// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "teleclass/embeddings.hpp"
#include "teleclass/io.hpp"
#include "teleclass/taxonomy.hpp"

namespace teleclass {

enum class ScoreForm { kSigmoidLinear, kSigmoidExp };

std::string_view to_string(ScoreForm f);
ScoreForm score_form_from_string(std::string_view s);

// p(c_j | x) = sigma(c_j^T W A x), or sigma(exp(.)) in the exp form.
struct MatchingModel {
  int dim_in = 0;
  int dim_h = 0;
  ScoreForm score_form = ScoreForm::kSigmoidLinear;
  ClassList classes;            // row order of class_table, ascending id
  Eigen::MatrixXd W;            // dim_h x dim_h
  Eigen::MatrixXd class_table;  // |classes| x dim_h
  Eigen::MatrixXd adapter;      // dim_h x dim_in

  // W = I, adapter = truncated identity, class rows = name vectors cut or
  // zero-padded to dim_h (zero rows for names without a vector).
  static MatchingModel initialize(const Taxonomy& t, const VectorStore& store, int dim_h,
                                  ScoreForm form);

  std::size_t row_of(ClassId c) const;
  Eigen::VectorXd logits(const Eigen::VectorXd& x) const;
  Eigen::VectorXd probabilities(const Eigen::VectorXd& x) const;
  bool finite() const;
};

double probability_from_logit(double z, ScoreForm form);

Eigen::VectorXd to_eigen(std::span<const float> v);

// All classes with their probabilities, in row order.
std::vector<std::pair<ClassId, double>> predict_proba(const MatchingModel& m,
                                                      std::span<const float> doc_vector);

struct TargetSets {
  ClassList positives;
  ClassList negatives;
  ClassList unlabeled;
};

// positives = core and ancestors; unlabeled = descendants not already
// positive; negatives = everything else.
TargetSets build_targets_core(const ClassList& core, const Taxonomy& t);
TargetSets build_targets_gen(const LabelPath& path, const Taxonomy& t);

// Throws NumericError unless the three sets partition the non-root classes.
void check_partition(const TargetSets& s, const Taxonomy& t);

struct TrainingExample {
  std::string doc_id;
  Eigen::VectorXd x;
  Eigen::VectorXd target;  // 1 positive, 0 negative, per model row
  Eigen::VectorXd mask;    // 0 for unlabeled classes
  bool generated = false;
};

TrainingExample make_example(const MatchingModel& m, std::string doc_id,
                             std::span<const float> x, const TargetSets& targets,
                             bool generated);

struct Gradients {
  Eigen::MatrixXd W;
  Eigen::MatrixXd class_table;
  Eigen::MatrixXd adapter;
};

struct LossResult {
  double value = 0.0;
  Gradients grad;
};

// Summed binary cross-entropy over labeled classes: core examples at weight
// 1, generated ones at `gen_weight`. Throws NumericError naming the document
// when a term is not finite.
LossResult loss(const MatchingModel& m, std::span<const TrainingExample* const> core,
                std::span<const TrainingExample* const> gen, double gen_weight);

struct TrainConfig {
  double lr = 5e-5;
  int batch_size = 64;
  int epochs = 20;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 13;
};

Json to_json(const TrainConfig& c);

struct TrainResult {
  MatchingModel model;
  std::vector<double> loss_history;  // summed loss per epoch
};

// Mini-batch AdamW over the shuffled union of core and generated examples.
TrainResult train(MatchingModel init, const std::vector<TrainingExample>& core,
                  const std::vector<TrainingExample>& gen, const TrainConfig& config);

struct Prediction {
  std::vector<std::pair<ClassId, double>> ranked;  // by logit descending, ties by id
  ClassList predicted;                             // p > threshold, ascending id
};

Prediction predict(const MatchingModel& m, std::span<const float> doc_vector, double threshold);

Json model_to_json(const MatchingModel& m, const TrainConfig& config,
                   const std::vector<double>& loss_history);
MatchingModel model_from_json(const Json& obj);

Json to_json(const std::string& doc_id, const Prediction& p);

}  // namespace teleclass
