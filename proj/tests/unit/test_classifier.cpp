// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "teleclass/classifier.hpp"
#include "teleclass/errors.hpp"
#include "teleclass/evaluation.hpp"
#include "teleclass/io.hpp"

using namespace teleclass;

namespace {

const char* kHair =
    R"({"nodes":[{"id":0,"name":"hair care"},{"id":1,"name":"shampoo"},{"id":2,"name":"conditioner"},)"
    R"({"id":3,"name":"scalp treatment"},{"id":4,"name":"pets"},{"id":5,"name":"dog food"}],)"
    R"("edges":[[0,1],[0,2],[0,3],[4,5]]})";

ClassList by_name(const Taxonomy& t, std::initializer_list<const char*> names) {
  ClassList out;
  for (auto n : names) out.push_back(*t.find(n));
  std::sort(out.begin(), out.end());
  return out;
}

MatchingModel small_model(const Taxonomy& t, int in, int h) {
  MatchingModel m;
  m.dim_in = in;
  m.dim_h = h;
  m.classes = t.classes();
  m.W = Eigen::MatrixXd::Identity(h, h);
  m.class_table = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.classes.size()), h);
  m.adapter = Eigen::MatrixXd::Identity(h, in);
  return m;
}

}  // namespace

TEST(Model, ZeroWeightsGiveFixedProbability) {
  Taxonomy t = Taxonomy::parse(kHair);
  MatchingModel m = small_model(t, 3, 3);
  m.class_table.setOnes();
  m.W.setZero();
  for (auto [c, p] : predict_proba(m, Vector{1, 2, 3})) EXPECT_DOUBLE_EQ(p, 0.5);
  m.score_form = ScoreForm::kSigmoidExp;
  for (auto [c, p] : predict_proba(m, Vector{1, 2, 3})) EXPECT_NEAR(p, 0.7310585786, 1e-9);
}

TEST(Model, TwoClassHandArithmetic) {
  Taxonomy t = Taxonomy::parse(R"({"nodes":[{"id":0,"name":"a"},{"id":1,"name":"b"}]})");
  MatchingModel m = small_model(t, 2, 2);
  m.W << 1, 2, 0, -1;
  m.class_table << 0.5, 0, -1, 1;
  m.adapter << 1, 0, 1, 1;
  // A x = (1, 3); W A x = (7, -3); logits: 3.5 and -10.
  auto p = predict_proba(m, Vector{1, 2});
  EXPECT_NEAR(p[0].second, 1 / (1 + std::exp(-3.5)), 1e-9);
  EXPECT_NEAR(p[1].second, 1 / (1 + std::exp(10.0)), 1e-9);
}

TEST(Targets, CoreSets) {
  Taxonomy t = Taxonomy::parse(kHair);
  auto two = build_targets_core(by_name(t, {"shampoo", "scalp treatment"}), t);
  EXPECT_EQ(two.positives, by_name(t, {"hair care", "shampoo", "scalp treatment"}));
  EXPECT_TRUE(two.unlabeled.empty());
  EXPECT_EQ(two.negatives, by_name(t, {"conditioner", "pets", "dog food"}));

  auto top = build_targets_core(by_name(t, {"hair care"}), t);
  EXPECT_EQ(top.unlabeled, by_name(t, {"shampoo", "conditioner", "scalp treatment"}));
  EXPECT_EQ(top.negatives, by_name(t, {"pets", "dog food"}));
  check_partition(top, t);

  TargetSets broken = top;
  broken.negatives.pop_back();
  EXPECT_THROW(check_partition(broken, t), NumericError);
}

TEST(Targets, PathSets) {
  Taxonomy t = Taxonomy::parse(kHair);
  auto p = build_targets_gen(LabelPath{by_name(t, {"hair care", "shampoo"})}, t);
  EXPECT_EQ(p.positives, by_name(t, {"hair care", "shampoo"}));
  EXPECT_EQ(p.positives.size() + p.negatives.size(), t.node_count() - 1);
  Taxonomy flat = Taxonomy::parse(R"({"nodes":[{"id":0,"name":"a"},{"id":1,"name":"b"}]})");
  EXPECT_EQ(build_targets_gen(LabelPath{{class_id(1)}}, flat).positives.size(), 1u);
}

TEST(Loss, ClosedForms) {
  Taxonomy t = Taxonomy::parse(kHair);
  MatchingModel m = small_model(t, 4, 4);  // zero class table: every p = 0.5
  auto ex = make_example(m, "d", Vector{1, 0, 0, 0}, build_targets_core(by_name(t, {"hair care"}), t), false);
  const TrainingExample* one[] = {&ex};
  // 1 positive and 2 negatives labeled, 3 unlabeled.
  EXPECT_NEAR(loss(m, one, {}, 1.0).value, 3 * std::log(2.0), 1e-12);

  // Confident and right: loss near zero.
  MatchingModel sure = small_model(t, 4, 4);
  auto targets = build_targets_core(by_name(t, {"shampoo"}), t);
  for (ClassId c : t.classes()) {
    const bool pos = std::find(targets.positives.begin(), targets.positives.end(), c) != targets.positives.end();
    sure.class_table.row(static_cast<Eigen::Index>(sure.row_of(c))).setConstant(pos ? 40.0 : -40.0);
  }
  auto ex2 = make_example(sure, "d", Vector{1, 1, 1, 1}, targets, false);
  const TrainingExample* two[] = {&ex2};
  const double v = loss(sure, two, {}, 1.0).value;
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1e-60);
}

TEST(Training, ZeroEpochsAndDeterminism) {
  Taxonomy t = Taxonomy::parse(kHair);
  MatchingModel m = small_model(t, 3, 3);
  m.class_table.setConstant(0.1);
  std::vector<TrainingExample> core{
      make_example(m, "a", Vector{1, 0, 0}, build_targets_core(by_name(t, {"shampoo"}), t), false),
      make_example(m, "b", Vector{0, 1, 0}, build_targets_core(by_name(t, {"dog food"}), t), false)};
  std::vector<TrainingExample> gen{
      make_example(m, "g", Vector{0, 0, 1}, build_targets_gen(t.label_paths()[0], t), true)};
  TrainConfig cfg;
  cfg.epochs = 0;
  auto none = train(m, core, gen, cfg);
  EXPECT_EQ(none.model.W, m.W);
  EXPECT_EQ(none.model.class_table, m.class_table);
  EXPECT_TRUE(none.loss_history.empty());

  cfg.epochs = 5;
  cfg.batch_size = 2;
  cfg.lr = 0.05;
  auto r1 = train(m, core, gen, cfg);
  auto r2 = train(m, core, gen, cfg);
  EXPECT_EQ(r1.loss_history, r2.loss_history);
  EXPECT_EQ(r1.model.class_table, r2.model.class_table);
  EXPECT_EQ(r1.model.adapter, r2.model.adapter);
  EXPECT_LT(r1.loss_history.back(), r1.loss_history.front());
}

TEST(Predict, Thresholds) {
  Taxonomy t = Taxonomy::parse(kHair);
  MatchingModel m = small_model(t, 3, 3);
  for (Eigen::Index r = 0; r < m.class_table.rows(); ++r) {
    m.class_table.row(r) << static_cast<double>(r) - 2.5, 0.3 * static_cast<double>(r), -0.2;
  }
  Vector x{0.7f, -0.4f, 1.1f};
  auto none = predict(m, x, 1.0);
  EXPECT_TRUE(none.predicted.empty());
  EXPECT_EQ(none.ranked.size(), m.classes.size());
  EXPECT_EQ(predict(m, x, 0.0).predicted, m.classes);

  auto probs = predict_proba(m, x);
  ClassList want;
  for (auto [c, p] : probs) {
    if (p > 0.5) want.push_back(c);
  }
  EXPECT_EQ(predict(m, x, 0.5).predicted, want);
  auto ranked = predict(m, x, 0.5).ranked;
  for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_GE(ranked[i - 1].second, ranked[i].second);
}

TEST(Model, JsonRoundTrip) {
  Taxonomy t = Taxonomy::parse(kHair);
  MatchingModel m = small_model(t, 3, 2);
  m.class_table.setRandom();
  m.score_form = ScoreForm::kSigmoidExp;
  auto back = model_from_json(model_to_json(m, TrainConfig{}, {1.0, 0.5}));
  EXPECT_EQ(back.W, m.W);
  EXPECT_EQ(back.class_table, m.class_table);
  EXPECT_EQ(back.adapter, m.adapter);
  EXPECT_EQ(back.classes, m.classes);
  EXPECT_EQ(back.score_form, ScoreForm::kSigmoidExp);
}

TEST(Training, SeparableFixtureReachesHighF1) {
  const std::filesystem::path dir = TELECLASS_FIXTURE_DIR;
  Taxonomy t = Taxonomy::parse(read_file(dir / "taxonomy.json"));
  VectorStore store = VectorStore::parse(read_file(dir / "vectors.jsonl"));
  Json rules = Json::parse(read_file(dir / "mock_rules.json"));
  MatchingModel init = MatchingModel::initialize(t, store, static_cast<int>(store.dim()), ScoreForm::kSigmoidLinear);
  std::vector<TrainingExample> core;
  LabelSets gold;
  for (auto& [doc, labels] : rules.at("doc_labels").items()) {
    ClassId leaf = *t.find(labels.at(0).get<std::string>());
    auto targets = build_targets_core({leaf}, t);
    core.push_back(make_example(init, doc, store.at(VectorSpace::kDoc, doc), targets, false));
    gold[doc] = targets.positives;
  }
  TrainConfig cfg;
  cfg.lr = 0.01;
  cfg.epochs = 200;
  auto result = train(init, core, {}, cfg);
  LabelSets predicted;
  for (const auto& e : core) {
    predicted[e.doc_id] = predict(result.model, store.at(VectorSpace::kDoc, e.doc_id), 0.5).predicted;
  }
  EXPECT_GE(example_f1(gold, predicted), 0.95);
}
