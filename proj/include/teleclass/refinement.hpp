// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "teleclass/annotation.hpp"
#include "teleclass/corpus.hpp"
#include "teleclass/embeddings.hpp"
#include "teleclass/enrichment.hpp"
#include "teleclass/io.hpp"
#include "teleclass/taxonomy.hpp"

namespace teleclass {

struct ClassRepresentation {
  ClassId class_id{};
  std::vector<double> vector;  // mean of the supporting document vectors
  std::size_t support_count = 0;
};

struct RepresentationSet {
  std::vector<ClassRepresentation> classes;  // sorted by class id
  ClassList excluded;                        // empty support or zero mean
  std::vector<std::string> warnings;
};

// Keeps the documents of D0_c that contain at least one of the class's
// enriched terms and averages their vectors.
RepresentationSet build_class_representations(const std::vector<DocSet>& class_docs,
                                              const std::vector<EnrichedTermSet>& enriched,
                                              const Corpus& corpus, const VectorStore& store,
                                              const Taxonomy& t);

struct GapCut {
  std::size_t cut = 0;  // number of leading entries on the high side of the gap
  double confidence = 0.0;
};

// Largest drop between consecutive distinct values of a descending score
// list. Equal scores form one block, so a cut never splits a tie; the first
// of several equal gaps wins. Throws ValidationError when fewer than two
// distinct scores exist.
GapCut largest_gap_cut(std::span<const double> descending_scores);

struct ScoredClass {
  ClassId class_id{};
  double score = 0.0;
};

struct RefinedAssignment {
  std::string doc_id;
  std::vector<ScoredClass> ranked;  // descending score, ties by name
  std::size_t cut_position = 0;
  ClassList core;  // sorted by id
  double confidence = 0.0;
};

Json to_json(const RefinedAssignment& a, std::size_t max_rank = 20);
RefinedAssignment refined_from_json(const Json& obj);

// Ranks the represented classes (or only `restrict_to`, when given) by cosine
// with the document and cuts at the largest gap.
RefinedAssignment refine_document(std::string doc_id, std::span<const float> doc_vector,
                                  const RepresentationSet& reps, const Taxonomy& t,
                                  const ClassList* restrict_to = nullptr);

struct RefinementOptions {
  double confidence_fraction = 0.75;
  bool candidates_only = false;
};

struct RefinementResult {
  std::vector<RefinedAssignment> refined;   // every document that could be ranked
  std::vector<RefinedAssignment> selected;  // the confident subset
  std::vector<std::string> warnings;
};

// ceil(fraction * n), robust to floating-point noise in the product.
std::size_t retained_count(std::size_t n, double fraction);

// Most confident ceil(fraction * N) assignments; ties by doc_id ascending.
std::vector<RefinedAssignment> select_confident(std::vector<RefinedAssignment> assignments,
                                                double fraction);

RefinementResult refine_corpus(const Corpus& corpus,
                               const std::vector<InitialCoreAssignment>& initial,
                               const RepresentationSet& reps, const VectorStore& store,
                               const Taxonomy& t, const RefinementOptions& options,
                               int workers = 1);

}  // namespace teleclass
