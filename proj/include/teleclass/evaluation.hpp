// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>

#include "teleclass/errors.hpp"
#include "teleclass/io.hpp"
#include "teleclass/taxonomy.hpp"

namespace teleclass {

// doc_id -> class ids, each list sorted and unique.
using LabelSets = std::map<std::string, ClassList>;
// doc_id -> full ranking, best first.
using Rankings = std::map<std::string, ClassList>;

// Lines of {"id": ..., "labels": [class names]}. Names resolve
// case-insensitively; the root is dropped; an empty label set is an error.
LabelSets load_gold(std::string_view jsonl, const Taxonomy& t);

// Mean per-document Dice overlap over the documents in `predicted`.
double example_f1(const LabelSets& gold, const LabelSets& predicted);

// Mean of |true ∩ top-k| / min(k, |true|) over the documents in `rankings`.
double precision_at_k(const LabelSets& gold, const Rankings& rankings, int k);

// Mean over documents of the mean reciprocal rank of each true label.
double mrr(const LabelSets& gold, const Rankings& rankings);

struct EvaluationReport {
  double example_f1 = 0.0;
  double p_at_1 = 0.0;
  double p_at_3 = 0.0;
  double mrr = 0.0;
  std::size_t n_docs = 0;
};

EvaluationReport evaluate(const LabelSets& gold, const LabelSets& predicted,
                          const Rankings& rankings);

Json to_json(const EvaluationReport& r);

}  // namespace teleclass
