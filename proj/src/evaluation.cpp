// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/evaluation.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "teleclass/text.hpp"

namespace teleclass {

LabelSets load_gold(std::string_view jsonl, const Taxonomy& t) {
  LabelSets gold;
  for_each_jsonl(jsonl, [&](std::size_t line, const Json& obj) {
    if (!obj.contains("id") || !obj.contains("labels")) {
      throw ValidationError(fmt::format("gold line {}: expected \"id\" and \"labels\"", line));
    }
    const Json& raw_id = obj["id"];
    std::string id = raw_id.is_string() ? raw_id.get<std::string>() : raw_id.dump();
    ClassList labels;
    for (const auto& name : obj["labels"]) {
      auto c = t.find_lower(to_lower_ascii(name.get<std::string>()));
      if (!c) {
        throw ValidationError(fmt::format("gold line {}: unknown class \"{}\"", line,
                                          name.get<std::string>()));
      }
      if (!t.is_root(*c)) labels.push_back(*c);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (labels.empty()) throw ValidationError(fmt::format("gold line {}: no labels", line));
    if (!gold.emplace(id, std::move(labels)).second) {
      throw ValidationError(fmt::format("gold line {}: duplicate id \"{}\"", line, id));
    }
  });
  return gold;
}

namespace {

const ClassList& gold_for(const LabelSets& gold, const std::string& doc_id) {
  auto it = gold.find(doc_id);
  if (it == gold.end()) throw LookupError("no gold labels for document \"" + doc_id + "\"");
  return it->second;
}

// Label lists are short; no ordering is assumed.
bool contains(const ClassList& labels, ClassId c) {
  return std::find(labels.begin(), labels.end(), c) != labels.end();
}

}  // namespace

double example_f1(const LabelSets& gold, const LabelSets& predicted) {
  if (predicted.empty()) throw ValidationError("no predictions to evaluate");
  double total = 0.0;
  for (const auto& [doc, pred] : predicted) {
    const ClassList& truth = gold_for(gold, doc);
    if (pred.empty()) continue;
    std::size_t hits = 0;
    for (ClassId c : pred) hits += contains(truth, c);
    total += 2.0 * static_cast<double>(hits) / static_cast<double>(truth.size() + pred.size());
  }
  return total / static_cast<double>(predicted.size());
}

double precision_at_k(const LabelSets& gold, const Rankings& rankings, int k) {
  if (k < 1) throw ValidationError("k must be at least 1");
  if (rankings.empty()) throw ValidationError("no rankings to evaluate");
  double total = 0.0;
  for (const auto& [doc, ranking] : rankings) {
    const ClassList& truth = gold_for(gold, doc);
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), ranking.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < top; ++i) hits += contains(truth, ranking[i]);
    total += static_cast<double>(hits) /
             static_cast<double>(std::min<std::size_t>(static_cast<std::size_t>(k), truth.size()));
  }
  return total / static_cast<double>(rankings.size());
}

double mrr(const LabelSets& gold, const Rankings& rankings) {
  if (rankings.empty()) throw ValidationError("no rankings to evaluate");
  double total = 0.0;
  for (const auto& [doc, ranking] : rankings) {
    const ClassList& truth = gold_for(gold, doc);
    double sum = 0.0;
    for (ClassId c : truth) {
      auto it = std::find(ranking.begin(), ranking.end(), c);
      if (it == ranking.end()) {
        throw ValidationError(fmt::format("document \"{}\": true class {} missing from ranking",
                                          doc, index_of(c)));
      }
      sum += 1.0 / static_cast<double>(it - ranking.begin() + 1);
    }
    total += sum / static_cast<double>(truth.size());
  }
  return total / static_cast<double>(rankings.size());
}

EvaluationReport evaluate(const LabelSets& gold, const LabelSets& predicted,
                          const Rankings& rankings) {
  EvaluationReport r;
  r.example_f1 = example_f1(gold, predicted);
  r.p_at_1 = precision_at_k(gold, rankings, 1);
  r.p_at_3 = precision_at_k(gold, rankings, 3);
  r.mrr = mrr(gold, rankings);
  r.n_docs = predicted.size();
  return r;
}

Json to_json(const EvaluationReport& r) {
  return {{"example_f1", r.example_f1},
          {"p_at_1", r.p_at_1},
          {"p_at_3", r.p_at_3},
          {"mrr", r.mrr},
          {"n_docs", r.n_docs}};
}

}  // namespace teleclass
