// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "teleclass/parallel.hpp"

namespace teleclass {

RepresentationSet build_class_representations(const std::vector<DocSet>& class_docs,
                                              const std::vector<EnrichedTermSet>& enriched,
                                              const Corpus& corpus, const VectorStore& store,
                                              const Taxonomy& t) {
  RepresentationSet out;
  std::vector<const EnrichedTermSet*> by_class(t.node_count(), nullptr);
  for (const auto& e : enriched) by_class.at(index_of(e.class_id)) = &e;

  for (ClassId c : t.classes()) {
    const DocSet& d0 = class_docs.at(index_of(c));
    const EnrichedTermSet* terms = by_class[index_of(c)];
    std::vector<bool> mentions(corpus.size(), false);
    if (terms) {
      for (const auto& term : terms->merged) {
        for (std::size_t pos : corpus.docs_containing(term)) mentions[pos] = true;
      }
    }
    ClassRepresentation rep;
    rep.class_id = c;
    rep.vector.assign(store.dim(), 0.0);
    for (std::size_t pos : d0) {
      if (!mentions[pos]) continue;
      const Vector* v = store.find(VectorSpace::kDoc, corpus.doc(pos).doc_id);
      if (!v) continue;
      for (std::size_t k = 0; k < v->size(); ++k) rep.vector[k] += (*v)[k];
      ++rep.support_count;
    }
    if (rep.support_count == 0) {
      out.excluded.push_back(c);
      continue;
    }
    double norm = 0.0;
    for (auto& x : rep.vector) {
      x /= static_cast<double>(rep.support_count);
      norm += x * x;
    }
    if (norm == 0.0) {
      out.excluded.push_back(c);
      out.warnings.push_back(fmt::format("class \"{}\" has a zero mean vector", t.name(c)));
      continue;
    }
    out.classes.push_back(std::move(rep));
  }
  return out;
}

GapCut largest_gap_cut(std::span<const double> scores) {
  // Block boundaries: positions where the score strictly drops.
  std::optional<GapCut> best;
  for (std::size_t j = 0; j + 1 < scores.size(); ++j) {
    if (scores[j + 1] > scores[j]) {
      throw ValidationError("largest_gap_cut needs scores in descending order");
    }
    const double diff = scores[j] - scores[j + 1];
    if (diff <= 0.0) continue;
    if (!best || diff > best->confidence) best = GapCut{j + 1, diff};
  }
  if (!best) throw ValidationError("no similarity gap: fewer than two distinct scores");
  return *best;
}

namespace {

Json ids_json(const ClassList& ids) {
  Json arr = Json::array();
  for (ClassId c : ids) arr.push_back(index_of(c));
  return arr;
}

}  // namespace

Json to_json(const RefinedAssignment& a, std::size_t max_rank) {
  Json rank = Json::array();
  Json scores = Json::array();
  for (std::size_t i = 0; i < a.ranked.size() && i < max_rank; ++i) {
    rank.push_back(index_of(a.ranked[i].class_id));
    scores.push_back(a.ranked[i].score);
  }
  return {{"doc_id", a.doc_id},    {"core", ids_json(a.core)}, {"confidence", a.confidence},
          {"cut", a.cut_position}, {"rank", rank},             {"scores", scores}};
}

RefinedAssignment refined_from_json(const Json& obj) {
  RefinedAssignment a;
  a.doc_id = obj.at("doc_id").get<std::string>();
  for (const auto& v : obj.at("core")) a.core.push_back(class_id(v.get<std::size_t>()));
  a.confidence = obj.at("confidence").get<double>();
  a.cut_position = obj.value("cut", a.core.size());
  const auto& rank = obj.at("rank");
  for (std::size_t i = 0; i < rank.size(); ++i) {
    ScoredClass s;
    s.class_id = class_id(rank[i].get<std::size_t>());
    if (obj.contains("scores")) s.score = obj["scores"].at(i).get<double>();
    a.ranked.push_back(s);
  }
  return a;
}

RefinedAssignment refine_document(std::string doc_id, std::span<const float> doc_vector,
                                  const RepresentationSet& reps, const Taxonomy& t,
                                  const ClassList* restrict_to) {
  RefinedAssignment out;
  out.doc_id = std::move(doc_id);
  for (const auto& rep : reps.classes) {
    if (restrict_to && std::find(restrict_to->begin(), restrict_to->end(), rep.class_id) ==
                           restrict_to->end()) {
      continue;
    }
    out.ranked.push_back(
        {rep.class_id, cosine(doc_vector, std::span<const double>(rep.vector))});
  }
  if (out.ranked.size() < 2) {
    throw ValidationError(fmt::format("document {} has fewer than 2 rankable classes",
                                      out.doc_id));
  }
  std::sort(out.ranked.begin(), out.ranked.end(), [&](const ScoredClass& a, const ScoredClass& b) {
    if (a.score != b.score) return a.score > b.score;
    return t.name(a.class_id) < t.name(b.class_id);
  });
  std::vector<double> scores;
  scores.reserve(out.ranked.size());
  for (const auto& s : out.ranked) scores.push_back(s.score);
  GapCut cut = largest_gap_cut(scores);
  out.cut_position = cut.cut;
  out.confidence = cut.confidence;
  for (std::size_t i = 0; i < cut.cut; ++i) out.core.push_back(out.ranked[i].class_id);
  std::sort(out.core.begin(), out.core.end());
  return out;
}

std::size_t retained_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("confidence fraction must lie in (0, 1]");
  }
  const double x = fraction * static_cast<double>(n);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) < 1e-9) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(x));
}

std::vector<RefinedAssignment> select_confident(std::vector<RefinedAssignment> assignments,
                                                double fraction) {
  if (assignments.empty()) throw ValidationError("no refined assignments to select from");
  const std::size_t keep = retained_count(assignments.size(), fraction);
  std::sort(assignments.begin(), assignments.end(),
            [](const RefinedAssignment& a, const RefinedAssignment& b) {
              if (a.confidence != b.confidence) return a.confidence > b.confidence;
              return a.doc_id < b.doc_id;
            });
  assignments.resize(keep);
  return assignments;
}

RefinementResult refine_corpus(const Corpus& corpus,
                               const std::vector<InitialCoreAssignment>& initial,
                               const RepresentationSet& reps, const VectorStore& store,
                               const Taxonomy& t, const RefinementOptions& options,
                               int workers) {
  std::vector<std::optional<RefinedAssignment>> slots(initial.size());
  std::vector<std::string> problems(initial.size());
  parallel_for(initial.size(), workers, [&](std::size_t i) {
    const auto& a = initial[i];
    const Vector* v = store.find(VectorSpace::kDoc, a.doc_id);
    if (!v) {
      problems[i] = a.doc_id + ": no document vector, dropped";
      return;
    }
    try {
      slots[i] = refine_document(a.doc_id, *v, reps, t,
                                 options.candidates_only ? &a.candidates : nullptr);
    } catch (const ValidationError& e) {
      problems[i] = std::string(e.what()) + ", dropped";
    }
  });
  (void)corpus;

  RefinementResult result;
  result.warnings = reps.warnings;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      result.refined.push_back(std::move(*slots[i]));
    } else {
      result.warnings.push_back(problems[i]);
    }
  }
  if (!result.refined.empty()) {
    result.selected = select_confident(result.refined, options.confidence_fraction);
  }
  return result;
}

}  // namespace teleclass
