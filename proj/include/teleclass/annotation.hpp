// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "teleclass/corpus.hpp"
#include "teleclass/embeddings.hpp"
#include "teleclass/io.hpp"
#include "teleclass/llm.hpp"
#include "teleclass/taxonomy.hpp"

namespace teleclass {

// LLM key terms of one class. Always holds the lowercased class name.
struct LlmTermSet {
  ClassId class_id{};
  std::vector<std::string> terms;  // sorted, unique, lowercase
};

// Indexed by class index; the root's slot stays empty.
using LlmTermTable = std::vector<LlmTermSet>;

struct LlmEnrichment {
  LlmTermTable terms;
  std::vector<std::string> failures;  // one entry per failed (class, parent) prompt
  std::size_t prompts = 0;
  std::size_t backend_failures = 0;
};

LlmEnrichment llm_enrich_all(const Taxonomy& t, LlmGateway& gateway, const DomainProfile& domain,
                             const PromptOptions& options = {});

Json llm_terms_to_json(const Taxonomy& t, const LlmTermTable& table);
LlmTermTable llm_terms_from_json(const Taxonomy& t, const Json& doc);

// max over terms with a vector of cos(term, doc). Throws LookupError when
// none of the terms has a vector.
double class_doc_similarity(const LlmTermSet& terms, std::span<const float> doc_vector,
                            const VectorStore& store);

// Term vectors resolved once per class so the candidate search does not
// repeat map lookups for every document.
class SimilarityIndex {
 public:
  SimilarityIndex(const Taxonomy& t, const LlmTermTable& terms, const VectorStore& store);

  double similarity(ClassId c, std::span<const float> doc_vector) const;

  // Terms skipped because the store has no vector for them.
  const std::vector<std::string>& missing_terms() const { return missing_; }
  // Classes left with no usable term vector at all.
  const ClassList& unusable_classes() const { return unusable_; }

 private:
  const Taxonomy& taxonomy_;
  std::vector<std::vector<const Vector*>> vectors_;
  std::vector<std::string> missing_;
  ClassList unusable_;
};

struct CandidateSearchOptions {
  int beam_base = 3;        // level l keeps l + beam_base classes
  bool per_parent = false;  // beam per frontier parent instead of over the pooled children
};

struct CandidateSet {
  ClassList classes;  // sorted by id, never the root
  ClassId best{};     // highest similarity, ties by name
};

// Top-down beam over the taxonomy starting at the root. Any callable
// `double(ClassId)` serves as the similarity.
template <typename SimFn>
CandidateSet candidate_search(const Taxonomy& t, SimFn&& sim,
                              const CandidateSearchOptions& options = {});

CandidateSet candidate_search(const Taxonomy& t, const SimilarityIndex& index,
                              std::span<const float> doc_vector,
                              const CandidateSearchOptions& options = {});

struct InitialCoreAssignment {
  std::string doc_id;
  ClassList candidates;
  ClassList core;
  bool fallback_used = false;
};

Json to_json(const InitialCoreAssignment& a);
InitialCoreAssignment initial_assignment_from_json(const Json& obj);

struct AnnotationOptions {
  CandidateSearchOptions search;
  PromptOptions prompt;
};

struct AnnotationResult {
  std::vector<InitialCoreAssignment> assignments;  // corpus order
  std::vector<std::string> failures;               // "doc_id: reason"
  std::size_t backend_failures = 0;
  std::size_t fallbacks = 0;
  std::size_t truncated_prompts = 0;
};

AnnotationResult annotate_corpus(const Corpus& corpus, const Taxonomy& t,
                                 const SimilarityIndex& index, const VectorStore& store,
                                 LlmGateway& gateway, const DomainProfile& domain,
                                 const AnnotationOptions& options = {});

// --- implementation -------------------------------------------------------

template <typename SimFn>
CandidateSet candidate_search(const Taxonomy& t, SimFn&& sim,
                              const CandidateSearchOptions& options) {
  std::vector<double> cache(t.node_count(), 0.0);
  std::vector<bool> scored(t.node_count(), false);
  auto score = [&](ClassId c) {
    if (!scored[index_of(c)]) {
      cache[index_of(c)] = sim(c);
      scored[index_of(c)] = true;
    }
    return cache[index_of(c)];
  };
  auto better = [&](ClassId a, ClassId b) {
    double sa = score(a), sb = score(b);
    if (sa != sb) return sa > sb;
    return t.name(a) < t.name(b);
  };

  std::vector<bool> selected(t.node_count(), false);
  ClassList frontier{t.root()};
  for (int level = 0;; ++level) {
    const std::size_t width = static_cast<std::size_t>(level + options.beam_base);
    ClassList next;
    if (options.per_parent) {
      std::vector<bool> in_next(t.node_count(), false);
      for (ClassId f : frontier) {
        ClassList kids = t.children(f);
        std::sort(kids.begin(), kids.end(), better);
        if (kids.size() > width) kids.resize(width);
        for (ClassId k : kids) {
          if (!in_next[index_of(k)]) {
            in_next[index_of(k)] = true;
            next.push_back(k);
          }
        }
      }
    } else {
      std::vector<bool> in_pool(t.node_count(), false);
      for (ClassId f : frontier) {
        for (ClassId k : t.children(f)) {
          if (!in_pool[index_of(k)]) {
            in_pool[index_of(k)] = true;
            next.push_back(k);
          }
        }
      }
      std::sort(next.begin(), next.end(), better);
      if (next.size() > width) next.resize(width);
    }
    if (next.empty()) break;
    for (ClassId c : next) selected[index_of(c)] = true;
    frontier = std::move(next);
  }

  CandidateSet out;
  for (ClassId c : t.classes()) {
    if (selected[index_of(c)]) out.classes.push_back(c);
  }
  if (!out.classes.empty()) {
    out.best = *std::min_element(out.classes.begin(), out.classes.end(), better);
  }
  return out;
}

}  // namespace teleclass
