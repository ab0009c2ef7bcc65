// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "teleclass/annotation.hpp"
#include "teleclass/corpus.hpp"
#include "teleclass/embeddings.hpp"
#include "teleclass/io.hpp"
#include "teleclass/taxonomy.hpp"

namespace teleclass {

// D0 per class, indexed by class index: documents whose initial core
// classes contain the class or one of its descendants.
std::vector<DocSet> collect_class_documents(const std::vector<InitialCoreAssignment>& assignments,
                                            const Corpus& corpus, const Taxonomy& t);

DocSet collect_class_documents(const std::vector<InitialCoreAssignment>& assignments,
                               const Corpus& corpus, const Taxonomy& t, ClassId c);

// ln(1 + df(term, D0_c))
double popularity(std::string_view term, const DocSet& class_docs, const Corpus& corpus);

struct EnrichmentOptions {
  int k = 20;
  Bm25Params bm25;
  // Leave the class itself out of the softmax denominator.
  bool sibling_exclude_self = false;
};

// exp(BM25(t, D0_c)) / (1 + sum over siblings s of exp(BM25(t, D0_s))), the
// BM25 collection being the pseudo-documents of every child of `parent`.
double distinctiveness(std::string_view term, ClassId c, ClassId parent, const Taxonomy& t,
                       const std::vector<DocSet>& class_docs, const Corpus& corpus,
                       const EnrichmentOptions& options = {});

// cos(name vector of c, term vector)
double semantic_similarity(ClassId c, std::string_view term, const Taxonomy& t,
                           const VectorStore& store);

// cbrt(pop * dist * max(sem, 0))
double affinity(double pop, double dist, double sem);

struct TermAffinity {
  std::string term;
  ClassId class_id{};
  ClassId parent_id{};
  double pop = 0.0;
  double dist = 0.0;
  double sem = 0.0;
  double affinity = 0.0;
};

struct EnrichedTermSet {
  ClassId class_id{};
  std::map<ClassId, std::vector<TermAffinity>> corpus_terms_by_parent;  // top-k, ranked
  std::vector<std::string> llm_terms;
  std::vector<std::string> merged;  // sorted, unique
};

Json to_json(const EnrichedTermSet& e);
EnrichedTermSet enriched_from_json(const Json& obj);

// Precomputed per-class term counts over the candidate terms so each
// (class, parent) ranking is a pass over counters instead of the corpus.
class EnrichmentContext {
 public:
  EnrichmentContext(const Corpus& corpus, const Taxonomy& t, std::vector<DocSet> class_docs,
                    const std::vector<std::string>& candidate_terms, const VectorStore& store,
                    EnrichmentOptions options);

  // Every candidate with non-zero affinity for (c, parent), best first, ties
  // broken lexicographically. Terms in `exclude` are skipped.
  std::vector<TermAffinity> rank_terms(ClassId c, ClassId parent,
                                       const std::vector<std::string>& exclude = {}) const;

  EnrichedTermSet enrich_class(ClassId c, const LlmTermSet& llm_terms) const;

  const std::vector<DocSet>& class_docs() const { return class_docs_; }
  // Candidate terms with no vector in the store; they are never ranked.
  const std::vector<std::string>& missing_term_vectors() const { return missing_; }
  // Classes whose name has no vector; they receive no corpus terms.
  const ClassList& classes_without_name_vector() const { return no_name_vector_; }

 private:
  struct Counts {
    double tf = 0.0;
    std::size_t df = 0;
  };

  const Corpus& corpus_;
  const Taxonomy& taxonomy_;
  std::vector<DocSet> class_docs_;
  const VectorStore& store_;
  EnrichmentOptions options_;

  std::vector<std::string> terms_;
  std::vector<const Vector*> term_vectors_;
  std::vector<std::unordered_map<std::size_t, Counts>> class_counts_;
  std::vector<double> class_length_;
  std::vector<std::string> missing_;
  ClassList no_name_vector_;
};

// Runs enrich_class for every non-root class on up to `workers` threads.
std::vector<EnrichedTermSet> enrich_all(const EnrichmentContext& ctx, const Taxonomy& t,
                                        const LlmTermTable& llm_terms, int workers = 1);

}  // namespace teleclass
