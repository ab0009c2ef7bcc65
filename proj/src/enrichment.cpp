// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/enrichment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "teleclass/parallel.hpp"
#include "teleclass/text.hpp"

namespace teleclass {

std::vector<DocSet> collect_class_documents(const std::vector<InitialCoreAssignment>& assignments,
                                            const Corpus& corpus, const Taxonomy& t) {
  std::vector<std::set<std::size_t>> sets(t.node_count());
  for (const auto& a : assignments) {
    auto pos = corpus.position(a.doc_id);
    if (!pos) throw LookupError("assignment for unknown document \"" + a.doc_id + "\"");
    for (ClassId core : a.core) {
      sets[index_of(core)].insert(*pos);
      for (ClassId anc : t.ancestors(core)) sets[index_of(anc)].insert(*pos);
    }
  }
  std::vector<DocSet> out(t.node_count());
  for (std::size_t i = 0; i < sets.size(); ++i) out[i].assign(sets[i].begin(), sets[i].end());
  return out;
}

DocSet collect_class_documents(const std::vector<InitialCoreAssignment>& assignments,
                               const Corpus& corpus, const Taxonomy& t, ClassId c) {
  const auto& desc = t.descendants(c);
  std::set<std::size_t> docs;
  for (const auto& a : assignments) {
    bool hit = std::any_of(a.core.begin(), a.core.end(), [&](ClassId k) {
      return k == c || std::binary_search(desc.begin(), desc.end(), k);
    });
    if (!hit) continue;
    auto pos = corpus.position(a.doc_id);
    if (!pos) throw LookupError("assignment for unknown document \"" + a.doc_id + "\"");
    docs.insert(*pos);
  }
  return DocSet(docs.begin(), docs.end());
}

double popularity(std::string_view term, const DocSet& class_docs, const Corpus& corpus) {
  return std::log1p(static_cast<double>(document_frequency(corpus, term, class_docs)));
}

double distinctiveness(std::string_view term, ClassId c, ClassId parent, const Taxonomy& t,
                       const std::vector<DocSet>& class_docs, const Corpus& corpus,
                       const EnrichmentOptions& options) {
  ClassList sibs = t.siblings(c, parent);
  // Score each sibling within the collection of all of the parent's children.
  auto score_of = [&](ClassId target) {
    std::vector<DocSet> others;
    for (ClassId s : sibs) {
      if (s != target) others.push_back(class_docs.at(index_of(s)));
    }
    return bm25(corpus, term, class_docs.at(index_of(target)), others, options.bm25);
  };
  double denom = 1.0;
  for (ClassId s : sibs) {
    if (options.sibling_exclude_self && s == c) continue;
    denom += std::exp(score_of(s));
  }
  return std::exp(score_of(c)) / denom;
}

double semantic_similarity(ClassId c, std::string_view term, const Taxonomy& t,
                           const VectorStore& store) {
  const Vector& name = store.at(VectorSpace::kName, t.name(c));
  const Vector& tv = store.at(VectorSpace::kTerm, term);
  return cosine(name, tv);
}

double affinity(double pop, double dist, double sem) {
  const double product = pop * dist * std::max(sem, 0.0);
  return product > 0.0 ? std::cbrt(product) : 0.0;
}

namespace {

std::string normalize_term(std::string_view term) { return join(tokenize(term), " "); }

Json affinities_json(const std::vector<TermAffinity>& ranked) {
  Json arr = Json::array();
  for (const auto& a : ranked) arr.push_back(a.affinity);
  return arr;
}

}  // namespace

Json to_json(const EnrichedTermSet& e) {
  Json corpus = Json::object();
  Json scores = Json::object();
  for (const auto& [parent, ranked] : e.corpus_terms_by_parent) {
    Json terms = Json::array();
    for (const auto& a : ranked) terms.push_back(a.term);
    corpus[std::to_string(index_of(parent))] = terms;
    scores[std::to_string(index_of(parent))] = affinities_json(ranked);
  }
  return {{"class_id", index_of(e.class_id)},
          {"llm", e.llm_terms},
          {"corpus", corpus},
          {"affinity", scores},
          {"merged", e.merged}};
}

EnrichedTermSet enriched_from_json(const Json& obj) {
  EnrichedTermSet e;
  e.class_id = class_id(obj.at("class_id").get<std::size_t>());
  e.llm_terms = obj.at("llm").get<std::vector<std::string>>();
  e.merged = obj.at("merged").get<std::vector<std::string>>();
  const Json empty = Json::object();
  const Json& scores = obj.contains("affinity") ? obj["affinity"] : empty;
  for (const auto& [key, terms] : obj.at("corpus").items()) {
    ClassId parent = class_id(std::stoul(key));
    auto& ranked = e.corpus_terms_by_parent[parent];
    for (std::size_t i = 0; i < terms.size(); ++i) {
      TermAffinity a;
      a.term = terms[i].get<std::string>();
      a.class_id = e.class_id;
      a.parent_id = parent;
      if (scores.contains(key)) a.affinity = scores[key].at(i).get<double>();
      ranked.push_back(std::move(a));
    }
  }
  return e;
}

EnrichmentContext::EnrichmentContext(const Corpus& corpus, const Taxonomy& t,
                                     std::vector<DocSet> class_docs,
                                     const std::vector<std::string>& candidate_terms,
                                     const VectorStore& store, EnrichmentOptions options)
    : corpus_(corpus),
      taxonomy_(t),
      class_docs_(std::move(class_docs)),
      store_(store),
      options_(options) {
  if (options_.k < 1) throw ValidationError("enrichment needs k >= 1");
  if (class_docs_.size() != t.node_count()) {
    throw ValidationError("class document sets do not match the taxonomy size");
  }
  std::unordered_map<std::string, std::size_t> ids;
  std::size_t max_n = 0;
  for (const auto& raw : candidate_terms) {
    std::string term = normalize_term(raw);
    if (term.empty() || ids.count(term)) continue;
    ids.emplace(term, terms_.size());
    max_n = std::max<std::size_t>(max_n, tokenize(term).size());
    const Vector* v = store.find(VectorSpace::kTerm, term);
    if (!v) missing_.push_back(term);
    terms_.push_back(std::move(term));
    term_vectors_.push_back(v);
  }
  std::sort(missing_.begin(), missing_.end());

  // Occurrence counts of every candidate term per document.
  std::vector<std::unordered_map<std::size_t, double>> doc_counts(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& toks = corpus.doc(d).tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      std::string gram;
      for (std::size_t n = 1; n <= max_n && i + n <= toks.size(); ++n) {
        if (n > 1) gram.push_back(' ');
        gram += toks[i + n - 1];
        auto it = ids.find(gram);
        if (it != ids.end()) doc_counts[d][it->second] += 1.0;
      }
    }
  }

  class_counts_.resize(t.node_count());
  class_length_.assign(t.node_count(), 0.0);
  for (std::size_t c = 0; c < class_docs_.size(); ++c) {
    for (std::size_t d : class_docs_[c]) {
      class_length_[c] += static_cast<double>(corpus.doc(d).tokens.size());
      for (const auto& [tid, count] : doc_counts[d]) {
        auto& slot = class_counts_[c][tid];
        slot.tf += count;
        slot.df += 1;
      }
    }
  }

  for (ClassId c : t.classes()) {
    if (!store.contains(VectorSpace::kName, t.name(c))) no_name_vector_.push_back(c);
  }
}

std::vector<TermAffinity> EnrichmentContext::rank_terms(
    ClassId c, ClassId parent, const std::vector<std::string>& exclude) const {
  const ClassList sibs = taxonomy_.siblings(c, parent);
  const Vector* name_vec = store_.find(VectorSpace::kName, taxonomy_.name(c));
  if (!name_vec) return {};

  std::unordered_set<std::string> excluded;
  for (const auto& e : exclude) excluded.insert(normalize_term(e));

  std::size_t self_pos = 0;
  for (std::size_t i = 0; i < sibs.size(); ++i) {
    if (sibs[i] == c) self_pos = i;
  }

  std::vector<TermAffinity> out;
  std::vector<PseudoDocStats> collection(sibs.size());
  for (const auto& [tid, counts] : class_counts_[index_of(c)]) {
    if (counts.df == 0 || !term_vectors_[tid] || excluded.count(terms_[tid])) continue;
    const double sem = cosine(std::span<const float>(*name_vec),
                              std::span<const float>(*term_vectors_[tid]));
    if (sem <= 0.0) continue;

    for (std::size_t i = 0; i < sibs.size(); ++i) {
      const std::size_t s = index_of(sibs[i]);
      const auto& sc = class_counts_[s];
      auto it = sc.find(tid);
      collection[i] = {it == sc.end() ? 0.0 : it->second.tf, class_length_[s]};
    }
    double denom = 1.0;
    double numer = 0.0;
    for (std::size_t i = 0; i < sibs.size(); ++i) {
      const double e = std::exp(bm25_score(i, collection, options_.bm25));
      if (i == self_pos) numer = e;
      if (options_.sibling_exclude_self && i == self_pos) continue;
      denom += e;
    }

    TermAffinity a;
    a.term = terms_[tid];
    a.class_id = c;
    a.parent_id = parent;
    a.pop = std::log1p(static_cast<double>(counts.df));
    a.dist = numer / denom;
    a.sem = sem;
    a.affinity = affinity(a.pop, a.dist, a.sem);
    if (a.affinity > 0.0) out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(), [](const TermAffinity& x, const TermAffinity& y) {
    if (x.affinity != y.affinity) return x.affinity > y.affinity;
    return x.term < y.term;
  });
  return out;
}

EnrichedTermSet EnrichmentContext::enrich_class(ClassId c, const LlmTermSet& llm_terms) const {
  EnrichedTermSet e;
  e.class_id = c;
  e.llm_terms = llm_terms.terms;
  std::set<std::string> merged(llm_terms.terms.begin(), llm_terms.terms.end());
  for (ClassId parent : taxonomy_.parents(c)) {
    auto ranked = rank_terms(c, parent, llm_terms.terms);
    if (ranked.size() > static_cast<std::size_t>(options_.k)) ranked.resize(options_.k);
    for (const auto& a : ranked) merged.insert(a.term);
    e.corpus_terms_by_parent[parent] = std::move(ranked);
  }
  e.merged.assign(merged.begin(), merged.end());
  return e;
}

std::vector<EnrichedTermSet> enrich_all(const EnrichmentContext& ctx, const Taxonomy& t,
                                        const LlmTermTable& llm_terms, int workers) {
  const auto& classes = t.classes();
  std::vector<EnrichedTermSet> out(classes.size());
  parallel_for(classes.size(), workers, [&](std::size_t i) {
    out[i] = ctx.enrich_class(classes[i], llm_terms.at(index_of(classes[i])));
  });
  return out;
}

}  // namespace teleclass
