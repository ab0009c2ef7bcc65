// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/annotation.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleclass/parallel.hpp"
#include "teleclass/text.hpp"

namespace teleclass {

LlmEnrichment llm_enrich_all(const Taxonomy& t, LlmGateway& gateway, const DomainProfile& domain,
                             const PromptOptions& options) {
  struct Job {
    ClassId cls;
    PromptRequest request;
  };
  std::vector<Job> jobs;
  for (ClassId c : t.classes()) {
    for (auto& req : build_enrichment_prompts(t, c, domain, options)) {
      jobs.push_back({c, std::move(req)});
    }
  }

  struct Outcome {
    std::vector<std::string> terms;
    std::string failure;
    bool backend_failure = false;
  };
  std::vector<Outcome> outcomes(jobs.size());
  parallel_for(jobs.size(), gateway.concurrency(), [&](std::size_t i) {
    const auto& job = jobs[i];
    try {
      auto record = gateway.complete(job.request);
      outcomes[i].terms = parse_term_list(record.response);
    } catch (const ParseError& e) {
      outcomes[i].failure = fmt::format("{} (parent {}): unparsable response", t.name(job.cls),
                                        job.request.metadata.at("parent"));
    } catch (const BackendError& e) {
      outcomes[i].failure = fmt::format("{} (parent {}): {}", t.name(job.cls),
                                        job.request.metadata.at("parent"), e.what());
      outcomes[i].backend_failure = true;
    }
  });

  LlmEnrichment result;
  result.prompts = jobs.size();
  result.terms.resize(t.node_count());
  std::vector<std::set<std::string>> merged(t.node_count());
  for (ClassId c : t.classes()) merged[index_of(c)].insert(to_lower_ascii(t.name(c)));
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& bucket = merged[index_of(jobs[i].cls)];
    bucket.insert(outcomes[i].terms.begin(), outcomes[i].terms.end());
    if (!outcomes[i].failure.empty()) result.failures.push_back(outcomes[i].failure);
    if (outcomes[i].backend_failure) ++result.backend_failures;
  }
  for (std::size_t i = 0; i < merged.size(); ++i) {
    result.terms[i].class_id = class_id(i);
    result.terms[i].terms.assign(merged[i].begin(), merged[i].end());
  }
  return result;
}

Json llm_terms_to_json(const Taxonomy& t, const LlmTermTable& table) {
  Json out = Json::array();
  for (ClassId c : t.classes()) {
    out.push_back({{"class_id", index_of(c)},
                   {"name", t.name(c)},
                   {"terms", table.at(index_of(c)).terms}});
  }
  return out;
}

LlmTermTable llm_terms_from_json(const Taxonomy& t, const Json& doc) {
  LlmTermTable table(t.node_count());
  for (std::size_t i = 0; i < table.size(); ++i) table[i].class_id = class_id(i);
  for (const auto& entry : doc) {
    ClassId c = class_id(entry.at("class_id").get<std::size_t>());
    if (!t.contains(c) || t.is_root(c)) {
      throw ValidationError(fmt::format("term table names unknown class {}", index_of(c)));
    }
    table[index_of(c)].terms = entry.at("terms").get<std::vector<std::string>>();
  }
  return table;
}

double class_doc_similarity(const LlmTermSet& terms, std::span<const float> doc_vector,
                            const VectorStore& store) {
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& term : terms.terms) {
    const Vector* v = store.find(VectorSpace::kTerm, term);
    if (!v) continue;
    any = true;
    best = std::max(best, cosine(std::span<const float>(*v), doc_vector));
  }
  if (!any) {
    throw LookupError(fmt::format("class {} has no term with a vector",
                                  index_of(terms.class_id)));
  }
  return best;
}

SimilarityIndex::SimilarityIndex(const Taxonomy& t, const LlmTermTable& terms,
                                 const VectorStore& store)
    : taxonomy_(t), vectors_(t.node_count()) {
  for (ClassId c : t.classes()) {
    for (const auto& term : terms.at(index_of(c)).terms) {
      if (const Vector* v = store.find(VectorSpace::kTerm, term)) {
        vectors_[index_of(c)].push_back(v);
      } else {
        missing_.push_back(term);
      }
    }
    if (vectors_[index_of(c)].empty()) unusable_.push_back(c);
  }
  std::sort(missing_.begin(), missing_.end());
  missing_.erase(std::unique(missing_.begin(), missing_.end()), missing_.end());
}

double SimilarityIndex::similarity(ClassId c, std::span<const float> doc_vector) const {
  const auto& vs = vectors_.at(index_of(c));
  if (vs.empty()) {
    throw LookupError(fmt::format("class \"{}\" has no term with a vector", taxonomy_.name(c)));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const Vector* v : vs) best = std::max(best, cosine(std::span<const float>(*v), doc_vector));
  return best;
}

CandidateSet candidate_search(const Taxonomy& t, const SimilarityIndex& index,
                              std::span<const float> doc_vector,
                              const CandidateSearchOptions& options) {
  return candidate_search(
      t, [&](ClassId c) { return index.similarity(c, doc_vector); }, options);
}

namespace {

Json ids_json(const ClassList& ids) {
  Json arr = Json::array();
  for (ClassId c : ids) arr.push_back(index_of(c));
  return arr;
}

ClassList ids_from_json(const Json& arr) {
  ClassList out;
  for (const auto& v : arr) out.push_back(class_id(v.get<std::size_t>()));
  return out;
}

}  // namespace

Json to_json(const InitialCoreAssignment& a) {
  return {{"doc_id", a.doc_id},
          {"candidates", ids_json(a.candidates)},
          {"core", ids_json(a.core)},
          {"fallback", a.fallback_used}};
}

InitialCoreAssignment initial_assignment_from_json(const Json& obj) {
  InitialCoreAssignment a;
  a.doc_id = obj.at("doc_id").get<std::string>();
  a.candidates = ids_from_json(obj.at("candidates"));
  a.core = ids_from_json(obj.at("core"));
  a.fallback_used = obj.value("fallback", false);
  return a;
}

AnnotationResult annotate_corpus(const Corpus& corpus, const Taxonomy& t,
                                 const SimilarityIndex& index, const VectorStore& store,
                                 LlmGateway& gateway, const DomainProfile& domain,
                                 const AnnotationOptions& options) {
  struct Slot {
    std::optional<InitialCoreAssignment> assignment;
    std::string failure;
    bool backend_failure = false;
    bool truncated = false;
  };
  std::vector<Slot> slots(corpus.size());
  parallel_for(corpus.size(), gateway.concurrency(), [&](std::size_t i) {
    const Document& doc = corpus.doc(i);
    Slot& slot = slots[i];
    const Vector* vec = store.find(VectorSpace::kDoc, doc.doc_id);
    if (!vec) {
      slot.failure = doc.doc_id + ": no document vector";
      return;
    }
    try {
      auto candidates = candidate_search(t, index, *vec, options.search);
      if (candidates.classes.empty()) {
        slot.failure = doc.doc_id + ": no candidate classes";
        return;
      }
      auto request = build_annotation_prompt(doc, candidates.classes, t, domain, options.prompt);
      slot.truncated = request.metadata.at("truncated") == "true";
      auto record = gateway.complete(request);
      auto selection = parse_class_selection(record.response, candidates.classes, t,
                                             candidates.best);
      slot.assignment = InitialCoreAssignment{doc.doc_id, candidates.classes, selection.classes,
                                              selection.fallback_used};
    } catch (const BackendError& e) {
      slot.failure = doc.doc_id + ": " + e.what();
      slot.backend_failure = true;
    } catch (const LookupError& e) {
      slot.failure = doc.doc_id + ": " + e.what();
    }
  });

  AnnotationResult result;
  for (auto& slot : slots) {
    if (slot.truncated) ++result.truncated_prompts;
    if (slot.backend_failure) ++result.backend_failures;
    if (slot.assignment) {
      if (slot.assignment->fallback_used) ++result.fallbacks;
      result.assignments.push_back(std::move(*slot.assignment));
    } else {
      result.failures.push_back(std::move(slot.failure));
    }
  }
  return result;
}

}  // namespace teleclass
