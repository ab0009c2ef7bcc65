// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace teleclass {

// Lowercase ASCII; any byte that is not an ASCII letter or digit separates
// tokens, except bytes >= 0x80 which stay inside tokens so UTF-8 survives.
std::vector<std::string> tokenize(std::string_view text);

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<std::string> tokens;
};

// Sorted, duplicate-free positions into Corpus::docs().
using DocSet = std::vector<std::size_t>;

class Corpus {
 public:
  Corpus() = default;

  // JSON Lines, one {"id": ..., "text": ...} per line.
  static Corpus ingest(std::string_view jsonl);
  // Documents with empty `tokens` are tokenized from their text.
  static Corpus from_documents(std::vector<Document> docs);

  const std::vector<Document>& docs() const { return docs_; }
  const Document& doc(std::size_t pos) const { return docs_.at(pos); }
  std::size_t size() const { return docs_.size(); }
  double avg_doc_len() const { return avg_doc_len_; }
  std::optional<std::size_t> position(std::string_view doc_id) const;

  // Documents whose token sequence contains `term`'s tokens contiguously.
  DocSet docs_containing(std::string_view term) const;
  DocSet docs_containing_tokens(std::span<const std::string> tokens) const;

  DocSet all() const;

 private:
  void build_index();

  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, DocSet> unigram_postings_;
  double avg_doc_len_ = 0.0;
};

class StopwordList {
 public:
  // Built-in English list.
  static StopwordList english();
  // One token per line; blank lines and surrounding whitespace ignored.
  static StopwordList parse(std::string_view text);

  bool contains(std::string_view token) const { return words_.count(std::string(token)) > 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

struct CandidateTerm {
  std::string surface;
  std::size_t corpus_frequency = 0;  // number of documents containing it

  bool operator==(const CandidateTerm&) const = default;
};

// Contiguous n-grams (n <= max_n) present in at least `min_freq` documents,
// skipping n-grams that start or end with a stopword. Ordered by frequency
// descending, then lexicographically.
std::vector<CandidateTerm> extract_candidate_terms(const Corpus& corpus, int max_n,
                                                   int min_freq,
                                                   const StopwordList& stopwords);

// Non-overlapping is not required: "a a" occurs twice in "a a a".
std::size_t count_occurrences(std::span<const std::string> haystack,
                              std::span<const std::string> needle);

std::size_t document_frequency(const Corpus& corpus, std::string_view term,
                               const DocSet& doc_set);

// Term statistics of one pseudo-document (a class's documents concatenated).
struct PseudoDocStats {
  double tf = 0.0;
  double length = 0.0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// BM25 of a term against collection[target], with the non-negative
// idf = ln(1 + (N - n + 0.5) / (n + 0.5)).
double bm25_score(std::size_t target, std::span<const PseudoDocStats> collection,
                  Bm25Params params);

// Concatenates each document set into a pseudo-document and scores `term`
// against the target within {target} + siblings.
double bm25(const Corpus& corpus, std::string_view term, const DocSet& target_docs,
            std::span<const DocSet> sibling_docs, Bm25Params params);

}  // namespace teleclass
