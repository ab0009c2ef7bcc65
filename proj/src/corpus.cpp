// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "teleclass/errors.hpp"
#include "teleclass/io.hpp"
#include "teleclass/text.hpp"

namespace teleclass {

namespace {

bool is_token_byte(unsigned char ch) {
  return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
         ch >= 0x80;
}

DocSet intersect(const DocSet& a, const DocSet& b) {
  DocSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

constexpr const char* kEnglishStopwords[] = {
    "a",       "about",  "above",   "after",  "again",  "against", "all",    "am",
    "an",      "and",    "any",     "are",    "as",     "at",      "be",     "because",
    "been",    "before", "being",   "below",  "between","both",    "but",    "by",
    "can",     "could",  "did",     "do",     "does",   "doing",   "down",   "during",
    "each",    "few",    "for",     "from",   "further","had",     "has",    "have",
    "having",  "he",     "her",     "here",   "hers",   "herself", "him",    "himself",
    "his",     "how",    "i",       "if",     "in",     "into",    "is",     "it",
    "its",     "itself", "just",    "me",     "more",   "most",    "my",     "myself",
    "no",      "nor",    "not",     "now",    "of",     "off",     "on",     "once",
    "only",    "or",     "other",   "our",    "ours",   "ourselves","out",   "over",
    "own",     "same",   "she",     "should", "so",     "some",    "such",   "than",
    "that",    "the",    "their",   "theirs", "them",   "themselves","then", "there",
    "these",   "they",   "this",    "those",  "through","to",      "too",    "under",
    "until",   "up",     "very",    "was",    "we",     "were",    "what",   "when",
    "where",   "which",  "while",   "who",    "whom",   "why",     "will",   "with",
    "would",   "you",    "your",    "yours",  "yourself","yourselves","s",   "t",
    "don",     "also",   "get",     "got",    "one",    "much",    "many",   "really",
};

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    auto ch = static_cast<unsigned char>(raw);
    if (is_token_byte(ch)) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<unsigned char>(ch - 'A' + 'a');
      current.push_back(static_cast<char>(ch));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Corpus Corpus::ingest(std::string_view jsonl) {
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_jsonl(jsonl, [&](std::size_t line, const Json& obj) {
    if (!obj.contains("id") || !obj.contains("text") || !obj["text"].is_string()) {
      throw ValidationError(fmt::format("line {}: expected \"id\" and string \"text\"", line));
    }
    std::string id;
    if (obj["id"].is_string()) {
      id = obj["id"].get<std::string>();
    } else if (obj["id"].is_number_integer()) {
      id = std::to_string(obj["id"].get<std::int64_t>());
    } else {
      throw ValidationError(fmt::format("line {}: \"id\" must be a string or integer", line));
    }
    if (!seen.emplace(id, line).second) {
      throw ValidationError(fmt::format("line {}: duplicate doc_id \"{}\" (first on line {})",
                                        line, id, seen[id]));
    }
    Document d;
    d.doc_id = std::move(id);
    d.text = obj["text"].get<std::string>();
    d.tokens = tokenize(d.text);
    docs.push_back(std::move(d));
  });
  return from_documents(std::move(docs));
}

Corpus Corpus::from_documents(std::vector<Document> docs) {
  Corpus c;
  c.docs_ = std::move(docs);
  for (std::size_t i = 0; i < c.docs_.size(); ++i) {
    if (c.docs_[i].tokens.empty()) c.docs_[i].tokens = tokenize(c.docs_[i].text);
    if (!c.by_id_.emplace(c.docs_[i].doc_id, i).second) {
      throw ValidationError("duplicate doc_id \"" + c.docs_[i].doc_id + "\"");
    }
  }
  c.build_index();
  return c;
}

void Corpus::build_index() {
  std::size_t total = 0;
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    total += docs_[i].tokens.size();
    for (const auto& tok : docs_[i].tokens) {
      auto& postings = unigram_postings_[tok];
      if (postings.empty() || postings.back() != i) postings.push_back(i);
    }
  }
  avg_doc_len_ = docs_.empty() ? 0.0 : static_cast<double>(total) / docs_.size();
}

std::optional<std::size_t> Corpus::position(std::string_view doc_id) const {
  auto it = by_id_.find(std::string(doc_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

DocSet Corpus::all() const {
  DocSet out(docs_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

DocSet Corpus::docs_containing(std::string_view term) const {
  auto tokens = tokenize(term);
  return docs_containing_tokens(tokens);
}

DocSet Corpus::docs_containing_tokens(std::span<const std::string> tokens) const {
  if (tokens.empty()) return {};
  // Start from the rarest token's postings, then verify contiguity.
  const DocSet* smallest = nullptr;
  for (const auto& tok : tokens) {
    auto it = unigram_postings_.find(tok);
    if (it == unigram_postings_.end()) return {};
    if (!smallest || it->second.size() < smallest->size()) smallest = &it->second;
  }
  DocSet candidates = *smallest;
  for (const auto& tok : tokens) {
    const auto& postings = unigram_postings_.at(tok);
    if (&postings != smallest) candidates = intersect(candidates, postings);
  }
  if (tokens.size() == 1) return candidates;
  DocSet out;
  for (std::size_t pos : candidates) {
    if (count_occurrences(docs_[pos].tokens, tokens) > 0) out.push_back(pos);
  }
  return out;
}

StopwordList StopwordList::english() {
  StopwordList s;
  for (const char* w : kEnglishStopwords) s.words_.emplace(w);
  return s;
}

StopwordList StopwordList::parse(std::string_view text) {
  StopwordList s;
  for (const auto& line : split_lines(text)) {
    auto word = trim(line);
    if (!word.empty()) s.words_.insert(to_lower_ascii(word));
  }
  return s;
}

std::vector<CandidateTerm> extract_candidate_terms(const Corpus& corpus, int max_n,
                                                   int min_freq,
                                                   const StopwordList& stopwords) {
  if (max_n < 1 || min_freq < 1) {
    throw ValidationError("extract_candidate_terms needs max_n >= 1 and min_freq >= 1");
  }
  std::unordered_map<std::string, std::size_t> df;
  std::unordered_set<std::string> in_doc;
  for (const auto& doc : corpus.docs()) {
    in_doc.clear();
    const auto& toks = doc.tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (stopwords.contains(toks[i])) continue;
      std::string gram;
      for (int n = 1; n <= max_n && i + n <= toks.size(); ++n) {
        const auto& last = toks[i + n - 1];
        if (n > 1) gram.push_back(' ');
        gram += last;
        if (stopwords.contains(last)) continue;
        in_doc.insert(gram);
      }
    }
    for (const auto& g : in_doc) ++df[g];
  }
  std::vector<CandidateTerm> out;
  for (auto& [gram, count] : df) {
    if (count >= static_cast<std::size_t>(min_freq)) out.push_back({gram, count});
  }
  std::sort(out.begin(), out.end(), [](const CandidateTerm& a, const CandidateTerm& b) {
    if (a.corpus_frequency != b.corpus_frequency) return a.corpus_frequency > b.corpus_frequency;
    return a.surface < b.surface;
  });
  return out;
}

std::size_t count_occurrences(std::span<const std::string> haystack,
                              std::span<const std::string> needle) {
  if (needle.empty() || needle.size() > haystack.size()) return 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) ++count;
  }
  return count;
}

std::size_t document_frequency(const Corpus& corpus, std::string_view term,
                               const DocSet& doc_set) {
  return intersect(corpus.docs_containing(term), doc_set).size();
}

double bm25_score(std::size_t target, std::span<const PseudoDocStats> collection,
                  Bm25Params params) {
  if (collection.empty()) throw ValidationError("bm25 over an empty collection");
  if (target >= collection.size()) throw ValidationError("bm25 target outside collection");
  if (params.k1 <= 0.0 || params.b < 0.0 || params.b > 1.0) {
    throw ValidationError("bm25 needs k1 > 0 and 0 <= b <= 1");
  }
  const auto& doc = collection[target];
  if (doc.tf <= 0.0) return 0.0;
  double total_len = 0.0;
  double containing = 0.0;
  for (const auto& d : collection) {
    total_len += d.length;
    if (d.tf > 0.0) containing += 1.0;
  }
  const double n_docs = static_cast<double>(collection.size());
  const double avg_len = total_len / n_docs;
  const double idf = std::log(1.0 + (n_docs - containing + 0.5) / (containing + 0.5));
  const double norm = params.k1 * (1.0 - params.b + params.b * doc.length / avg_len);
  return idf * doc.tf * (params.k1 + 1.0) / (doc.tf + norm);
}

namespace {

PseudoDocStats pseudo_doc_stats(const Corpus& corpus, std::span<const std::string> term,
                                const DocSet& docs) {
  PseudoDocStats s;
  for (std::size_t pos : docs) {
    const auto& toks = corpus.doc(pos).tokens;
    s.length += static_cast<double>(toks.size());
    s.tf += static_cast<double>(count_occurrences(toks, term));
  }
  return s;
}

}  // namespace

double bm25(const Corpus& corpus, std::string_view term, const DocSet& target_docs,
            std::span<const DocSet> sibling_docs, Bm25Params params) {
  auto tokens = tokenize(term);
  std::vector<PseudoDocStats> collection;
  collection.reserve(sibling_docs.size() + 1);
  collection.push_back(pseudo_doc_stats(corpus, tokens, target_docs));
  for (const auto& s : sibling_docs) collection.push_back(pseudo_doc_stats(corpus, tokens, s));
  return bm25_score(0, collection, params);
}

}  // namespace teleclass
