// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "teleclass/corpus.hpp"
#include "teleclass/errors.hpp"
#include "teleclass/taxonomy.hpp"

namespace teleclass {

enum class TemplateId { kEnrich, kAnnotate, kGenerate };

std::string_view to_string(TemplateId id);
TemplateId template_from_string(std::string_view s);

struct PromptRequest {
  TemplateId template_id = TemplateId::kEnrich;
  std::string rendered_text;
  // Identifiers needed to re-render the prompt and for rule-based mocks.
  std::map<std::string, std::string> metadata;
};

// Dataset-specific wording substituted into the prompt templates.
struct DomainProfile {
  std::string class_blurb;    // "<class> is {class_blurb} and is the subclass of ..."
  std::string document_kind;  // "You will be provided with {document_kind}, ..."
  std::string label_noun;     // "... please select its {label_noun} from ..."
  std::string persona;        // "Suppose you are {persona}, ..."
  std::string style;          // "... format of the text should be {style}."

  static DomainProfile amazon();
  static DomainProfile dbpedia();
  static DomainProfile preset(std::string_view name);
};

struct PromptOptions {
  int terms_per_class = 10;
  // Whitespace-delimited words of document text kept in annotation prompts.
  std::size_t document_word_budget = 400;
};

// One prompt per (class, parent) pair, ordered like taxonomy.parents(c).
std::vector<PromptRequest> build_enrichment_prompts(const Taxonomy& t, ClassId c,
                                                    const DomainProfile& domain,
                                                    const PromptOptions& options = {});

// Candidates are listed in name order. Long documents are cut at a word
// boundary and metadata["truncated"] is set to "true".
PromptRequest build_annotation_prompt(const Document& doc, const ClassList& candidates,
                                      const Taxonomy& t, const DomainProfile& domain,
                                      const PromptOptions& options = {});

PromptRequest build_generation_prompt(const LabelPath& path, int q, const Taxonomy& t,
                                      const DomainProfile& domain);

// Content hash identifying a completion: sha256(backend_id "\n" text).
std::string request_hash(std::string_view rendered_text, std::string_view backend_id);

// A single failed backend attempt. The gateway decides whether to retry.
class AttemptFailure : public Error {
 public:
  enum class Kind { kTransport, kRateLimit, kFatal };
  AttemptFailure(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string id() const = 0;
  // Throws AttemptFailure on any failure.
  virtual std::string complete(const PromptRequest& request) = 0;
};

// Planted knowledge for the rule-driven mock.
struct MockRules {
  std::unordered_map<std::string, std::vector<std::string>> doc_labels;   // doc_id -> class names
  std::unordered_map<std::string, std::vector<std::string>> class_terms;  // class name -> terms
};

// Deterministic offline backend. Looks the request hash up in a response
// table first, then falls back to rules when they are configured.
class MockBackend : public CompletionBackend {
 public:
  explicit MockBackend(std::unordered_map<std::string, std::string> table = {},
                       std::optional<MockRules> rules = std::nullopt);

  // Reads {"hash": ..., "response": ...} lines; llm_cache.jsonl qualifies.
  static std::unordered_map<std::string, std::string> parse_table(std::string_view jsonl);

  std::string id() const override { return "mock"; }
  std::string complete(const PromptRequest& request) override;

  // The next `count` calls fail with `kind` before any lookup happens.
  void fail_next(int count, AttemptFailure::Kind kind);
  std::size_t calls() const { return calls_.load(); }

 private:
  std::string answer_by_rule(const PromptRequest& request) const;

  std::unordered_map<std::string, std::string> table_;
  std::optional<MockRules> rules_;
  std::atomic<std::size_t> calls_{0};
  std::mutex fail_mutex_;
  int fail_count_ = 0;
  AttemptFailure::Kind fail_kind_ = AttemptFailure::Kind::kTransport;
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key_env;
  double enrich_temperature = 0.0;
  double annotate_temperature = 0.0;
  double generate_temperature = 1.0;
  int timeout_seconds = 60;
};

// OpenAI-compatible chat completion endpoint ({base_url}/chat/completions).
class HttpBackend : public CompletionBackend {
 public:
  // Fails with ValidationError when the API key variable is unset, so no
  // request is ever attempted without credentials.
  explicit HttpBackend(HttpBackendConfig config);

  std::string id() const override;
  std::string complete(const PromptRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string api_key_;
  std::string origin_;  // scheme://host[:port]
  std::string path_prefix_;
};

struct CompletionRecord {
  std::string request_hash;
  std::string template_id;
  std::string request;
  std::string response;
  std::string backend;
  std::string timestamp;
  bool from_cache = false;
};

// Append-only JSONL cache keyed by request hash. An empty path keeps the
// cache in memory only.
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path file = {});

  std::optional<CompletionRecord> lookup(const std::string& hash) const;
  void store(const CompletionRecord& record);
  std::size_t size() const;

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, CompletionRecord> records_;
};

struct GatewayOptions {
  int max_retries = 2;  // attempts = 1 + max_retries
  std::chrono::milliseconds base_delay{500};
  int concurrency = 4;
};

// Cache-first access to a backend with retries, exponential backoff and
// de-duplication of identical in-flight requests. Thread-safe.
class LlmGateway {
 public:
  LlmGateway(CompletionBackend& backend, CompletionCache& cache, GatewayOptions options = {});

  CompletionRecord complete(const PromptRequest& request);

  int concurrency() const { return options_.concurrency; }
  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::string invoke_with_retries(const PromptRequest& request);

  CompletionBackend& backend_;
  CompletionCache& cache_;
  GatewayOptions options_;
  std::mutex inflight_mutex_;
  std::unordered_map<std::string, std::shared_future<std::string>> inflight_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

// Splits on commas and newlines, strips numbering, bullets and quotes,
// lowercases, drops empties and duplicates. Throws ParseError when nothing
// is left.
std::vector<std::string> parse_term_list(std::string_view response);

struct ClassSelection {
  ClassList classes;  // sorted by id
  bool fallback_used = false;
  std::vector<std::string> ignored_names;  // taxonomy names that were not candidates
};

// Finds candidate names in the response (case-insensitive, whole words,
// longest name first). When no candidate is named, returns `fallback`.
ClassSelection parse_class_selection(std::string_view response, const ClassList& candidates,
                                     const Taxonomy& t, ClassId fallback);

// Splits a generation response into passages: numbered items when present,
// otherwise blank-line separated blocks.
std::vector<std::string> split_passages(std::string_view response);

}  // namespace teleclass
