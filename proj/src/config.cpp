// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/config.hpp"

#include <algorithm>
#include <charconv>
#include <utility>

#include <fmt/format.h>

#include "teleclass/errors.hpp"
#include "teleclass/io.hpp"
#include "teleclass/llm.hpp"
#include "teleclass/text.hpp"

namespace teleclass {

namespace {

const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> kDefaults = {
      // inputs and locations
      {"taxonomy", ""},
      {"corpus", ""},
      {"vectors", ""},
      {"generated_vectors", ""},
      {"test_corpus", ""},
      {"gold", ""},
      {"workdir", "work"},
      {"cache", ""},
      {"stopwords", ""},
      // completion backend
      {"backend", "mock"},
      {"mock_rules", ""},
      {"mock_table", ""},
      {"http_base_url", "https://api.openai.com/v1"},
      {"http_model", "gpt-3.5-turbo-0125"},
      {"api_key_env", "OPENAI_API_KEY"},
      {"http_timeout", "60"},
      {"domain", "amazon"},
      {"terms_per_class", "10"},
      {"document_word_budget", "400"},
      {"llm_concurrency", "4"},
      {"max_retries", "2"},
      {"retry_delay_ms", "500"},
      // annotation and enrichment
      {"beam_base", "3"},
      {"per_parent_beam", "false"},
      {"k", "20"},
      {"bm25_k1", "1.2"},
      {"bm25_b", "0.75"},
      {"ngram_max", "3"},
      {"min_term_freq", "2"},
      {"sibling_exclude_self", "false"},
      // refinement and generation
      {"confidence_fraction", "0.75"},
      {"candidates_only_refinement", "false"},
      {"q", "5"},
      // classifier
      {"lr", "5e-5"},
      {"batch_size", "64"},
      {"epochs", "20"},
      {"weight_decay", "0.01"},
      {"seed", "13"},
      {"dim_h", "0"},
      {"score_form", "sigmoid_linear"},
      {"threshold", "0.5"},
      {"workers", "4"},
  };
  return kDefaults;
}

constexpr std::string_view kPathKeys[] = {"taxonomy", "corpus",   "vectors",    "generated_vectors",
                                          "test_corpus", "gold",  "workdir",    "cache",
                                          "stopwords",   "mock_rules", "mock_table"};

}  // namespace

Config::Config() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : defaults()) out.push_back(k);
    return out;
  }();
  return kKeys;
}

bool Config::is_path_key(std::string_view key) {
  return std::find(std::begin(kPathKeys), std::end(kPathKeys), key) != std::end(kPathKeys);
}

Config Config::parse(std::string_view text, const std::filesystem::path& base_dir) {
  Config c;
  c.base_dir_ = base_dir;
  std::size_t line_no = 0;
  for (const auto& raw : split_lines(text)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(fmt::format("config line {}: expected key = value", line_no));
    }
    std::string key(trim(line.substr(0, eq)));
    try {
      c.set(key, std::string(trim(line.substr(eq + 1))));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& file) {
  return parse(read_file(file), file.parent_path());
}

void Config::apply_override(std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ValidationError(fmt::format("override \"{}\" is not key=value", assignment));
  }
  set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

void Config::set(const std::string& key, std::string value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError(fmt::format("unknown config key \"{}\"", key));
  it->second = std::move(value);
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError(fmt::format("unknown config key \"{}\"", key));
  return it->second;
}

std::filesystem::path Config::path(const std::string& key) const {
  const std::string& v = get(key);
  if (v.empty()) return {};
  std::filesystem::path p(v);
  if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
  return p.lexically_normal();
}

long long Config::get_int(const std::string& key) const {
  const std::string& v = get(key);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError(fmt::format("config key {}: \"{}\" is not an integer", key, v));
  }
  return out;
}

double Config::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ValidationError(fmt::format("config key {}: \"{}\" is not a number", key, v));
}

bool Config::get_bool(const std::string& key) const {
  const std::string v = to_lower_ascii(get(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError(fmt::format("config key {}: \"{}\" is not a boolean", key, v));
}

std::string Config::hash_of(const std::vector<std::string>& keys) const {
  std::string data;
  for (const auto& k : keys) data += k + "=" + get(k) + "\n";
  return sha256_hex(data);
}

namespace {

int positive(const Config& c, const std::string& key) {
  long long v = c.get_int(key);
  if (v < 1 || v > 1'000'000'000) {
    throw ValidationError(fmt::format("config key {} must be a positive integer, got {}", key, v));
  }
  return static_cast<int>(v);
}

int non_negative(const Config& c, const std::string& key) {
  long long v = c.get_int(key);
  if (v < 0 || v > 1'000'000'000) {
    throw ValidationError(fmt::format("config key {} must be non-negative, got {}", key, v));
  }
  return static_cast<int>(v);
}

}  // namespace

PipelineConfig PipelineConfig::from(const Config& c) {
  PipelineConfig p;
  p.taxonomy = c.path("taxonomy");
  p.corpus = c.path("corpus");
  p.vectors = c.path("vectors");
  for (const auto& [key, value] : {std::pair{"taxonomy", &p.taxonomy},
                                   std::pair{"corpus", &p.corpus},
                                   std::pair{"vectors", &p.vectors}}) {
    if (value->empty()) throw ValidationError(fmt::format("config key {} is required", key));
  }
  p.generated_vectors = c.path("generated_vectors");
  p.test_corpus = c.path("test_corpus");
  if (p.test_corpus.empty()) p.test_corpus = p.corpus;
  p.gold = c.path("gold");
  p.workdir = c.path("workdir");
  p.cache = c.path("cache");
  if (p.cache.empty()) p.cache = p.workdir / "llm_cache.jsonl";
  p.stopwords = c.path("stopwords");
  p.mock_rules = c.path("mock_rules");
  p.mock_table = c.path("mock_table");

  p.backend = c.get("backend");
  if (p.backend != "mock" && p.backend != "http") {
    throw ValidationError(fmt::format("backend must be mock or http, got \"{}\"", p.backend));
  }
  p.http_base_url = c.get("http_base_url");
  p.http_model = c.get("http_model");
  p.api_key_env = c.get("api_key_env");
  p.http_timeout = positive(c, "http_timeout");
  p.domain = c.get("domain");
  DomainProfile::preset(p.domain);  // validates the name

  p.k = positive(c, "k");
  p.q = positive(c, "q");
  p.confidence_fraction = c.get_double("confidence_fraction");
  if (!(p.confidence_fraction > 0.0 && p.confidence_fraction <= 1.0)) {
    throw ValidationError("confidence_fraction must lie in (0, 1]");
  }
  p.beam_base = positive(c, "beam_base");
  p.bm25.k1 = c.get_double("bm25_k1");
  p.bm25.b = c.get_double("bm25_b");
  if (!(p.bm25.k1 > 0.0) || !(p.bm25.b >= 0.0 && p.bm25.b <= 1.0)) {
    throw ValidationError("bm25_k1 must be > 0 and bm25_b must lie in [0, 1]");
  }
  p.ngram_max = positive(c, "ngram_max");
  p.min_term_freq = positive(c, "min_term_freq");
  p.terms_per_class = positive(c, "terms_per_class");
  p.document_word_budget = static_cast<std::size_t>(positive(c, "document_word_budget"));

  p.train.lr = c.get_double("lr");
  if (!(p.train.lr > 0.0)) throw ValidationError("lr must be positive");
  p.train.batch_size = positive(c, "batch_size");
  p.train.epochs = non_negative(c, "epochs");
  p.train.weight_decay = c.get_double("weight_decay");
  if (!(p.train.weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  const long long seed = c.get_int("seed");
  if (seed < 0) throw ValidationError("seed must be non-negative");
  p.train.seed = static_cast<std::uint64_t>(seed);
  p.dim_h = non_negative(c, "dim_h");
  p.score_form = score_form_from_string(c.get("score_form"));
  p.threshold = c.get_double("threshold");
  if (!(p.threshold >= 0.0 && p.threshold <= 1.0)) {
    throw ValidationError("threshold must lie in [0, 1]");
  }

  p.sibling_exclude_self = c.get_bool("sibling_exclude_self");
  p.candidates_only_refinement = c.get_bool("candidates_only_refinement");
  p.per_parent_beam = c.get_bool("per_parent_beam");

  p.workers = positive(c, "workers");
  p.llm_concurrency = positive(c, "llm_concurrency");
  p.max_retries = non_negative(c, "max_retries");
  p.retry_delay_ms = non_negative(c, "retry_delay_ms");
  return p;
}

}  // namespace teleclass
