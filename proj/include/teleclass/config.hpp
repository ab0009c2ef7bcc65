// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "teleclass/classifier.hpp"
#include "teleclass/corpus.hpp"

namespace teleclass {

// Flat `key = value` settings with '#' comments. Every key has a default;
// unknown keys are rejected.
class Config {
 public:
  Config();

  // Relative paths in the file resolve against `base_dir`.
  static Config parse(std::string_view text, const std::filesystem::path& base_dir = {});
  static Config load(const std::filesystem::path& file);

  // Accepts "key=value".
  void apply_override(std::string_view assignment);
  void set(const std::string& key, std::string value);

  const std::string& get(const std::string& key) const;
  std::filesystem::path path(const std::string& key) const;  // empty when unset
  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  static bool is_path_key(std::string_view key);
  static const std::vector<std::string>& keys();

  // Hash over the listed keys and their current values.
  std::string hash_of(const std::vector<std::string>& keys) const;

  const std::filesystem::path& base_dir() const { return base_dir_; }
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

struct PipelineConfig {
  std::filesystem::path taxonomy, corpus, vectors, generated_vectors, test_corpus, gold;
  std::filesystem::path workdir, cache, stopwords, mock_rules, mock_table;

  std::string backend;  // mock | http
  std::string http_base_url, http_model, api_key_env;
  int http_timeout = 60;
  std::string domain;

  int k = 20;
  int q = 5;
  double confidence_fraction = 0.75;
  int beam_base = 3;
  Bm25Params bm25;
  int ngram_max = 3;
  int min_term_freq = 2;
  int terms_per_class = 10;
  std::size_t document_word_budget = 400;

  TrainConfig train;
  int dim_h = 0;  // 0: input width
  double threshold = 0.5;
  ScoreForm score_form = ScoreForm::kSigmoidLinear;

  bool sibling_exclude_self = false;
  bool candidates_only_refinement = false;
  bool per_parent_beam = false;

  int workers = 4;
  int llm_concurrency = 4;
  int max_retries = 2;
  int retry_delay_ms = 500;

  // Throws ValidationError on out-of-range values or missing required paths.
  static PipelineConfig from(const Config& c);
};

}  // namespace teleclass
