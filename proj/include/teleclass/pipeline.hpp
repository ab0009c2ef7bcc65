// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teleclass/config.hpp"
#include "teleclass/corpus.hpp"
#include "teleclass/embeddings.hpp"
#include "teleclass/errors.hpp"
#include "teleclass/io.hpp"
#include "teleclass/llm.hpp"
#include "teleclass/taxonomy.hpp"

namespace teleclass {

enum class Stage { kEnrichLlm, kAnnotate, kEnrichCorpus, kRefine, kGenerate, kTrain, kPredict, kEvaluate };

inline constexpr std::array<Stage, 8> kAllStages = {
    Stage::kEnrichLlm, Stage::kAnnotate, Stage::kEnrichCorpus, Stage::kRefine,
    Stage::kGenerate,  Stage::kTrain,    Stage::kPredict,      Stage::kEvaluate};

std::string_view to_string(Stage s);
std::optional<Stage> stage_from_string(std::string_view s);

// A stage cannot start: an upstream artifact is missing or was changed
// after it was recorded.
class PrerequisiteError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Another process holds the workdir.
class LockError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Exclusive ownership of a workdir for the lifetime of the object.
class WorkdirLock {
 public:
  explicit WorkdirLock(const std::filesystem::path& workdir);
  ~WorkdirLock();
  WorkdirLock(const WorkdirLock&) = delete;
  WorkdirLock& operator=(const WorkdirLock&) = delete;

 private:
  std::filesystem::path file_;
};

struct StageOutcome {
  Stage stage{};
  bool skipped = false;
  double seconds = 0.0;
  std::vector<std::string> warnings;
};

struct PipelineOptions {
  bool force = false;
};

// Runs stages against one workdir. Artifacts:
//   llm_terms.json  initial_cores.jsonl  enriched_terms.json  refined_cores.jsonl
//   generated.jsonl  model.json  predictions.jsonl  report.json
// plus manifest.json (digests, reproducible) and timings.json.
class Pipeline {
 public:
  // `config` is kept to hash stage settings. A null backend is built from
  // the configuration on first use.
  Pipeline(Config config, PipelineOptions options = {},
           std::unique_ptr<CompletionBackend> backend = nullptr);
  ~Pipeline();

  StageOutcome run_stage(Stage s);
  // All stages in order; returns the evaluation report when a gold file is
  // configured (otherwise null).
  Json run_all();

  // Writes vector_keys.txt: every "prefix:key" the vector store must hold
  // for the artifacts that exist so far. Returns its path.
  std::filesystem::path write_vector_keys();

  const PipelineConfig& settings() const { return cfg_; }
  const std::filesystem::path& workdir() const { return cfg_.workdir; }
  std::optional<Stage> current_stage() const { return current_; }
  Json manifest() const;

 private:
  struct Impl;
  Config config_;
  PipelineConfig cfg_;
  PipelineOptions options_;
  std::unique_ptr<Impl> impl_;
  std::optional<Stage> current_;
};

// Exit status for an exception escaping a stage:
// 2 validation or prerequisite, 3 stage failure, 4 backend failure.
int exit_code_for(const std::exception& e);

}  // namespace teleclass
