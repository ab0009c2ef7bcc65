// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleclass/pipeline.hpp"

namespace tc = teleclass;

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical text classification from a label taxonomy and unlabeled text"};
  std::string command;
  std::string config_file;
  std::string workdir;
  std::vector<std::string> overrides;
  bool force = false;
  bool quiet = false;
  bool verbose = false;

  std::string commands = "run-all, keys";
  for (tc::Stage s : tc::kAllStages) commands += ", " + std::string(tc::to_string(s));
  app.add_option("command", command, "Stage to run: " + commands)->required();
  app.add_option("-c,--config", config_file, "Configuration file (key = value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("-w,--workdir", workdir, "Override the workdir from the configuration");
  app.add_option("-s,--set", overrides, "Override a configuration value (key=value)");
  app.add_flag("-f,--force", force, "Run even when outputs are current or inputs changed");
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");
  app.add_flag("-v,--verbose", verbose, "Log debug messages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  spdlog::set_level(quiet ? spdlog::level::warn
                          : (verbose ? spdlog::level::debug : spdlog::level::info));

  std::optional<tc::Stage> stage = tc::stage_from_string(command);
  if (!stage && command != "run-all" && command != "keys") {
    fmt::print(stderr, "unknown command \"{}\"; expected one of: {}\n", command, commands);
    return 2;
  }

  std::unique_ptr<tc::Pipeline> pipeline;
  try {
    tc::Config config = tc::Config::load(config_file);
    for (const auto& o : overrides) config.apply_override(o);
    if (!workdir.empty()) {
      config.set("workdir", std::filesystem::absolute(workdir).string());
    }
    pipeline = std::make_unique<tc::Pipeline>(std::move(config), tc::PipelineOptions{force});

    if (command == "keys") {
      auto path = pipeline->write_vector_keys();
      fmt::print("{}\n", path.string());
    } else if (command == "run-all") {
      tc::Json report = pipeline->run_all();
      if (!report.is_null()) fmt::print("{}\n", report.dump(2));
    } else {
      auto outcome = pipeline->run_stage(*stage);
      fmt::print("{}: {}\n", tc::to_string(*stage), outcome.skipped ? "skipped" : "complete");
    }
  } catch (const std::exception& e) {
    std::string where;
    if (pipeline && pipeline->current_stage()) {
      where = std::string(tc::to_string(*pipeline->current_stage())) + ": ";
    }
    fmt::print(stderr, "error: {}{}\n", where, e.what());
    return tc::exit_code_for(e);
  }
  return 0;
}
