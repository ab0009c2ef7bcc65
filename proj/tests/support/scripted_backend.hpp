// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <functional>
#include <string>

#include "teleclass/llm.hpp"

namespace testing_support {

// Answers with a caller-supplied function and counts calls.
class ScriptedBackend : public teleclass::CompletionBackend {
 public:
  using Fn = std::function<std::string(const teleclass::PromptRequest&)>;
  explicit ScriptedBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string id() const override { return "scripted"; }
  std::string complete(const teleclass::PromptRequest& r) override {
    ++calls;
    return fn_(r);
  }
  std::atomic<int> calls{0};

 private:
  Fn fn_;
};

}  // namespace testing_support
