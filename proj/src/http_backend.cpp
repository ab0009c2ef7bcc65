// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <regex>

#include <fmt/format.h>

#include "teleclass/io.hpp"
#include "teleclass/llm.hpp"

namespace teleclass {

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.api_key_env.empty()) {
    throw ValidationError("http backend needs the name of the API key environment variable");
  }
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) {
    throw ValidationError(fmt::format("environment variable {} is not set", config_.api_key_env));
  }
  api_key_ = key;
  if (config_.model.empty()) throw ValidationError("http backend needs a model name");

  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.base_url, m, kUrl)) {
    throw ValidationError("invalid backend base URL \"" + config_.base_url + "\"");
  }
  origin_ = m[1].str();
  path_prefix_ = m[2].matched ? m[2].str() : std::string();
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpBackend::id() const { return "http:" + config_.model; }

std::string HttpBackend::complete(const PromptRequest& request) {
  double temperature = config_.enrich_temperature;
  if (request.template_id == TemplateId::kAnnotate) temperature = config_.annotate_temperature;
  if (request.template_id == TemplateId::kGenerate) temperature = config_.generate_temperature;

  Json body = {{"model", config_.model},
               {"temperature", temperature},
               {"messages", Json::array({{{"role", "user"}, {"content", request.rendered_text}}})}};

  httplib::Client client(origin_);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                         "application/json");
  if (!res) {
    throw AttemptFailure(AttemptFailure::Kind::kTransport,
                         "HTTP request failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429) {
    throw AttemptFailure(AttemptFailure::Kind::kRateLimit, "HTTP 429 rate limited");
  }
  if (res->status >= 500) {
    throw AttemptFailure(AttemptFailure::Kind::kTransport,
                         fmt::format("HTTP {} from backend", res->status));
  }
  if (res->status != 200) {
    throw AttemptFailure(AttemptFailure::Kind::kFatal,
                         fmt::format("HTTP {} from backend: {}", res->status, res->body));
  }
  try {
    auto reply = Json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw AttemptFailure(AttemptFailure::Kind::kTransport,
                         std::string("malformed completion response: ") + e.what());
  }
}

}  // namespace teleclass
