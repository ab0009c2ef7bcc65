// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/augmentation.hpp"

#include <optional>

#include <fmt/format.h>

#include "teleclass/parallel.hpp"

namespace teleclass {

std::string generated_doc_id(const LabelPath& path, const Taxonomy& t, std::size_t index) {
  std::string id = "gen:";
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    if (i) id += '/';
    id += t.name(path.nodes[i]);
  }
  return fmt::format("{}:{}", id, index);
}

Json to_json(const GeneratedDocument& d) {
  Json path = Json::array();
  for (ClassId c : d.path.nodes) path.push_back(index_of(c));
  Json out = {{"doc_id", d.doc_id}, {"text", d.text}, {"path", path}};
  if (d.padded) out["padded"] = true;
  return out;
}

GeneratedDocument generated_from_json(const Json& obj, const Taxonomy& t) {
  GeneratedDocument d;
  d.doc_id = obj.at("doc_id").get<std::string>();
  d.text = obj.at("text").get<std::string>();
  d.padded = obj.value("padded", false);
  for (const auto& v : obj.at("path")) {
    ClassId c = class_id(v.get<std::size_t>());
    if (!t.contains(c) || t.is_root(c)) {
      throw ValidationError(fmt::format("generated document {} names unknown class {}",
                                        d.doc_id, index_of(c)));
    }
    d.path.nodes.push_back(c);
  }
  if (d.path.nodes.empty()) throw ValidationError("generated document " + d.doc_id + " has no path");
  if (d.text.empty()) throw ValidationError("generated document " + d.doc_id + " has no text");
  return d;
}

PathGeneration generate_for_path(const LabelPath& path, int q, LlmGateway& gateway,
                                 const Taxonomy& t, const DomainProfile& domain,
                                 int max_requeries) {
  if (q < 1) throw ValidationError("q must be at least 1");
  PathGeneration out;
  std::vector<std::string> passages;
  for (int round = 0; round <= max_requeries; ++round) {
    const int missing = q - static_cast<int>(passages.size());
    if (missing <= 0) break;
    PromptRequest req = build_generation_prompt(path, missing, t, domain);
    if (round > 0) {
      ++out.requeries;
      // Distinct text keeps the follow-up from hitting the cached first answer.
      req.rendered_text += fmt::format("\n(Follow-up request {}: {} more needed.)", round, missing);
      req.metadata["retry"] = std::to_string(round);
    }
    auto record = gateway.complete(req);
    for (auto& p : split_passages(record.response)) {
      if (static_cast<int>(passages.size()) == q) break;
      passages.push_back(std::move(p));
    }
  }
  if (passages.empty()) {
    throw ParseError(fmt::format("no passages for path {}", generated_doc_id(path, t, 0)), "");
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(q); ++i) {
    GeneratedDocument d;
    d.doc_id = generated_doc_id(path, t, i);
    d.path = path;
    if (i < passages.size()) {
      d.text = passages[i];
    } else {
      d.text = passages.back();
      d.padded = true;
      ++out.padded;
    }
    out.docs.push_back(std::move(d));
  }
  return out;
}

GenerationResult build_generated_set(const Taxonomy& t, int q, LlmGateway& gateway,
                                     const DomainProfile& domain) {
  if (q < 1) throw ValidationError("q must be at least 1");
  const auto& paths = t.label_paths();
  std::vector<std::optional<PathGeneration>> slots(paths.size());
  std::vector<std::string> failures(paths.size());
  std::vector<char> backend(paths.size(), 0);
  parallel_for(paths.size(), gateway.concurrency(), [&](std::size_t i) {
    try {
      slots[i] = generate_for_path(paths[i], q, gateway, t, domain);
    } catch (const ParseError& e) {
      failures[i] = e.what();
    } catch (const BackendError& e) {
      failures[i] = fmt::format("{}: {}", generated_doc_id(paths[i], t, 0), e.what());
      backend[i] = 1;
    }
  });
  GenerationResult result;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!slots[i]) {
      result.failures.push_back(std::move(failures[i]));
      result.backend_failures += backend[i];
      continue;
    }
    result.padded += slots[i]->padded;
    result.requeries += slots[i]->requeries;
    for (auto& d : slots[i]->docs) result.docs.push_back(std::move(d));
  }
  return result;
}

}  // namespace teleclass
