// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "teleclass/io.hpp"
#include "teleclass/llm.hpp"
#include "teleclass/taxonomy.hpp"

namespace teleclass {

struct GeneratedDocument {
  std::string doc_id;  // "gen:<class names joined by '/'>:<index>"
  std::string text;
  LabelPath path;
  bool padded = false;  // duplicate of the previous passage after a short response
};

std::string generated_doc_id(const LabelPath& path, const Taxonomy& t, std::size_t index);

Json to_json(const GeneratedDocument& d);
GeneratedDocument generated_from_json(const Json& obj, const Taxonomy& t);

struct PathGeneration {
  std::vector<GeneratedDocument> docs;  // exactly q
  int requeries = 0;
  int padded = 0;
};

// Asks for q passages in one call. A short answer is topped up by up to
// `max_requeries` follow-up calls for the missing count, then padded by
// repeating the last passage. Throws ParseError if nothing usable came back.
PathGeneration generate_for_path(const LabelPath& path, int q, LlmGateway& gateway,
                                 const Taxonomy& t, const DomainProfile& domain,
                                 int max_requeries = 2);

struct GenerationResult {
  std::vector<GeneratedDocument> docs;  // ordered like taxonomy.label_paths()
  std::vector<std::string> failures;
  std::size_t backend_failures = 0;
  std::size_t padded = 0;
  std::size_t requeries = 0;
};

GenerationResult build_generated_set(const Taxonomy& t, int q, LlmGateway& gateway,
                                     const DomainProfile& domain);

}  // namespace teleclass
