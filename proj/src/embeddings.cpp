// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/embeddings.hpp"

#include <atomic>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "teleclass/io.hpp"

namespace teleclass {

namespace detail {
void warn_zero_vector() {
  static std::atomic<int> warned{0};
  if (warned.fetch_add(1) < 5) spdlog::warn("cosine with a zero vector; returning 0");
}
}  // namespace detail

std::string_view prefix_of(VectorSpace space) {
  switch (space) {
    case VectorSpace::kDoc:
      return "doc:";
    case VectorSpace::kTerm:
      return "term:";
    case VectorSpace::kName:
      return "name:";
  }
  return "";
}

namespace {

std::string_view space_label(VectorSpace space) {
  auto p = prefix_of(space);
  return p.substr(0, p.size() - 1);
}

}  // namespace

VectorStore VectorStore::parse(std::string_view jsonl) {
  VectorStore store;
  for_each_jsonl(jsonl, [&](std::size_t line, const Json& obj) {
    if (!obj.contains("key") || !obj["key"].is_string() || !obj.contains("vector") ||
        !obj["vector"].is_array()) {
      throw ValidationError(fmt::format("line {}: expected \"key\" and \"vector\"", line));
    }
    std::string key = obj["key"].get<std::string>();
    VectorSpace space;
    std::string_view rest;
    if (key.starts_with("doc:")) {
      space = VectorSpace::kDoc;
    } else if (key.starts_with("term:")) {
      space = VectorSpace::kTerm;
    } else if (key.starts_with("name:")) {
      space = VectorSpace::kName;
    } else {
      throw ValidationError(
          fmt::format("line {}: key \"{}\" lacks a doc:/term:/name: prefix", line, key));
    }
    rest = std::string_view(key).substr(prefix_of(space).size());
    Vector v;
    v.reserve(obj["vector"].size());
    for (const auto& x : obj["vector"]) {
      if (!x.is_number()) {
        throw ValidationError(fmt::format("line {}: non-numeric vector entry", line));
      }
      double d = x.get<double>();
      if (!std::isfinite(d) || !std::isfinite(static_cast<float>(d))) {
        throw ValidationError(fmt::format("line {}: non-finite value in \"{}\"", line, key));
      }
      v.push_back(static_cast<float>(d));
    }
    try {
      store.insert(space, std::string(rest), std::move(v));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("line {}: {}", line, e.what()));
    }
  });
  return store;
}

std::string VectorStore::serialize() const {
  std::string out;
  for (auto space : {VectorSpace::kDoc, VectorSpace::kTerm, VectorSpace::kName}) {
    for (const auto& [key, vec] : table(space)) {
      Json k = std::string(prefix_of(space)) + key;
      out += "{\"key\":";
      out += k.dump();
      out += ",\"vector\":[";
      for (std::size_t i = 0; i < vec.size(); ++i) {
        if (i) out += ',';
        out += fmt::format("{}", vec[i]);
      }
      out += "]}\n";
    }
  }
  return out;
}

void VectorStore::merge(const VectorStore& other) {
  for (auto space : {VectorSpace::kDoc, VectorSpace::kTerm, VectorSpace::kName}) {
    for (const auto& [key, vec] : other.table(space)) insert(space, key, vec);
  }
}

void VectorStore::insert(VectorSpace space, std::string key, Vector v) {
  if (v.empty()) throw ValidationError("empty vector for key \"" + key + "\"");
  if (dim_ == 0) {
    dim_ = v.size();
  } else if (v.size() != dim_) {
    throw ValidationError(fmt::format("dimension mismatch for {}{}: {} vs store dim {}",
                                      prefix_of(space), key, v.size(), dim_));
  }
  auto& t = table(space);
  if (t.count(key)) {
    throw ValidationError(fmt::format("duplicate key {}{}", prefix_of(space), key));
  }
  t.emplace(std::move(key), std::move(v));
}

bool VectorStore::contains(VectorSpace space, std::string_view key) const {
  return find(space, key) != nullptr;
}

const Vector* VectorStore::find(VectorSpace space, std::string_view key) const {
  const auto& t = table(space);
  auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}

const Vector& VectorStore::at(VectorSpace space, std::string_view key) const {
  const Vector* v = find(space, key);
  if (!v) {
    throw LookupError(fmt::format("no vector for key \"{}\" in namespace {}", key,
                                  space_label(space)));
  }
  return *v;
}

const std::map<std::string, Vector, std::less<>>& VectorStore::table(VectorSpace space) const {
  switch (space) {
    case VectorSpace::kDoc:
      return docs_;
    case VectorSpace::kTerm:
      return terms_;
    case VectorSpace::kName:
      return names_;
  }
  return docs_;
}

std::map<std::string, Vector, std::less<>>& VectorStore::table(VectorSpace space) {
  return const_cast<std::map<std::string, Vector, std::less<>>&>(
      static_cast<const VectorStore*>(this)->table(space));
}

}  // namespace teleclass
