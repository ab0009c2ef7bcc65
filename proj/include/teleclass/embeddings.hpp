// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teleclass/errors.hpp"

namespace teleclass {

using Vector = std::vector<float>;

enum class VectorSpace { kDoc, kTerm, kName };

std::string_view prefix_of(VectorSpace space);  // "doc:", "term:", "name:"

// Precomputed embeddings keyed by namespace. Loaded from vectors.jsonl where
// each line is {"key":"doc:123","vector":[...]}.
class VectorStore {
 public:
  VectorStore() = default;

  static VectorStore parse(std::string_view jsonl);
  // One line per vector, ordered by namespace then key.
  std::string serialize() const;

  // Adds every vector of `other`; dims must agree and keys must not clash.
  void merge(const VectorStore& other);

  void insert(VectorSpace space, std::string key, Vector v);

  std::size_t dim() const { return dim_; }
  std::size_t size(VectorSpace space) const { return table(space).size(); }
  bool contains(VectorSpace space, std::string_view key) const;
  const Vector* find(VectorSpace space, std::string_view key) const;
  // Throws LookupError naming the key and its namespace.
  const Vector& at(VectorSpace space, std::string_view key) const;

  const std::map<std::string, Vector, std::less<>>& table(VectorSpace space) const;

 private:
  std::map<std::string, Vector, std::less<>>& table(VectorSpace space);

  std::size_t dim_ = 0;
  std::map<std::string, Vector, std::less<>> docs_;
  std::map<std::string, Vector, std::less<>> terms_;
  std::map<std::string, Vector, std::less<>> names_;
};

namespace detail {
void warn_zero_vector();
}

// dot(u, v) / (|u| |v|). A zero vector on either side yields 0.
template <typename A, typename B>
double cosine(std::span<const A> u, std::span<const B> v) {
  if (u.size() != v.size()) {
    throw ValidationError("cosine of vectors with different dimensions (" +
                          std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) {
    detail::warn_zero_vector();
    return 0.0;
  }
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

inline double cosine(const Vector& u, const Vector& v) {
  return cosine(std::span<const float>(u), std::span<const float>(v));
}

}  // namespace teleclass
