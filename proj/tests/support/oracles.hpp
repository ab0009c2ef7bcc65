// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
//
// Slow reference implementations and random fixtures shared by the unit and
// acceptance tests. Nothing here calls into the code it is used to check
// except for plain data accessors.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "teleclass/io.hpp"

namespace oracle {

// A DAG in raw edge-list form. Node ids are dense; nodes without parents
// hang under an implicit root.
struct RawDag {
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> edges;  // parent, child

  int size() const { return static_cast<int>(names.size()); }

  teleclass::Json json() const {
    teleclass::Json nodes = teleclass::Json::array();
    for (int i = 0; i < size(); ++i) nodes.push_back({{"id", i}, {"name", names[i]}});
    teleclass::Json e = teleclass::Json::array();
    for (auto [p, c] : edges) e.push_back({p, c});
    return {{"nodes", nodes}, {"edges", e}};
  }

  std::vector<int> parents_of(int v) const {
    std::vector<int> out;
    for (auto [p, c] : edges) {
      if (c == v) out.push_back(p);
    }
    return out;
  }

  std::vector<int> children_of(int v) const {
    std::vector<int> out;
    for (auto [p, c] : edges) {
      if (p == v) out.push_back(c);
    }
    return out;
  }

  bool top_level(int v) const { return parents_of(v).empty(); }

  // Transitive closure by repeated relaxation.
  std::set<int> ancestors(int v) const {
    std::set<int> out;
    std::vector<int> stack = parents_of(v);
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      if (!out.insert(x).second) continue;
      for (int p : parents_of(x)) stack.push_back(p);
    }
    return out;
  }

  std::set<int> descendants(int v) const {
    std::set<int> out;
    std::vector<int> stack = children_of(v);
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      if (!out.insert(x).second) continue;
      for (int c : children_of(x)) stack.push_back(c);
    }
    return out;
  }

  // Every walk from a top-level node down to a leaf.
  std::vector<std::vector<int>> paths() const {
    std::vector<std::vector<int>> out;
    std::function<void(std::vector<int>&)> walk = [&](std::vector<int>& cur) {
      auto kids = children_of(cur.back());
      if (kids.empty()) {
        out.push_back(cur);
        return;
      }
      for (int k : kids) {
        cur.push_back(k);
        walk(cur);
        cur.pop_back();
      }
    };
    for (int v = 0; v < size(); ++v) {
      if (!top_level(v)) continue;
      std::vector<int> cur{v};
      walk(cur);
    }
    return out;
  }
};

// Between 2 and `max_nodes` nodes on at most `max_depth` levels. Lower-level nodes
// get one or two parents on the level above; now and then an extra edge
// skips a level. Ids are shuffled so they carry no level information.
inline RawDag random_dag(std::mt19937_64& rng, int max_nodes, int max_depth) {
  std::uniform_int_distribution<int> total_d(2, max_nodes);
  const int n = total_d(rng);
  std::uniform_int_distribution<int> depth_d(1, max_depth);
  // At least two top-level nodes: a lone parentless node would be the root.
  const int depth = std::min(depth_d(rng), n - 1);

  std::vector<int> level_of(n);
  for (int i = 0; i < n; ++i) level_of[i] = i < depth ? i : static_cast<int>(rng() % depth);
  level_of[depth] = 0;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng() % (i + 1)]);

  std::vector<std::vector<int>> by_level(depth);
  for (int i = 0; i < n; ++i) by_level[level_of[i]].push_back(perm[i]);

  RawDag g;
  g.names.resize(n);
  for (int i = 0; i < n; ++i) {
    // Random letters so name order differs from id order.
    std::string s;
    for (int k = 0; k < 3; ++k) s.push_back(static_cast<char>('a' + rng() % 26));
    g.names[i] = s + std::to_string(i);
  }
  std::set<std::pair<int, int>> edges;
  for (int l = 1; l < depth; ++l) {
    const auto& above = by_level[l - 1];
    for (int v : by_level[l]) {
      const int k = 1 + static_cast<int>(rng() % 2);
      for (int j = 0; j < k; ++j) edges.insert({above[rng() % above.size()], v});
      if (l >= 2 && rng() % 8 == 0) {
        const auto& top = by_level[l - 2];
        edges.insert({top[rng() % top.size()], v});
      }
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

// Frontier recurrence over the raw edge list: frontier_{l+1} is the best
// l + base members of everything whose parent set meets frontier_l.
inline std::set<int> candidate_oracle(const RawDag& g, const std::vector<double>& sim, int base,
                                      bool per_parent = false) {
  auto better = [&](int a, int b) {
    if (sim[a] != sim[b]) return sim[a] > sim[b];
    return g.names[a] < g.names[b];
  };
  std::set<int> selected;
  std::set<int> frontier{-1};  // -1 stands for the root
  for (int l = 0;; ++l) {
    const std::size_t width = static_cast<std::size_t>(l + base);
    std::set<int> next;
    if (per_parent) {
      for (int f : frontier) {
        std::vector<int> kids;
        for (int v = 0; v < g.size(); ++v) {
          auto ps = g.parents_of(v);
          bool child = f == -1 ? ps.empty() : std::count(ps.begin(), ps.end(), f) > 0;
          if (child) kids.push_back(v);
        }
        std::sort(kids.begin(), kids.end(), better);
        for (std::size_t i = 0; i < kids.size() && i < width; ++i) next.insert(kids[i]);
      }
    } else {
      std::vector<int> pool;
      for (int v = 0; v < g.size(); ++v) {
        auto ps = g.parents_of(v);
        bool hit = ps.empty() ? frontier.count(-1) > 0
                              : std::any_of(ps.begin(), ps.end(),
                                            [&](int p) { return frontier.count(p) > 0; });
        if (hit) pool.push_back(v);
      }
      std::sort(pool.begin(), pool.end(), better);
      for (std::size_t i = 0; i < pool.size() && i < width; ++i) next.insert(pool[i]);
    }
    if (next.empty()) break;
    selected.insert(next.begin(), next.end());
    frontier = next;
  }
  return selected;
}

struct GapScan {
  std::size_t m = 0;
  double conf = 0.0;
};

// Tries every cut 1..n-1 of a descending list; a cut inside a run of equal
// scores is not allowed. Keeps the first of equal maxima.
inline GapScan gap_scan(const std::vector<double>& s) {
  GapScan best;
  bool found = false;
  for (std::size_t m = 1; m < s.size(); ++m) {
    if (s[m - 1] == s[m]) continue;
    const double d = s[m - 1] - s[m];
    if (!found || d > best.conf) {
      best = {m, d};
      found = true;
    }
  }
  return best;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  if (na == 0 || nb == 0) return 0;
  return dot(a, b) / (na * nb);
}

// Occurrences of the token sequence `needle` in `hay`, overlaps included.
inline int count_tokens(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  int c = 0;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size(); ++j) ok = ok && hay[i + j] == needle[j];
    c += ok;
  }
  return c;
}

// BM25 written out from the textbook definition with the non-negative idf.
inline double bm25(std::size_t target, const std::vector<double>& tf,
                   const std::vector<double>& len, double k1, double b) {
  const double N = static_cast<double>(tf.size());
  double n = 0, avg = 0;
  for (std::size_t i = 0; i < tf.size(); ++i) {
    n += tf[i] > 0;
    avg += len[i];
  }
  avg /= N;
  if (tf[target] == 0) return 0;
  const double idf = std::log(1.0 + (N - n + 0.5) / (n + 0.5));
  const double norm = avg > 0 ? len[target] / avg : 0.0;
  return idf * tf[target] * (k1 + 1) / (tf[target] + k1 * (1 - b + b * norm));
}

}  // namespace oracle
