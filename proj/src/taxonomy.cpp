// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#include "teleclass/taxonomy.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "teleclass/errors.hpp"
#include "teleclass/text.hpp"

namespace teleclass {

namespace {

// Returns the names along one cycle among `remaining` nodes (those Kahn's
// algorithm could not retire).
std::vector<std::string> find_cycle(const std::vector<ClassList>& children,
                                    const std::vector<std::string>& names,
                                    const std::vector<bool>& remaining) {
  const std::size_t n = children.size();
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> stack;
  std::vector<std::string> cycle;

  std::function<bool(std::size_t)> dfs = [&](std::size_t u) {
    state[u] = 1;
    stack.push_back(u);
    for (ClassId v : children[u]) {
      std::size_t vi = index_of(v);
      if (!remaining[vi]) continue;
      if (state[vi] == 1) {
        auto it = std::find(stack.begin(), stack.end(), vi);
        for (; it != stack.end(); ++it) cycle.push_back(names[*it]);
        return true;
      }
      if (state[vi] == 0 && dfs(vi)) return true;
    }
    stack.pop_back();
    state[u] = 2;
    return false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (remaining[i] && state[i] == 0 && dfs(i)) break;
  }
  return cycle;
}

}  // namespace

Taxonomy Taxonomy::parse(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw TaxonomyError(std::string("taxonomy is not valid JSON: ") + e.what());
  }
  return from_json(doc);
}

Taxonomy Taxonomy::from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw TaxonomyError("taxonomy must be an object with a \"nodes\" array");
  }
  const Json& nodes = doc["nodes"];
  if (nodes.empty()) throw TaxonomyError("taxonomy has no nodes");

  Taxonomy t;
  const std::size_t n = nodes.size();
  t.names_.assign(n, {});
  std::vector<bool> seen(n, false);
  for (const auto& node : nodes) {
    if (!node.is_object() || !node.contains("id") || !node.contains("name") ||
        !node["id"].is_number_integer() || !node["name"].is_string()) {
      throw TaxonomyError("taxonomy node needs integer \"id\" and string \"name\": " +
                          node.dump());
    }
    auto id = node["id"].get<std::int64_t>();
    if (id < 0 || static_cast<std::size_t>(id) >= n) {
      throw TaxonomyError(fmt::format("node id {} outside dense range 0..{}", id, n - 1));
    }
    if (seen[id]) throw TaxonomyError(fmt::format("duplicate node id {}", id));
    seen[id] = true;
    std::string name = node["name"].get<std::string>();
    if (name.empty()) throw TaxonomyError(fmt::format("node {} has an empty name", id));
    if (!t.by_name_.emplace(name, class_id(id)).second) {
      throw TaxonomyError(fmt::format("duplicate class name \"{}\"", name));
    }
    t.names_[id] = std::move(name);
  }

  t.children_.assign(n, {});
  t.parents_.assign(n, {});
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) throw TaxonomyError("\"edges\" must be an array");
    for (const auto& edge : doc["edges"]) {
      if (!edge.is_array() || edge.size() != 2 || !edge[0].is_number_integer() ||
          !edge[1].is_number_integer()) {
        throw TaxonomyError("edge must be a [parent, child] id pair: " + edge.dump());
      }
      auto p = edge[0].get<std::int64_t>();
      auto c = edge[1].get<std::int64_t>();
      if (p < 0 || c < 0 || static_cast<std::size_t>(p) >= n ||
          static_cast<std::size_t>(c) >= n) {
        throw TaxonomyError(fmt::format("dangling edge [{}, {}]", p, c));
      }
      if (p == c) {
        throw TaxonomyError(fmt::format("cycle detected: {} -> {}", t.names_[p], t.names_[p]));
      }
      auto& kids = t.children_[p];
      if (std::find(kids.begin(), kids.end(), class_id(c)) != kids.end()) continue;
      kids.push_back(class_id(c));
      t.parents_[c].push_back(class_id(p));
    }
  }

  // Kahn's algorithm; whatever is left over sits on a cycle.
  std::vector<std::size_t> indeg(n);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    indeg[i] = t.parents_[i].size();
    if (indeg[i] == 0) queue.push_back(i);
  }
  std::vector<bool> remaining(n, true);
  std::size_t retired = 0;
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    remaining[u] = false;
    ++retired;
    for (ClassId v : t.children_[u]) {
      if (--indeg[index_of(v)] == 0) queue.push_back(index_of(v));
    }
  }
  if (retired != n) {
    auto cycle = find_cycle(t.children_, t.names_, remaining);
    throw TaxonomyError(fmt::format("cycle detected among classes: {}",
                                    fmt::join(cycle, ", ")));
  }

  ClassList tops;
  for (std::size_t i = 0; i < n; ++i) {
    if (t.parents_[i].empty()) tops.push_back(class_id(i));
  }
  if (tops.size() == 1) {
    t.root_ = tops.front();
  } else {
    if (t.by_name_.count(std::string(kSyntheticRootName))) {
      throw TaxonomyError(fmt::format(
          "duplicate class name \"{}\" (reserved for the synthetic root)", kSyntheticRootName));
    }
    t.root_ = class_id(n);
    t.synthetic_root_ = true;
    t.names_.emplace_back(kSyntheticRootName);
    t.by_name_.emplace(std::string(kSyntheticRootName), t.root_);
    t.children_.push_back(tops);
    t.parents_.emplace_back();
    for (ClassId top : tops) t.parents_[index_of(top)].push_back(t.root_);
  }
  t.finalize();
  return t;
}

void Taxonomy::finalize() {
  const std::size_t n = names_.size();
  for (std::size_t i = 0; i < n; ++i) {
    sort_by_name(children_[i]);
    sort_by_name(parents_[i]);
    by_lower_name_.emplace(to_lower_ascii(names_[i]), class_id(i));
  }

  // Topological order from the root; parents are finished before children.
  std::vector<std::size_t> order;
  std::vector<std::size_t> indeg(n);
  for (std::size_t i = 0; i < n; ++i) indeg[i] = parents_[i].size();
  std::deque<std::size_t> queue{index_of(root_)};
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (ClassId v : children_[u]) {
      if (--indeg[index_of(v)] == 0) queue.push_back(index_of(v));
    }
  }

  levels_.assign(n, {});
  levels_[index_of(root_)].insert(0);
  std::vector<std::vector<bool>> anc(n, std::vector<bool>(n, false));
  for (std::size_t u : order) {
    for (ClassId v : children_[u]) {
      std::size_t vi = index_of(v);
      for (int d : levels_[u]) levels_[vi].insert(d + 1);
      for (std::size_t k = 0; k < n; ++k) {
        if (anc[u][k]) anc[vi][k] = true;
      }
      anc[vi][u] = true;
    }
  }

  const std::size_t root_index = index_of(root_);
  ancestors_.assign(n, {});
  descendants_.assign(n, {});
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t a = 0; a < n; ++a) {
      if (!anc[v][a]) continue;
      if (a != root_index) ancestors_[v].push_back(class_id(a));
      if (v != root_index) descendants_[a].push_back(class_id(v));
    }
  }

  classes_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (i != root_index) classes_.push_back(class_id(i));
  }

  paths_.clear();
  ClassList walk;
  std::function<void(ClassId)> dfs = [&](ClassId c) {
    walk.push_back(c);
    if (children_[index_of(c)].empty()) {
      paths_.push_back(LabelPath{walk});
    } else {
      for (ClassId child : children_[index_of(c)]) dfs(child);
    }
    walk.pop_back();
  };
  for (ClassId top : children_[root_index]) dfs(top);
}

Json Taxonomy::to_json() const {
  Json nodes = Json::array();
  Json edges = Json::array();
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (synthetic_root_ && class_id(i) == root_) continue;
    nodes.push_back({{"id", i}, {"name", names_[i]}});
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (synthetic_root_ && class_id(i) == root_) continue;
    ClassList kids = children_[i];
    std::sort(kids.begin(), kids.end());
    for (ClassId c : kids) edges.push_back({i, index_of(c)});
  }
  return Json{{"nodes", nodes}, {"edges", edges}};
}

void Taxonomy::check(ClassId c) const {
  if (!contains(c)) throw LookupError(fmt::format("unknown class id {}", index_of(c)));
}

const std::string& Taxonomy::name(ClassId c) const {
  check(c);
  return names_[index_of(c)];
}

std::optional<ClassId> Taxonomy::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<ClassId> Taxonomy::find_lower(std::string_view lowered_name) const {
  auto it = by_lower_name_.find(std::string(lowered_name));
  if (it == by_lower_name_.end()) return std::nullopt;
  return it->second;
}

const ClassList& Taxonomy::children(ClassId c) const {
  check(c);
  return children_[index_of(c)];
}

const ClassList& Taxonomy::parents(ClassId c) const {
  check(c);
  return parents_[index_of(c)];
}

const std::set<int>& Taxonomy::levels(ClassId c) const {
  check(c);
  return levels_[index_of(c)];
}

const ClassList& Taxonomy::ancestors(ClassId c) const {
  check(c);
  return ancestors_[index_of(c)];
}

const ClassList& Taxonomy::descendants(ClassId c) const {
  check(c);
  return descendants_[index_of(c)];
}

ClassList Taxonomy::siblings(ClassId c, ClassId parent) const {
  check(c);
  check(parent);
  const auto& ps = parents_[index_of(c)];
  if (std::find(ps.begin(), ps.end(), parent) == ps.end()) {
    throw ValidationError(fmt::format("\"{}\" is not a parent of \"{}\"", name(parent), name(c)));
  }
  return children_[index_of(parent)];
}

void Taxonomy::sort_by_name(ClassList& ids) const {
  std::sort(ids.begin(), ids.end(),
            [this](ClassId a, ClassId b) { return names_[index_of(a)] < names_[index_of(b)]; });
}

}  // namespace teleclass
