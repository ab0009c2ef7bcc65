// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "teleclass/io.hpp"

namespace teleclass {

// Dense class index. Ids 0..n-1 come from the taxonomy file; a synthetic
// root, when one is needed, takes id n.
enum class ClassId : std::uint32_t {};

constexpr std::size_t index_of(ClassId c) { return static_cast<std::size_t>(c); }
constexpr ClassId class_id(std::size_t i) { return static_cast<ClassId>(i); }

using ClassList = std::vector<ClassId>;

// Ordered root-excluded walk from a level-1 class down to a leaf.
struct LabelPath {
  ClassList nodes;

  ClassId leaf() const { return nodes.back(); }
  bool operator==(const LabelPath&) const = default;
};

// Immutable label DAG. Every query excludes the root: the root is never a
// label, whether it was synthesized or came from the file.
class Taxonomy {
 public:
  static inline constexpr std::string_view kSyntheticRootName = "ROOT";

  // Parses `{"nodes":[{"id":0,"name":"..."}],"edges":[[parent,child],...]}`.
  static Taxonomy from_json(const Json& doc);
  static Taxonomy parse(std::string_view text);

  // Serializes back to the file format. The synthetic root is omitted.
  Json to_json() const;

  std::size_t node_count() const { return names_.size(); }
  ClassId root() const { return root_; }
  bool root_is_synthetic() const { return synthetic_root_; }
  bool is_root(ClassId c) const { return c == root_; }

  // All non-root classes in id order.
  const ClassList& classes() const { return classes_; }
  bool contains(ClassId c) const { return index_of(c) < names_.size(); }

  const std::string& name(ClassId c) const;
  std::optional<ClassId> find(std::string_view name) const;
  // Case-insensitive lookup used when reading LLM output and gold labels.
  std::optional<ClassId> find_lower(std::string_view lowered_name) const;

  // Children and parents are ordered by name.
  const ClassList& children(ClassId c) const;
  const ClassList& parents(ClassId c) const;
  const std::set<int>& levels(ClassId c) const;
  bool is_leaf(ClassId c) const { return children(c).empty(); }

  // Sorted by id; neither contains `c` or the root.
  const ClassList& ancestors(ClassId c) const;
  const ClassList& descendants(ClassId c) const;

  // Every child of `parent`, including `c` itself.
  ClassList siblings(ClassId c, ClassId parent) const;

  // Lexicographic by the names along each path.
  const std::vector<LabelPath>& label_paths() const { return paths_; }

  // Sort a list of classes by name.
  void sort_by_name(ClassList& ids) const;

 private:
  Taxonomy() = default;
  void check(ClassId c) const;
  void finalize();

  std::vector<std::string> names_;
  std::unordered_map<std::string, ClassId> by_name_;
  std::unordered_map<std::string, ClassId> by_lower_name_;
  std::vector<ClassList> children_;
  std::vector<ClassList> parents_;
  std::vector<std::set<int>> levels_;
  std::vector<ClassList> ancestors_;
  std::vector<ClassList> descendants_;
  std::vector<LabelPath> paths_;
  ClassList classes_;
  ClassId root_{};
  bool synthetic_root_ = false;
};

inline Taxonomy load_taxonomy(std::string_view text) { return Taxonomy::parse(text); }

}  // namespace teleclass
