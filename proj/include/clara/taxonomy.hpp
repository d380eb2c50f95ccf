#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clara/jsonl.hpp"

namespace clara {

inline constexpr int kTaxonomyDepth = 3;

struct Intent {
  std::string id;
  std::string title;                        // local-language title
  std::vector<std::string> category_path;   // English category names, root first
  std::string rep_query;                    // representative query
  std::optional<std::string> compressed_label;
  std::string language;                     // IETF tag
};

/// Category names arranged as a rooted tree. Node 0 is an unnamed root at
/// depth 0; named categories start at depth 1.
class CategoryTree {
 public:
  static constexpr std::size_t kRoot = 0;

  CategoryTree();

  /// Builds a tree from parallel name/parent arrays, where parent == npos
  /// marks a top-level category. Throws InvalidArgument on cycles or
  /// out-of-range parents, and DuplicateId when siblings share a name.
  static CategoryTree from_parent_links(std::span<const std::string> names,
                                        std::span<const std::size_t> parents);

  /// Returns the child of `parent` named `name`, creating it if needed.
  std::size_t add_child(std::size_t parent, const std::string& name);
  std::optional<std::size_t> find_child(std::size_t parent, std::string_view name) const;
  /// Inserts every prefix of `path` and returns the node of the last element.
  std::size_t add_path(std::span<const std::string> path);
  std::optional<std::size_t> find_path(std::span<const std::string> path) const;

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t node) const { return names_[node]; }
  std::size_t parent(std::size_t node) const { return parents_[node]; }
  const std::vector<std::size_t>& children(std::size_t node) const { return children_[node]; }
  int depth(std::size_t node) const { return depths_[node]; }
  bool is_leaf(std::size_t node) const { return children_[node].empty(); }
  int max_depth() const noexcept;
  std::vector<std::string> path(std::size_t node) const;

  bool operator==(const CategoryTree&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<int> depths_;
};

/// Validated, depth-3 intent knowledge base. Immutable after construction.
class Taxonomy {
 public:
  Taxonomy();

  /// Checks every invariant: unique ids, unique compressed labels, every
  /// leaf at depth 3, and every intent path a root-to-leaf path of `tree`.
  static Taxonomy build(std::vector<Intent> intents, CategoryTree tree);

  const std::vector<Intent>& intents() const noexcept { return intents_; }
  const CategoryTree& tree() const noexcept { return tree_; }
  std::array<std::size_t, 3> layer_sizes() const noexcept;
  bool empty() const noexcept { return intents_.empty(); }

  const Intent* find(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;
  const Intent& at(std::string_view id) const;  // throws UnknownIntent

  /// Class keys of layer `layer` (1-based), lexicographically ordered. A key
  /// is the category path joined with " > ".
  const std::vector<std::string>& classes(int layer) const;
  /// Tree nodes of layer `layer` in class order.
  const std::vector<std::size_t>& layer_nodes(int layer) const;
  /// Position of `node` among its layer's classes.
  std::size_t class_of_node(std::size_t node) const;
  /// Per-layer class indices of an intent's path.
  std::array<std::size_t, 3> class_targets(std::string_view intent_id) const;
  /// Leaf node hosting the intent.
  std::size_t leaf_of(std::string_view intent_id) const;
  /// Intent indices hosted by a leaf, ordered by id.
  const std::vector<std::size_t>& intents_at_leaf(std::size_t leaf) const;
  /// Intent chosen for a predicted leaf class: the smallest id at that leaf.
  const Intent* intent_for_leaf_class(std::size_t leaf_class) const;

  /// Label used as the generation target: compressed label, else title.
  static const std::string& surface_label(const Intent& intent);

  /// Returns a copy with compressed labels replaced (same order as intents()).
  Taxonomy with_compressed_labels(std::span<const std::optional<std::string>> labels) const;

 private:
  std::vector<Intent> intents_;
  CategoryTree tree_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::array<std::vector<std::string>, 3> classes_;
  std::array<std::vector<std::size_t>, 3> layer_nodes_;
  std::vector<std::size_t> node_class_;
  std::vector<std::size_t> intent_leaf_;
  std::vector<std::vector<std::size_t>> leaf_intents_;
};

std::string class_key(std::span<const std::string> path);

/// Pads every leaf (and every intent path) shallower than depth 3 by cloning
/// the last category name downward. Throws DepthExceeded for deeper nodes.
Taxonomy simplify(const CategoryTree& raw, std::vector<Intent> intents = {});

/// `layer` is 1-based; throws LayerOutOfRange outside 1..3.
std::vector<std::string> layer_classes(const Taxonomy& taxonomy, int layer);

Intent intent_from_json(const Json& record, std::size_t line);
Json intent_to_json(const Intent& intent);

/// Reads a knowledge-base JSON-lines file and returns the simplified taxonomy.
Taxonomy load_taxonomy(const std::filesystem::path& path);
Taxonomy taxonomy_from_records(std::span<const Json> records);
void save_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy);

}  // namespace clara
