#include "clara/taxonomy.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "clara/error.hpp"
#include "clara/text.hpp"

namespace clara {

namespace {
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

void check_layer(int layer) {
  if (layer < 1 || layer > kTaxonomyDepth) {
    throw Error(ErrorCode::kLayerOutOfRange,
                "layer " + std::to_string(layer) + " outside 1.." +
                    std::to_string(kTaxonomyDepth));
  }
}
}  // namespace

// ---- CategoryTree ----------------------------------------------------------

CategoryTree::CategoryTree() : names_{""}, parents_{kNone}, children_(1), depths_{0} {}

CategoryTree CategoryTree::from_parent_links(std::span<const std::string> names,
                                             std::span<const std::size_t> parents) {
  if (names.size() != parents.size()) {
    throw Error(ErrorCode::kInvalidArgument, "names and parents differ in length");
  }
  const std::size_t n = names.size();
  std::vector<std::vector<std::size_t>> kids(n);
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (parents[i] == kNone) {
      roots.push_back(i);
    } else if (parents[i] >= n || parents[i] == i) {
      throw Error(ErrorCode::kInvalidArgument, "bad parent link at node " + std::to_string(i));
    } else {
      kids[parents[i]].push_back(i);
    }
  }
  CategoryTree tree;
  std::vector<std::size_t> mapped(n, kNone);
  std::vector<std::size_t> stack;
  for (auto r : roots) {
    if (tree.find_child(kRoot, names[r])) {
      throw Error(ErrorCode::kDuplicateId, "sibling categories named '" + names[r] + "'");
    }
    mapped[r] = tree.add_child(kRoot, names[r]);
    stack.push_back(r);
  }
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto c : kids[u]) {
      if (tree.find_child(mapped[u], names[c])) {
        throw Error(ErrorCode::kDuplicateId, "sibling categories named '" + names[c] + "'");
      }
      mapped[c] = tree.add_child(mapped[u], names[c]);
      stack.push_back(c);
    }
  }
  if (std::find(mapped.begin(), mapped.end(), kNone) != mapped.end()) {
    throw Error(ErrorCode::kInvalidArgument, "category links contain a cycle");
  }
  return tree;
}

std::size_t CategoryTree::add_child(std::size_t parent, const std::string& name) {
  if (auto existing = find_child(parent, name)) return *existing;
  const std::size_t id = names_.size();
  names_.push_back(name);
  parents_.push_back(parent);
  children_.emplace_back();
  depths_.push_back(depths_[parent] + 1);
  children_[parent].push_back(id);
  return id;
}

std::optional<std::size_t> CategoryTree::find_child(std::size_t parent,
                                                    std::string_view name) const {
  for (auto c : children_[parent]) {
    if (names_[c] == name) return c;
  }
  return std::nullopt;
}

std::size_t CategoryTree::add_path(std::span<const std::string> path) {
  std::size_t node = kRoot;
  for (const auto& name : path) node = add_child(node, name);
  return node;
}

std::optional<std::size_t> CategoryTree::find_path(std::span<const std::string> path) const {
  std::size_t node = kRoot;
  for (const auto& name : path) {
    auto next = find_child(node, name);
    if (!next) return std::nullopt;
    node = *next;
  }
  return node;
}

int CategoryTree::max_depth() const noexcept {
  return *std::max_element(depths_.begin(), depths_.end());
}

std::vector<std::string> CategoryTree::path(std::size_t node) const {
  std::vector<std::string> out;
  while (node != kRoot) {
    out.push_back(names_[node]);
    node = parents_[node];
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// ---- Taxonomy --------------------------------------------------------------

std::string class_key(std::span<const std::string> path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) out += " > ";
    out += path[i];
  }
  return out;
}

Taxonomy::Taxonomy() : node_class_(1, kNone), leaf_intents_(1) {}

Taxonomy Taxonomy::build(std::vector<Intent> intents, CategoryTree tree) {
  Taxonomy t;
  t.tree_ = std::move(tree);
  t.intents_ = std::move(intents);

  for (std::size_t node = 1; node < t.tree_.size(); ++node) {
    if (t.tree_.depth(node) > kTaxonomyDepth) {
      throw Error(ErrorCode::kDepthExceeded,
                  "category '" + class_key(t.tree_.path(node)) + "' is deeper than 3");
    }
    if (t.tree_.is_leaf(node) && t.tree_.depth(node) != kTaxonomyDepth) {
      throw Error(ErrorCode::kUnsimplifiedTaxonomy,
                  "leaf '" + class_key(t.tree_.path(node)) + "' is not at depth 3");
    }
  }

  // Layer classes in lexicographic key order.
  t.node_class_.assign(t.tree_.size(), kNone);
  for (int layer = 1; layer <= kTaxonomyDepth; ++layer) {
    std::vector<std::pair<std::string, std::size_t>> keyed;
    for (std::size_t node = 1; node < t.tree_.size(); ++node) {
      if (t.tree_.depth(node) == layer) keyed.emplace_back(class_key(t.tree_.path(node)), node);
    }
    std::sort(keyed.begin(), keyed.end());
    auto& classes = t.classes_[layer - 1];
    auto& nodes = t.layer_nodes_[layer - 1];
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      classes.push_back(keyed[i].first);
      nodes.push_back(keyed[i].second);
      t.node_class_[keyed[i].second] = i;
    }
  }

  std::unordered_set<std::string> labels;
  t.leaf_intents_.assign(t.tree_.size(), {});
  t.intent_leaf_.resize(t.intents_.size());
  for (std::size_t i = 0; i < t.intents_.size(); ++i) {
    const auto& intent = t.intents_[i];
    if (!t.by_id_.emplace(intent.id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "intent id '" + intent.id + "' appears twice");
    }
    if (intent.compressed_label && !labels.insert(*intent.compressed_label).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "compressed label '" + *intent.compressed_label + "' is not unique");
    }
    auto leaf = t.tree_.find_path(intent.category_path);
    if (!leaf) {
      throw Error(ErrorCode::kDanglingCategory,
                  "intent '" + intent.id + "' path '" + class_key(intent.category_path) +
                      "' is not in the category tree");
    }
    if (!t.tree_.is_leaf(*leaf) || t.tree_.depth(*leaf) != kTaxonomyDepth) {
      throw Error(ErrorCode::kUnsimplifiedTaxonomy,
                  "intent '" + intent.id + "' does not end at a depth-3 leaf");
    }
    t.intent_leaf_[i] = *leaf;
    t.leaf_intents_[*leaf].push_back(i);
  }
  for (auto& hosted : t.leaf_intents_) {
    std::sort(hosted.begin(), hosted.end(), [&](std::size_t a, std::size_t b) {
      return t.intents_[a].id < t.intents_[b].id;
    });
  }
  return t;
}

std::array<std::size_t, 3> Taxonomy::layer_sizes() const noexcept {
  return {classes_[0].size(), classes_[1].size(), classes_[2].size()};
}

const Intent* Taxonomy::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &intents_[it->second];
}

std::optional<std::size_t> Taxonomy::index_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const Intent& Taxonomy::at(std::string_view id) const {
  const Intent* intent = find(id);
  if (intent == nullptr) {
    throw Error(ErrorCode::kUnknownIntent, "intent '" + std::string(id) + "' not in taxonomy");
  }
  return *intent;
}

const std::vector<std::string>& Taxonomy::classes(int layer) const {
  check_layer(layer);
  return classes_[layer - 1];
}

const std::vector<std::size_t>& Taxonomy::layer_nodes(int layer) const {
  check_layer(layer);
  return layer_nodes_[layer - 1];
}

std::size_t Taxonomy::class_of_node(std::size_t node) const { return node_class_.at(node); }

std::array<std::size_t, 3> Taxonomy::class_targets(std::string_view intent_id) const {
  std::size_t node = leaf_of(intent_id);
  std::array<std::size_t, 3> out{};
  for (int layer = kTaxonomyDepth; layer >= 1; --layer) {
    out[layer - 1] = node_class_[node];
    node = tree_.parent(node);
  }
  return out;
}

std::size_t Taxonomy::leaf_of(std::string_view intent_id) const {
  auto idx = index_of(intent_id);
  if (!idx) {
    throw Error(ErrorCode::kUnknownIntent,
                "intent '" + std::string(intent_id) + "' not in taxonomy");
  }
  return intent_leaf_[*idx];
}

const std::vector<std::size_t>& Taxonomy::intents_at_leaf(std::size_t leaf) const {
  return leaf_intents_.at(leaf);
}

const Intent* Taxonomy::intent_for_leaf_class(std::size_t leaf_class) const {
  const auto& leaves = layer_nodes_[kTaxonomyDepth - 1];
  if (leaf_class >= leaves.size()) return nullptr;
  const auto& hosted = leaf_intents_[leaves[leaf_class]];
  return hosted.empty() ? nullptr : &intents_[hosted.front()];
}

const std::string& Taxonomy::surface_label(const Intent& intent) {
  return intent.compressed_label ? *intent.compressed_label : intent.title;
}

Taxonomy Taxonomy::with_compressed_labels(
    std::span<const std::optional<std::string>> labels) const {
  if (labels.size() != intents_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label count differs from intent count");
  }
  auto intents = intents_;
  for (std::size_t i = 0; i < intents.size(); ++i) intents[i].compressed_label = labels[i];
  return build(std::move(intents), tree_);
}

// ---- free functions --------------------------------------------------------

Taxonomy simplify(const CategoryTree& raw, std::vector<Intent> intents) {
  if (raw.max_depth() > kTaxonomyDepth) {
    for (std::size_t node = 1; node < raw.size(); ++node) {
      if (raw.depth(node) > kTaxonomyDepth) {
        throw Error(ErrorCode::kDepthExceeded,
                    "category '" + class_key(raw.path(node)) + "' is deeper than 3");
      }
    }
  }
  auto pad = [](std::vector<std::string> path) {
    while (!path.empty() && static_cast<int>(path.size()) < kTaxonomyDepth) {
      path.push_back(path.back());
    }
    return path;
  };

  CategoryTree out;
  for (std::size_t node = 1; node < raw.size(); ++node) {
    if (raw.is_leaf(node)) out.add_path(pad(raw.path(node)));
  }
  for (auto& intent : intents) {
    if (intent.category_path.empty()) {
      throw Error(ErrorCode::kDanglingCategory, "intent '" + intent.id + "' has no category");
    }
    if (static_cast<int>(intent.category_path.size()) > kTaxonomyDepth) {
      throw Error(ErrorCode::kDepthExceeded,
                  "intent '" + intent.id + "' category path is deeper than 3");
    }
    intent.category_path = pad(std::move(intent.category_path));
    out.add_path(intent.category_path);
  }
  // An intent may have been attached to what was an inner node of `raw`; the
  // padded clone is then a leaf under it and the inner node keeps its children.
  return Taxonomy::build(std::move(intents), std::move(out));
}

std::vector<std::string> layer_classes(const Taxonomy& taxonomy, int layer) {
  return taxonomy.classes(layer);
}

Intent intent_from_json(const Json& record, std::size_t line) {
  Intent intent;
  intent.id = require_string(record, "id", line);
  if (intent.id.empty()) throw ParseError(line, "empty intent id");
  intent.title = require_string(record, "title", line);
  intent.category_path = require_string_array(record, "category", line);
  intent.rep_query = record.contains("rep_query") ? require_string(record, "rep_query", line)
                                                  : intent.title;
  if (auto it = record.find("compressed"); it != record.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(line, "field 'compressed' must be a string");
    intent.compressed_label = it->get<std::string>();
  }
  intent.language = record.contains("lang") ? require_string(record, "lang", line) : "und";
  for (const auto& name : intent.category_path) {
    if (text::trim(name).empty()) {
      throw Error(ErrorCode::kDanglingCategory,
                  "line " + std::to_string(line) + ": empty category name in intent '" +
                      intent.id + "'");
    }
  }
  return intent;
}

Json intent_to_json(const Intent& intent) {
  Json j = {{"id", intent.id},
            {"title", intent.title},
            {"category", intent.category_path},
            {"rep_query", intent.rep_query}};
  if (intent.compressed_label) j["compressed"] = *intent.compressed_label;
  j["lang"] = intent.language;
  return j;
}

Taxonomy taxonomy_from_records(std::span<const Json> records) {
  std::vector<Intent> intents;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto intent = intent_from_json(records[i], i + 1);
    if (!seen.insert(intent.id).second) {
      throw Error(ErrorCode::kDuplicateId, "line " + std::to_string(i + 1) + ": intent id '" +
                                               intent.id + "' appears twice");
    }
    intents.push_back(std::move(intent));
  }
  return simplify(CategoryTree{}, std::move(intents));
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  std::vector<Json> records;
  std::vector<std::size_t> lines;
  for_each_jsonl(path, [&](const Json& r, std::size_t line) {
    records.push_back(r);
    lines.push_back(line);
  });
  // Re-validate record by record so errors carry the file's line numbers.
  std::vector<Intent> intents;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto intent = intent_from_json(records[i], lines[i]);
    if (!seen.insert(intent.id).second) {
      throw Error(ErrorCode::kDuplicateId, "line " + std::to_string(lines[i]) +
                                               ": intent id '" + intent.id + "' appears twice");
    }
    intents.push_back(std::move(intent));
  }
  return simplify(CategoryTree{}, std::move(intents));
}

void save_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  std::vector<Json> records;
  records.reserve(taxonomy.intents().size());
  for (const auto& intent : taxonomy.intents()) records.push_back(intent_to_json(intent));
  write_jsonl(path, records);
}

}  // namespace clara
