#include "bubblesim/catalog.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "bubblesim/rng.hpp"

namespace bubblesim {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void check_level(int level) {
  if (level < 1 || level > kNumLevels) {
    throw std::out_of_range(fmt::format("category level {} out of range", level));
  }
}

std::string required_string(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw CatalogError(
        fmt::format("line {}: missing or non-string field '{}'", line, key), line);
  }
  return it->get<std::string>();
}

VideoItem item_from_json(const json& obj, std::size_t line) {
  if (!obj.is_object()) {
    throw CatalogError(fmt::format("line {}: record is not an object", line), line);
  }
  VideoItem item;
  item.item_id = required_string(obj, "item_id", line);
  item.title = required_string(obj, "title", line);
  if (const auto it = obj.find("tag"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw CatalogError(fmt::format("line {}: non-string field 'tag'", line), line);
    }
    item.tag = it->get<std::string>();
  }
  item.category_l1 = trim(required_string(obj, "category_l1", line));
  item.category_l2 = trim(required_string(obj, "category_l2", line));
  item.category_l3 = trim(required_string(obj, "category_l3", line));
  const auto pop = obj.find("creator_popularity");
  if (pop == obj.end() || !pop->is_number_integer()) {
    throw CatalogError(
        fmt::format("line {}: missing or non-integer 'creator_popularity'", line),
        line);
  }
  item.creator_popularity = pop->get<std::int64_t>();
  return item;
}

void validate_item(const VideoItem& item, std::size_t line) {
  if (item.item_id.empty()) {
    throw CatalogError(fmt::format("line {}: empty item_id", line), line);
  }
  for (int level = 1; level <= kNumLevels; ++level) {
    if (item.category(level).empty()) {
      throw CatalogError(
          fmt::format("line {}: item '{}' has empty category_l{}", line,
                      item.item_id, level),
          line);
    }
  }
  if (item.creator_popularity < 0) {
    throw CatalogError(
        fmt::format("line {}: item '{}' has negative creator_popularity", line,
                    item.item_id),
        line);
  }
}

}  // namespace

const std::string& VideoItem::category(int level) const {
  switch (level) {
    case 1: return category_l1;
    case 2: return category_l2;
    case 3: return category_l3;
  }
  check_level(level);
  return category_l1;  // unreachable
}

// ---------------------------------------------------------------------------
// CategoryHierarchy

void CategoryHierarchy::add_path(const std::string& l1, const std::string& l2,
                                 const std::string& l3) {
  const std::array<const std::string*, 3> path{&l1, &l2, &l3};
  for (int depth = 0; depth < 2; ++depth) {
    const std::string& parent = *path[depth];
    const std::string& child = *path[depth + 1];
    const auto [it, inserted] = parent_[depth].emplace(child, parent);
    if (!inserted && it->second != parent) {
      throw HierarchyError(fmt::format(
          "level-{} category '{}' appears under two level-{} parents: '{}' and '{}'",
          depth + 2, child, depth + 1, it->second, parent));
    }
  }
  for (int depth = 0; depth < kNumLevels; ++depth) names_[depth].insert(*path[depth]);
  children_[0][l1].insert(l2);
  children_[1][l2].insert(l3);
}

const std::set<std::string>& CategoryHierarchy::names(int level) const {
  check_level(level);
  return names_[level - 1];
}

const std::set<std::string>& CategoryHierarchy::children(
    int level, const std::string& name) const {
  if (level < 1 || level > 2) {
    throw std::out_of_range("children: level must be 1 or 2");
  }
  return children_[level - 1].at(name);
}

const std::string& CategoryHierarchy::parent(int level,
                                             const std::string& name) const {
  if (level < 2 || level > 3) {
    throw std::out_of_range("parent: level must be 2 or 3");
  }
  return parent_[level - 2].at(name);
}

// ---------------------------------------------------------------------------
// Catalog

Catalog::Catalog(std::vector<VideoItem> items) : items_(std::move(items)) {
  if (items_.empty()) throw CatalogError("empty catalog");
  index_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    auto& item = items_[i];
    item.category_l1 = trim(item.category_l1);
    item.category_l2 = trim(item.category_l2);
    item.category_l3 = trim(item.category_l3);
    validate_item(item, i + 1);
    if (!index_.emplace(item.item_id, i).second) {
      throw CatalogError(
          fmt::format("line {}: duplicate item_id '{}'", i + 1, item.item_id), i + 1);
    }
    try {
      hierarchy_.add_path(item.category_l1, item.category_l2, item.category_l3);
    } catch (const HierarchyError& e) {
      throw HierarchyError(fmt::format("line {}: {}", i + 1, e.what()), i + 1);
    }
  }
}

std::size_t Catalog::index_of(const std::string& item_id) const {
  const auto it = index_.find(item_id);
  if (it == index_.end()) {
    throw std::out_of_range(fmt::format("unknown item_id '{}'", item_id));
  }
  return it->second;
}

Catalog parse_catalog(const std::string& jsonl) {
  std::vector<VideoItem> items;
  // Duplicate ids and tree violations are reported with the file line.
  std::set<std::string> ids;
  CategoryHierarchy hierarchy;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw CatalogError(fmt::format("line {}: malformed JSON: {}", line_no, e.what()),
                         line_no);
    }
    auto item = item_from_json(obj, line_no);
    validate_item(item, line_no);
    if (!ids.insert(item.item_id).second) {
      throw CatalogError(
          fmt::format("line {}: duplicate item_id '{}'", line_no, item.item_id),
          line_no);
    }
    try {
      hierarchy.add_path(item.category_l1, item.category_l2, item.category_l3);
    } catch (const HierarchyError& e) {
      throw HierarchyError(fmt::format("line {}: {}", line_no, e.what()), line_no);
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) throw CatalogError("empty catalog");
  return Catalog(std::move(items));
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError(fmt::format("cannot open catalog '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str());
}

std::string catalog_to_jsonl(const Catalog& catalog) {
  std::string out;
  for (const auto& item : catalog.items()) {
    nlohmann::ordered_json obj;
    obj["item_id"] = item.item_id;
    obj["title"] = item.title;
    obj["tag"] = item.tag;
    obj["category_l1"] = item.category_l1;
    obj["category_l2"] = item.category_l2;
    obj["category_l3"] = item.category_l3;
    obj["creator_popularity"] = item.creator_popularity;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CatalogError(fmt::format("cannot write '{}'", path.string()));
  out << catalog_to_jsonl(catalog);
  if (!out) throw CatalogError(fmt::format("write failed for '{}'", path.string()));
}

HierarchyStats hierarchy_stats(const Catalog& catalog) {
  if (catalog.empty()) throw CatalogError("empty catalog");
  const auto& h = catalog.hierarchy();
  HierarchyStats stats;
  for (int level = 1; level <= kNumLevels; ++level) {
    stats.unique_counts[level - 1] = h.size(level);
  }
  // With one parent per child, the total child count at level l is the
  // number of names at level l+1.
  for (int level = 1; level <= 2; ++level) {
    stats.avg_children[level - 1] = static_cast<double>(h.size(level + 1)) /
                                    static_cast<double>(h.size(level));
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Synthetic fixtures

FixtureShape parse_shape(const std::string& text) {
  FixtureShape shape;
  std::array<double, 3> v{};
  std::istringstream in(text);
  std::string part;
  int n = 0;
  while (std::getline(in, part, ',')) {
    if (n == 3) throw std::invalid_argument("shape: expected three values");
    std::size_t used = 0;
    try {
      v[n] = std::stod(trim(part), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument(fmt::format("shape: bad number '{}'", part));
    }
    if (used != trim(part).size()) {
      throw std::invalid_argument(fmt::format("shape: bad number '{}'", part));
    }
    ++n;
  }
  if (n != 3) throw std::invalid_argument("shape: expected three values");
  if (v[0] < 1 || v[0] != std::floor(v[0])) {
    throw std::invalid_argument("shape: level-1 count must be a positive integer");
  }
  if (!(v[1] > 0) || !(v[2] > 0)) {
    throw std::invalid_argument("shape: branching must be positive");
  }
  shape.level1 = static_cast<int>(v[0]);
  shape.children_l1 = v[1];
  shape.children_l2 = v[2];
  return shape;
}

namespace {

int draw_child_count(Rng& rng, double mean) {
  const double base = std::floor(mean);
  const int extra = rng.bernoulli(mean - base) ? 1 : 0;
  return std::max(1, static_cast<int>(base) + extra);
}

}  // namespace

Catalog generate_fixture(std::uint64_t seed, std::size_t n_items,
                         const FixtureShape& shape) {
  if (n_items == 0) throw std::invalid_argument("generate_fixture: n_items = 0");
  if (shape.level1 < 1 || !(shape.children_l1 > 0) || !(shape.children_l2 > 0)) {
    throw std::invalid_argument("generate_fixture: branching must be positive");
  }
  Rng rng(derive_seed(seed, "fixture"));

  struct Leaf {
    std::string l1, l2, l3;
  };
  std::vector<Leaf> leaves;
  for (int a = 0; a < shape.level1; ++a) {
    const auto l1 = fmt::format("topic{:02d}", a + 1);
    const int n2 = draw_child_count(rng, shape.children_l1);
    for (int b = 0; b < n2; ++b) {
      const auto l2 = fmt::format("{}.sub{:02d}", l1, b + 1);
      const int n3 = draw_child_count(rng, shape.children_l2);
      for (int c = 0; c < n3; ++c) {
        leaves.push_back({l1, l2, fmt::format("{}.leaf{:02d}", l2, c + 1)});
      }
    }
  }

  std::vector<VideoItem> items;
  items.reserve(n_items);
  const int width = std::max<int>(6, static_cast<int>(std::to_string(n_items).size()));
  for (std::size_t i = 0; i < n_items; ++i) {
    const auto& leaf = leaves[rng.uniform_index(leaves.size())];
    VideoItem item;
    item.item_id = fmt::format("v{:0{}d}", i + 1, width);
    item.title = fmt::format("Clip {} on {}", i + 1, leaf.l3);
    item.tag = fmt::format("#{}", leaf.l2);
    item.category_l1 = leaf.l1;
    item.category_l2 = leaf.l2;
    item.category_l3 = leaf.l3;
    // Log-uniform follower counts between 10 and 10^6.
    item.creator_popularity =
        static_cast<std::int64_t>(std::floor(std::pow(10.0, rng.uniform(1.0, 6.0))));
    items.push_back(std::move(item));
  }
  return Catalog(std::move(items));
}

std::string summarize_item(const VideoItem& item) {
  return fmt::format(
      "Title: {}\nTag: {}\nCategory level 1: {}\nCategory level 2: {}\n"
      "Category level 3: {}\nCreator popularity: {} followers",
      item.title, item.tag, item.category_l1, item.category_l2, item.category_l3,
      item.creator_popularity);
}

}  // namespace bubblesim
