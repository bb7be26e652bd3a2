#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace bubblesim {

inline constexpr int kNumLevels = 3;

struct VideoItem {
  std::string item_id;
  std::string title;
  std::string tag;
  std::string category_l1;
  std::string category_l2;
  std::string category_l3;
  std::int64_t creator_popularity = 0;

  // Category name at level 1..3.
  const std::string& category(int level) const;

  bool operator==(const VideoItem&) const = default;
};

// Thrown for malformed input files; `line` is 1-based, 0 when not tied to a
// particular line.
class CatalogError : public std::runtime_error {
 public:
  CatalogError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class HierarchyError : public CatalogError {
 public:
  using CatalogError::CatalogError;
};

class CategoryHierarchy {
 public:
  // Adds one root-to-leaf path. Throws HierarchyError if a level-2 or level-3
  // name already hangs under a different parent.
  void add_path(const std::string& l1, const std::string& l2,
                const std::string& l3);

  // Names at level 1..3, sorted.
  const std::set<std::string>& names(int level) const;
  // Children (level+1 names) of `name` at level 1 or 2.
  const std::set<std::string>& children(int level,
                                        const std::string& name) const;
  const std::string& parent(int level, const std::string& name) const;

  std::size_t size(int level) const { return names(level).size(); }

 private:
  std::array<std::set<std::string>, kNumLevels> names_;
  // children_[0]: l1 -> l2 names, children_[1]: l2 -> l3 names.
  std::array<std::map<std::string, std::set<std::string>>, 2> children_;
  // parent_[0]: l2 -> l1, parent_[1]: l3 -> l2.
  std::array<std::map<std::string, std::string>, 2> parent_;
};

struct HierarchyStats {
  std::array<std::size_t, kNumLevels> unique_counts{};
  // Mean number of children for level-1 and level-2 names.
  std::array<double, 2> avg_children{};
};

// Immutable after construction.
class Catalog {
 public:
  Catalog() = default;
  // Validates fields, ids and the tree property.
  explicit Catalog(std::vector<VideoItem> items);

  const std::vector<VideoItem>& items() const { return items_; }
  const VideoItem& item(std::size_t index) const { return items_.at(index); }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const CategoryHierarchy& hierarchy() const { return hierarchy_; }

  // Index of the item with this id, or throws std::out_of_range.
  std::size_t index_of(const std::string& item_id) const;
  bool contains(const std::string& item_id) const {
    return index_.contains(item_id);
  }

  bool operator==(const Catalog& other) const { return items_ == other.items_; }

 private:
  std::vector<VideoItem> items_;
  CategoryHierarchy hierarchy_;
  std::unordered_map<std::string, std::size_t> index_;
};

Catalog load_catalog(const std::filesystem::path& path);
Catalog parse_catalog(const std::string& jsonl);
void save_catalog(const Catalog& catalog, const std::filesystem::path& path);
std::string catalog_to_jsonl(const Catalog& catalog);

HierarchyStats hierarchy_stats(const Catalog& catalog);

// Branching profile for synthetic catalogs: number of level-1 categories and
// mean child counts for levels 1 and 2. Fractional means are realised by
// giving each parent floor(b) or floor(b)+1 children.
struct FixtureShape {
  int level1 = 21;
  double children_l1 = 2.62;
  double children_l2 = 4.22;
};

FixtureShape parse_shape(const std::string& text);

Catalog generate_fixture(std::uint64_t seed, std::size_t n_items,
                         const FixtureShape& shape);

// Text block shown to agents. Field order is fixed:
//   Title, Tag, Category level 1..3, Creator popularity.
std::string summarize_item(const VideoItem& item);

}  // namespace bubblesim
