#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bubblesim/catalog.hpp"
#include "bubblesim/personas.hpp"

namespace testing {

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("bubblesim-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline bubblesim::VideoItem make_item(std::string id, std::string l1, std::string l2,
                                      std::string l3) {
  bubblesim::VideoItem v;
  v.item_id = std::move(id);
  v.title = "title " + v.item_id;
  v.tag = "tag";
  v.category_l1 = std::move(l1);
  v.category_l2 = std::move(l2);
  v.category_l3 = std::move(l3);
  v.creator_popularity = 100;
  return v;
}

inline const bubblesim::Catalog& fixture_catalog() {
  static const bubblesim::Catalog catalog =
      bubblesim::generate_fixture(7, 4000, bubblesim::FixtureShape{});
  return catalog;
}

inline bubblesim::UserProfile make_user(std::string id,
                                        std::array<std::string, 3> interests) {
  bubblesim::UserProfile p;
  p.user_id = std::move(id);
  p.age = 30;
  p.gender = bubblesim::Gender::kFemale;
  p.city_level = 2;
  p.phone_band = 2;
  p.initial_interests = std::move(interests);
  p.motivation = bubblesim::Gratification::kEntertainment;
  return p;
}

}  // namespace testing

#ifdef BUBBLESIM_GOLDEN_DIR
namespace testing {

// Compares `actual` with tests/golden/<name>. Setting BUBBLESIM_UPDATE_GOLDEN
// rewrites the file instead.
inline bool matches_golden(const std::string& name, const std::string& actual) {
  const std::filesystem::path path = std::filesystem::path(BUBBLESIM_GOLDEN_DIR) / name;
  if (std::getenv("BUBBLESIM_UPDATE_GOLDEN") != nullptr) {
    write_file(path, actual);
    return true;
  }
  return std::filesystem::exists(path) && read_file(path) == actual;
}

}  // namespace testing
#endif
