#pragma once

// Fixtures shared by the module tests.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "clara/error.hpp"
#include "clara/taxonomy.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("clara-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline clara::Intent make_intent(std::string id, std::string title, std::vector<std::string> path,
                                 std::string rep = "", std::string lang = "en") {
  clara::Intent i;
  i.id = std::move(id);
  i.title = std::move(title);
  i.category_path = std::move(path);
  i.rep_query = rep.empty() ? i.title : std::move(rep);
  i.language = std::move(lang);
  return i;
}

/// Builds a taxonomy from intents whose paths define the tree.
inline clara::Taxonomy taxonomy_of(std::vector<clara::Intent> intents) {
  clara::CategoryTree tree;
  for (const auto& i : intents) tree.add_path(i.category_path);
  return clara::simplify(tree, std::move(intents));
}

/// Seven-node tree: 1 root category, 2 middle, 4 leaves; one intent per leaf.
inline clara::Taxonomy small_taxonomy() {
  return taxonomy_of({
      make_intent("I1", "Cancel Order", {"Logistics", "Order", "Cancellation"}, "cancel my order"),
      make_intent("I2", "Track Package", {"Logistics", "Order", "Tracking"}, "where is my package"),
      make_intent("I3", "Refund Status", {"Logistics", "Return", "Refund"}, "refund status please"),
      make_intent("I4", "Return Item", {"Logistics", "Return", "Pickup"}, "return an item"),
  });
}

template <typename Fn>
clara::ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const clara::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected clara::Error");
}

inline int run_command(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

}  // namespace testing
