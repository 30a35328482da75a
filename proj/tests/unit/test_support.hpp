#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testing_support {

inline std::filesystem::path corpus_dir() { return CADSCRIPT_TEST_CORPUS_DIR; }

// Sorted *.fs files of corpus/<subdir>.
inline std::vector<std::filesystem::path> corpus_files(const std::string& subdir) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir() / subdir)) {
    if (entry.path().extension() == ".fs") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace testing_support
