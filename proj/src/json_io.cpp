#include "hanalab/json_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hanalab/errors.hpp"
#include "hanalab/feature.hpp"

namespace hanalab {

std::string format_real(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  std::string out(buf, res.ptr);
  // JSON has no inf/nan; callers must keep artifacts finite.
  if (out.find("inf") != std::string::npos || out.find("nan") != std::string::npos)
    throw TrainingError("attempted to serialize a non-finite real");
  return out;
}

std::string format_real_array(const Eigen::VectorXd& values) {
  std::string out = "[";
  for (long i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_real(values[i]);
  }
  out += ']';
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw StageError("io", "cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw StageError("io", "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw StageError("io", "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  return nlohmann::json::parse(read_text_file(path));
}

uint64_t hash_directory(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  uint64_t h = kFnvOffsetBasis;
  auto mix = [&h](std::string_view bytes) {
    for (unsigned char b : bytes) {
      h ^= b;
      h *= kFnvPrime;
    }
  };
  for (const auto& f : files) {
    mix(std::filesystem::relative(f, root).generic_string());
    mix("\x01");
    mix(read_text_file(f));
    mix("\x02");
  }
  return h;
}

}  // namespace hanalab
