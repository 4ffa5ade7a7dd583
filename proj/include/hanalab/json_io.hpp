#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace hanalab {

// Reals in persisted artifacts are written with 17 significant digits so
// that files are byte-stable and parse back to the identical double.
std::string format_real(double value);

std::string format_real_array(const Eigen::VectorXd& values);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

// FNV-1a-64 over (relative path, size, bytes) of every regular file under
// root, visited in sorted order. Used for reproducibility checks.
uint64_t hash_directory(const std::filesystem::path& root);

}  // namespace hanalab
