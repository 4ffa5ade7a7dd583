#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "hanalab/nn.hpp"

namespace hanalab {

inline constexpr std::string_view kCheckpointFormatVersion = "nncore/1";

// One JSON document holding a set of named networks (one for teacher/dqn
// heads, three for drrn) plus optimizer state and provenance fields. Weights
// are flattened per layer in row-major order, each layer's matrix followed
// by its bias, and written with 17 significant digits.
struct Checkpoint {
  std::string template_version;
  int hash_dim = 0;
  uint64_t rng_seed = 0;
  std::string head;  // "teacher" | "dqn" | "drrn"
  std::map<std::string, Mlp> nets;
  std::optional<std::string> optimizer_type;
  long optimizer_step = 0;
  Eigen::VectorXd optimizer_m, optimizer_v;

  std::string to_json_text() const;
  static Checkpoint from_json_text(const std::string& text);

  void save(const std::filesystem::path& path) const;
  // Throws VersionError on unknown format or template versions.
  static Checkpoint load(const std::filesystem::path& path,
                         const std::string& expected_template_version);
};

Eigen::VectorXd mlp_to_row_major(const Mlp& net);
void mlp_from_row_major(Mlp& net, const Eigen::VectorXd& flat);

}  // namespace hanalab
