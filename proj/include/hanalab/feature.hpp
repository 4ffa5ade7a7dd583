#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace hanalab {

inline constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

inline uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = kFnvOffsetBasis;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

// Token-count vector of dimension dim. Conceptually dense; stored as sorted
// (index, count) pairs because observation texts touch only a few hundred of
// the default 4096 buckets.
struct FeatureVector {
  int dim = 0;
  std::vector<std::pair<int, double>> entries;

  double l1_norm() const {
    double s = 0;
    for (const auto& [i, v] : entries) s += v;
    return s;
  }
  Eigen::VectorXd dense() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    for (const auto& [i, v] : entries) x[i] = v;
    return x;
  }
  bool operator==(const FeatureVector&) const = default;
};

// Lowercases, splits on whitespace, and hashes each token with FNV-1a-64
// modulo dim.
FeatureVector featurize(std::string_view text, int dim);

}  // namespace hanalab
