#include "hanalab/feature.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <string>

namespace hanalab {

FeatureVector featurize(std::string_view text, int dim) {
  std::map<int, double> counts;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    counts[int(fnv1a64(token) % uint64_t(dim))] += 1.0;
    token.clear();
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch)))
      flush();
    else
      token += char(std::tolower(static_cast<unsigned char>(ch)));
  }
  flush();
  FeatureVector out;
  out.dim = dim;
  out.entries.assign(counts.begin(), counts.end());
  return out;
}

}  // namespace hanalab
