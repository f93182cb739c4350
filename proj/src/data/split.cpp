#include "mcfnet/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace mcfnet::data {

SplitManifest make_split(const std::vector<std::string>& case_ids, double train_fraction,
                         uint64_t seed) {
  if (case_ids.size() < 2) throw std::invalid_argument("a split needs at least two cases");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
  }
  if (std::set<std::string>(case_ids.begin(), case_ids.end()).size() != case_ids.size()) {
    throw std::invalid_argument("case ids must be unique");
  }
  std::vector<std::string> order(case_ids);
  std::sort(order.begin(), order.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = static_cast<int64_t>(order.size());
  const auto n_train = std::clamp<int64_t>(std::llround(train_fraction * static_cast<double>(n)), 1, n - 1);
  SplitManifest manifest;
  manifest.seed = seed;
  manifest.train.assign(order.begin(), order.begin() + n_train);
  manifest.test.assign(order.begin() + n_train, order.end());
  std::sort(manifest.train.begin(), manifest.train.end());
  std::sort(manifest.test.begin(), manifest.test.end());
  return manifest;
}

}  // namespace mcfnet::data
