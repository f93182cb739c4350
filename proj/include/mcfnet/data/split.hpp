#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mcfnet::data {

// Case-level train/test partition.
struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> test;
  uint64_t seed = 0;

  bool operator==(const SplitManifest&) const = default;
};

// Shuffles the case ids with `seed` and puts round(train_fraction * n) of
// them (at least one, at most n - 1) in the training partition.
SplitManifest make_split(const std::vector<std::string>& case_ids, double train_fraction = 0.8,
                         uint64_t seed = 0);

}  // namespace mcfnet::data
