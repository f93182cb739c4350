#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "mcfnet/data/preprocess.hpp"
#include "mcfnet/data/split.hpp"

namespace mcfnet::data {

// Slices of a set of cases plus the metadata stored in manifest.json.
struct Dataset {
  int64_t num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<SliceSample> samples;
  SplitManifest split;

  std::vector<std::string> case_ids() const;
  // Samples whose case is in `cases`, order preserved.
  Dataset subset(const std::vector<std::string>& cases) const;
  void validate() const;
};

// Default class names: background, class1, class2, ...
std::vector<std::string> default_class_names(int64_t num_classes);

// Writes images/<case>_<slice>.png (16-bit), masks/<case>_<slice>.png (8-bit)
// and manifest.json (classes, per-case partition and slice count).
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Loads a dataset directory; `partition` ("train" / "test") keeps only the
// cases of that partition.
Dataset load_dataset(const std::filesystem::path& dir,
                     const std::optional<std::string>& partition = std::nullopt);

struct Batch {
  torch::Tensor images;  // (B, 1, H, W) float32
  torch::Tensor labels;  // (B, H, W) int64
};

Batch make_batch(std::span<const SliceSample> samples, std::span<const size_t> indices);

}  // namespace mcfnet::data
