#pragma once

#include <string>
#include <vector>

#include <torch/torch.h>

#include "mcfnet/data/volume.hpp"

namespace mcfnet::data {

// One axial training slice: image in [0, 1] (float32, H x W) and integer
// labels (uint8, H x W) on the same grid.
struct SliceSample {
  std::string case_id;
  int64_t slice_index = 0;
  torch::Tensor image;
  torch::Tensor mask;
};

struct NormalizationConfig {
  // CT window in Hounsfield units.
  double ct_level = 40.0;
  double ct_width = 400.0;
  // Percentile clip for MR and PET, per slice.
  double low_percentile = 0.5;
  double high_percentile = 99.5;
  int64_t target_size = 256;
  // Drop slices whose mask is entirely background.
  bool foreground_only = true;
};

// Maps one slice's intensities to [0, 1]: CT is clipped to the window, MR/PET
// to the slice's percentile range, then min-max scaled. Constant slices map to 0.
std::vector<float> normalize_slice(std::span<const float> values, Modality modality,
                                   const NormalizationConfig& config);

// Axial slices of `image` with labels from `labels`, normalised and resized
// to target_size (bilinear for images, nearest-neighbour for masks).
std::vector<SliceSample> slice_and_normalize(const Volume& image, const Volume& labels,
                                             const NormalizationConfig& config,
                                             const std::string& case_id = "case");

}  // namespace mcfnet::data
