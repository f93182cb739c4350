#pragma once

#include <cstdint>
#include <vector>

#include "mcfnet/data/preprocess.hpp"

namespace mcfnet::data {

// Synthetic segmentation data: one slice per case with one randomly placed,
// non-overlapping ellipse or rectangle per foreground class. Every pixel of
// class k has intensity synth_intensity(k, classes), background is 0, so the
// mask is exactly recoverable from the image. Deterministic per seed.
std::vector<SliceSample> synth_dataset(int64_t n_cases, int64_t classes, int64_t image_size,
                                       uint64_t seed);

float synth_intensity(int64_t label, int64_t classes);

}  // namespace mcfnet::data
