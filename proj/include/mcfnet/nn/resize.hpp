#pragma once

#include <torch/torch.h>

namespace mcfnet {

// Bilinear resampling over the last two dimensions of a 2D, 3D or 4D tensor.
//
// Coordinate mapping is the half-pixel (align-corners = false) convention:
// an output pixel o samples source position (o + 0.5) * in / out - 0.5,
// clamped to the source edge. Each output value is the weighted sum of the
// four neighbouring source pixels with weights (1-a)(1-b), a(1-b), (1-a)b, ab
// where a, b are the fractional offsets. Same-size requests return the input
// unchanged. Differentiable with respect to the input.
torch::Tensor bilinear_resize(const torch::Tensor& input, int64_t out_height, int64_t out_width);

// Nearest-neighbour resampling with the same half-pixel mapping; only ever
// copies source values, so label maps keep their label set.
torch::Tensor nearest_resize(const torch::Tensor& input, int64_t out_height, int64_t out_width);

}  // namespace mcfnet
