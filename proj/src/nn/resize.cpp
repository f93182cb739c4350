#include "mcfnet/nn/resize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mcfnet {
namespace {

struct AxisTaps {
  torch::Tensor lo;
  torch::Tensor hi;
  torch::Tensor frac;
};

double source_coord(int64_t out_index, int64_t in_size, int64_t out_size) {
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  return std::max(0.0, (static_cast<double>(out_index) + 0.5) * scale - 0.5);
}

AxisTaps axis_taps(int64_t in_size, int64_t out_size, torch::ScalarType dtype) {
  std::vector<int64_t> lo(out_size), hi(out_size);
  std::vector<double> frac(out_size);
  for (int64_t o = 0; o < out_size; ++o) {
    const double src = source_coord(o, in_size, out_size);
    const int64_t i0 = std::min<int64_t>(static_cast<int64_t>(std::floor(src)), in_size - 1);
    lo[o] = i0;
    hi[o] = std::min<int64_t>(i0 + 1, in_size - 1);
    frac[o] = src - static_cast<double>(i0);
  }
  auto as_long = [](const std::vector<int64_t>& v) {
    return torch::tensor(v, torch::kLong);
  };
  return {as_long(lo), as_long(hi), torch::tensor(frac, torch::kDouble).to(dtype)};
}

void check_resizable(const torch::Tensor& input, int64_t out_height, int64_t out_width) {
  TORCH_CHECK(input.dim() >= 2 && input.dim() <= 4,
              "resize expects a 2D, 3D or 4D tensor, got ", input.dim(), "D");
  TORCH_CHECK(out_height >= 1 && out_width >= 1,
              "resize target must be at least 1x1, got ", out_height, "x", out_width);
  TORCH_CHECK(input.size(-1) >= 1 && input.size(-2) >= 1, "resize source is empty");
}

}  // namespace

torch::Tensor bilinear_resize(const torch::Tensor& input, int64_t out_height, int64_t out_width) {
  check_resizable(input, out_height, out_width);
  const int64_t in_h = input.size(-2);
  const int64_t in_w = input.size(-1);
  if (in_h == out_height && in_w == out_width) {
    return input;
  }
  TORCH_CHECK(input.is_floating_point(), "bilinear_resize needs a floating-point tensor");

  torch::Tensor out = input;
  if (in_h != out_height) {
    const auto rows = axis_taps(in_h, out_height, input.scalar_type());
    const auto beta = rows.frac.unsqueeze(1);
    out = out.index_select(-2, rows.lo) * (1 - beta) + out.index_select(-2, rows.hi) * beta;
  }
  if (in_w != out_width) {
    const auto cols = axis_taps(in_w, out_width, input.scalar_type());
    const auto& alpha = cols.frac;
    out = out.index_select(-1, cols.lo) * (1 - alpha) + out.index_select(-1, cols.hi) * alpha;
  }
  return out;
}

torch::Tensor nearest_resize(const torch::Tensor& input, int64_t out_height, int64_t out_width) {
  check_resizable(input, out_height, out_width);
  const int64_t in_h = input.size(-2);
  const int64_t in_w = input.size(-1);
  if (in_h == out_height && in_w == out_width) {
    return input;
  }
  auto nearest_index = [](int64_t in_size, int64_t out_size) {
    std::vector<int64_t> idx(out_size);
    const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
    for (int64_t o = 0; o < out_size; ++o) {
      idx[o] = std::min<int64_t>(static_cast<int64_t>(std::floor((o + 0.5) * scale)), in_size - 1);
    }
    return torch::tensor(idx, torch::kLong);
  };
  return input.index_select(-2, nearest_index(in_h, out_height))
      .index_select(-1, nearest_index(in_w, out_width));
}

}  // namespace mcfnet
