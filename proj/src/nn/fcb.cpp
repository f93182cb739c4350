#include "mcfnet/nn/fcb.hpp"

#include <string>

namespace mcfnet {

FcbConfig FcbConfig::scaled_down(int64_t divisor) const {
  FcbConfig out = *this;
  for (auto& c : out.encoder_channels) c = std::max<int64_t>(1, c / divisor);
  for (auto& c : out.decoder_channels) c = std::max<int64_t>(1, c / divisor);
  out.bottleneck_channels = std::max<int64_t>(1, bottleneck_channels / divisor);
  return out;
}

void FcbConfig::validate() const {
  TORCH_CHECK(in_channels >= 1, "FCB needs at least one input channel");
  for (auto c : encoder_channels) TORCH_CHECK(c >= 1, "FCB encoder widths must be positive");
  for (auto c : decoder_channels) TORCH_CHECK(c >= 1, "FCB decoder widths must be positive");
  TORCH_CHECK(bottleneck_channels >= 1, "FCB bottleneck width must be positive");
}

FcbBackboneImpl::FcbBackboneImpl(FcbConfig config) : config_(config) {
  config_.validate();
  const auto& enc = config_.encoder_channels;
  const auto& dec = config_.decoder_channels;
  stem_ = register_module("stem", DoubleConv(config_.in_channels, enc[0]));
  for (size_t level = 1; level < 4; ++level) {
    down_[level - 1] =
        register_module("down" + std::to_string(level), DoubleConv(enc[level - 1], enc[level]));
  }
  bottleneck_ = register_module("bottleneck", DoubleConv(enc[3], config_.bottleneck_channels));
  int64_t below = config_.bottleneck_channels;
  for (size_t k = 0; k < 4; ++k) {
    up_[k] = register_module("up" + std::to_string(k + 1), UpBlock(below, enc[3 - k], dec[k]));
    below = dec[k];
  }
}

FcbEncodeOutput FcbBackboneImpl::encode(const torch::Tensor& image) {
  check_pyramid_input(image, config_.in_channels, "FCB");
  FcbEncodeOutput out;
  out.skips[0] = stem_->forward(image);
  for (size_t level = 1; level < 4; ++level) {
    out.skips[level] = down_[level - 1]->forward(torch::max_pool2d(out.skips[level - 1], 2));
  }
  out.bottleneck = bottleneck_->forward(torch::max_pool2d(out.skips[3], 2));
  return out;
}

std::array<torch::Tensor, 4> FcbBackboneImpl::decode(const torch::Tensor& bridge,
                                                     const std::array<torch::Tensor, 4>& skips) {
  std::array<torch::Tensor, 4> out;
  torch::Tensor x = bridge;
  for (size_t k = 0; k < 4; ++k) {
    x = up_[k]->forward(x, skips[3 - k]);
    out[k] = x;
  }
  return out;
}

}  // namespace mcfnet
