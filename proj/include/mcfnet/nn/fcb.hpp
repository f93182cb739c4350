#pragma once

#include <array>

#include <torch/torch.h>

#include "mcfnet/nn/blocks.hpp"

namespace mcfnet {

struct FcbConfig {
  int64_t in_channels = 1;
  // Widths of the stem and the next three encoder levels (skip features).
  std::array<int64_t, 4> encoder_channels{64, 128, 256, 512};
  int64_t bottleneck_channels = 512;
  // Deepest to shallowest; equal to the head widths (C4, C3, C2, C1).
  std::array<int64_t, 4> decoder_channels{256, 128, 64, 64};

  FcbConfig scaled_down(int64_t divisor) const;
  void validate() const;
};

struct FcbEncodeOutput {
  // Scales 1, 1/2, 1/4, 1/8 of the FCB input.
  std::array<torch::Tensor, 4> skips;
  // Scale 1/16.
  torch::Tensor bottleneck;
};

// Main U-net. Encoding and decoding are separate calls so the skip features
// and the bridge can be processed in between.
class FcbBackboneImpl : public torch::nn::Module {
 public:
  explicit FcbBackboneImpl(FcbConfig config);

  FcbEncodeOutput encode(const torch::Tensor& image);
  // Returns decoder features deepest to shallowest.
  std::array<torch::Tensor, 4> decode(const torch::Tensor& bridge,
                                      const std::array<torch::Tensor, 4>& skips);

  const FcbConfig& config() const { return config_; }

 private:
  FcbConfig config_;
  DoubleConv stem_{nullptr};
  std::array<DoubleConv, 3> down_{nullptr, nullptr, nullptr};
  DoubleConv bottleneck_{nullptr};
  std::array<UpBlock, 4> up_{nullptr, nullptr, nullptr, nullptr};
};
TORCH_MODULE(FcbBackbone);

}  // namespace mcfnet
