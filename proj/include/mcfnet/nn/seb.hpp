#pragma once

#include <array>

#include <torch/torch.h>

#include "mcfnet/nn/blocks.hpp"

namespace mcfnet {

// Squeeze-and-excitation: global average pool, bottleneck of
// channels / reduction, sigmoid gate per channel.
class SEBlockImpl : public torch::nn::Module {
 public:
  SEBlockImpl(int64_t channels, int64_t reduction);

  torch::Tensor forward(const torch::Tensor& x);
  // Per-channel gate (N, C, 1, 1) in (0, 1).
  torch::Tensor gate(const torch::Tensor& x);

  torch::nn::Conv2d squeeze{nullptr};
  torch::nn::Conv2d excite{nullptr};

 private:
  int64_t channels_;
};
TORCH_MODULE(SEBlock);

// Sigmoid activation map: a 1x1 conv to a single channel followed by a
// sigmoid. Outputs are clamped to [kGateEps, 1 - kGateEps] so the gate never
// reaches 0 or 1 exactly, even where the sigmoid saturates.
class SamImpl : public torch::nn::Module {
 public:
  static constexpr double kGateEps = 1e-6;

  explicit SamImpl(int64_t in_channels = 1);
  torch::Tensor forward(const torch::Tensor& features);

  torch::nn::Conv2d conv{nullptr};
};
TORCH_MODULE(Sam);

// Hadamard product of the input image with a single-channel gate map; the
// gate broadcasts over the image channels.
torch::Tensor gate_input(const torch::Tensor& image, const torch::Tensor& gate);

struct SebConfig {
  int64_t in_channels = 1;
  // Stem followed by four encoder levels.
  std::array<int64_t, 5> encoder_channels{16, 32, 64, 128, 256};
  // Deepest to shallowest; matches the prediction-head input widths.
  std::array<int64_t, 4> decoder_channels{256, 128, 64, 64};
  int64_t se_reduction = 8;

  SebConfig scaled_down(int64_t divisor) const;
  void validate() const;
};

struct SebOutput {
  // Encoder features at scales 1, 1/2, 1/4, 1/8.
  std::array<torch::Tensor, 4> skips;
  // Encoder bottom (1/16), input to the decoder.
  torch::Tensor bottom;
  // Decoder features deepest to shallowest (1/8, 1/4, 1/2, 1).
  std::array<torch::Tensor, 4> decoder;
  // Single-channel prediction map of the top decoder stage.
  torch::Tensor s_output;
  torch::Tensor gate;
  // Input image multiplied by the gate; same shape as the input.
  torch::Tensor gated;
};

// The lightweight SE-attention U-net run on the full-resolution image.
class SebBackboneImpl : public torch::nn::Module {
 public:
  explicit SebBackboneImpl(SebConfig config);

  SebOutput forward(const torch::Tensor& image);

  const SebConfig& config() const { return config_; }

  Sam sam{nullptr};

 private:
  SebConfig config_;
  ConvBnRelu stem_{nullptr};
  std::array<DoubleConv, 4> levels_{nullptr, nullptr, nullptr, nullptr};
  std::array<SEBlock, 4> se_{nullptr, nullptr, nullptr, nullptr};
  std::array<UpBlock, 4> up_{nullptr, nullptr, nullptr, nullptr};
  torch::nn::Conv2d output_head_{nullptr};
};
TORCH_MODULE(SebBackbone);

}  // namespace mcfnet
