#include "mcfnet/nn/seb.hpp"

#include <algorithm>

#include <string>

namespace mcfnet {

SEBlockImpl::SEBlockImpl(int64_t channels, int64_t reduction) : channels_(channels) {
  TORCH_CHECK(reduction >= 1, "SE reduction must be positive, got ", reduction);
  TORCH_CHECK(channels >= reduction, "SE block with ", channels,
              " channels cannot use reduction ", reduction);
  TORCH_CHECK(channels % reduction == 0, "SE channels ", channels,
              " not divisible by reduction ", reduction);
  const int64_t hidden = channels / reduction;
  squeeze = register_module("squeeze", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, hidden, 1)));
  excite = register_module("excite", torch::nn::Conv2d(torch::nn::Conv2dOptions(hidden, channels, 1)));
}

torch::Tensor SEBlockImpl::gate(const torch::Tensor& x) {
  TORCH_CHECK(x.dim() == 4 && x.size(1) == channels_, "SE block expects ", channels_,
              " channels");
  auto pooled = x.mean({2, 3}, /*keepdim=*/true);
  return torch::sigmoid(excite->forward(torch::relu(squeeze->forward(pooled))));
}

torch::Tensor SEBlockImpl::forward(const torch::Tensor& x) { return x * gate(x); }

SamImpl::SamImpl(int64_t in_channels) {
  conv = register_module("conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, 1, 1)));
}

torch::Tensor SamImpl::forward(const torch::Tensor& features) {
  return torch::sigmoid(conv->forward(features)).clamp(kGateEps, 1.0 - kGateEps);
}

torch::Tensor gate_input(const torch::Tensor& image, const torch::Tensor& gate) {
  TORCH_CHECK(image.dim() == 4 && gate.dim() == 4, "gate_input expects NCHW tensors");
  TORCH_CHECK(gate.size(1) == 1, "gate map must have a single channel, got ", gate.size(1));
  TORCH_CHECK(image.size(0) == gate.size(0), "gate batch ", gate.size(0), " vs image batch ",
              image.size(0));
  TORCH_CHECK(image.size(2) == gate.size(2) && image.size(3) == gate.size(3), "gate map ",
              gate.size(2), "x", gate.size(3), " not aligned with image ", image.size(2), "x",
              image.size(3));
  return image * gate;
}

SebConfig SebConfig::scaled_down(int64_t divisor) const {
  SebConfig out = *this;
  for (auto& c : out.encoder_channels) c = std::max<int64_t>(1, c / divisor);
  for (auto& c : out.decoder_channels) c = std::max<int64_t>(1, c / divisor);
  // Keep the SE reduction valid for the narrowest gated level and leave that
  // level as many hidden units as it had before scaling (capped by its width),
  // so a thin SE bottleneck cannot start out as a single dead ReLU.
  const auto narrowest_of = [](const std::array<int64_t, 5>& plan) {
    return *std::min_element(plan.begin() + 1, plan.end());
  };
  const int64_t narrowest = narrowest_of(out.encoder_channels);
  const int64_t hidden = std::min(narrowest, std::max<int64_t>(1, narrowest_of(encoder_channels) / se_reduction));
  while (out.se_reduction > 1 && (narrowest % out.se_reduction != 0 || narrowest / out.se_reduction < hidden)) {
    out.se_reduction /= 2;
  }
  return out;
}

void SebConfig::validate() const {
  TORCH_CHECK(in_channels >= 1, "SEB needs at least one input channel");
  for (auto c : encoder_channels) TORCH_CHECK(c >= 1, "SEB encoder widths must be positive");
  for (auto c : decoder_channels) TORCH_CHECK(c >= 1, "SEB decoder widths must be positive");
  TORCH_CHECK(se_reduction >= 1, "SE reduction must be positive");
}

SebBackboneImpl::SebBackboneImpl(SebConfig config) : config_(config) {
  config_.validate();
  const auto& enc = config_.encoder_channels;
  const auto& dec = config_.decoder_channels;
  stem_ = register_module("stem", ConvBnRelu(config_.in_channels, enc[0]));
  for (size_t level = 0; level < 4; ++level) {
    const auto name = std::to_string(level + 1);
    levels_[level] = register_module("level" + name, DoubleConv(enc[level], enc[level + 1]));
    se_[level] = register_module("se" + name, SEBlock(enc[level + 1], config_.se_reduction));
  }
  // up_[k] produces decoder[k]; its skip is the encoder feature at skips[3 - k].
  int64_t below = enc[4];
  for (size_t k = 0; k < 4; ++k) {
    up_[k] = register_module("up" + std::to_string(k + 1), UpBlock(below, enc[3 - k], dec[k]));
    below = dec[k];
  }
  output_head_ = register_module("output_head",
                                 torch::nn::Conv2d(torch::nn::Conv2dOptions(dec[3], 1, 1)));
  sam = register_module("sam", Sam(1));
}

SebOutput SebBackboneImpl::forward(const torch::Tensor& image) {
  check_pyramid_input(image, config_.in_channels, "SEB");
  SebOutput out;
  torch::Tensor x = stem_->forward(image);
  out.skips[0] = x;
  for (size_t level = 0; level < 4; ++level) {
    x = se_[level]->forward(levels_[level]->forward(torch::max_pool2d(x, 2)));
    if (level < 3) out.skips[level + 1] = x;
  }
  out.bottom = x;
  for (size_t k = 0; k < 4; ++k) {
    x = up_[k]->forward(x, out.skips[3 - k]);
    out.decoder[k] = x;
  }
  out.s_output = output_head_->forward(x);
  out.gate = sam->forward(out.s_output);
  out.gated = gate_input(image, out.gate);
  return out;
}

}  // namespace mcfnet
