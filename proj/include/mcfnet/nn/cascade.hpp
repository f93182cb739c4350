#pragma once

#include <array>

#include <torch/torch.h>

namespace mcfnet {

// Parallel channel/spatial attention over a token sequence (N, L, C).
//
// Both branches share one qkv projection and are split into heads:
//   channel branch: cross-covariance attention between channel tokens. q and
//     k are L2-normalised over the token axis, the (d x d) map is scaled by a
//     learned per-head temperature and softmaxed, then applied to v.
//   spatial branch: kernelised linear attention with phi(x) = elu(x) + 1,
//     i.e. phi(q) (phi(k)^T v) / (phi(q) . sum_l phi(k_l)).
// The branch outputs are summed and passed through an output projection.
// Every product is O(L d^2), so cost is linear in the token count.
class SccaAttentionImpl : public torch::nn::Module {
 public:
  SccaAttentionImpl(int64_t channels, int64_t heads);

  torch::Tensor forward(const torch::Tensor& tokens);

  // Multiply-add FLOPs of the matrix products in the most recent forward.
  int64_t last_flops() const { return last_flops_; }

  torch::nn::Linear qkv{nullptr};
  torch::nn::Linear proj{nullptr};
  torch::Tensor temperature;

 private:
  int64_t channels_;
  int64_t heads_;
  int64_t last_flops_ = 0;
};
TORCH_MODULE(SccaAttention);

// Linear attention transformer block applied to one skip feature:
// down-projection -> LayerNorm -> parallel attention -> LayerNorm ->
// up-projection, with a residual from the input. Shape preserving.
class LatImpl : public torch::nn::Module {
 public:
  LatImpl(int64_t channels, int64_t heads);

  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Linear down{nullptr};
  torch::nn::LayerNorm norm_in{nullptr};
  SccaAttention attention{nullptr};
  torch::nn::LayerNorm norm_out{nullptr};
  torch::nn::Linear up{nullptr};

 private:
  int64_t channels_;
};
TORCH_MODULE(Lat);

// Cross-attention bridge at the bottleneck. Bottleneck tokens are queries;
// keys and values are the four encoder skips average-pooled to the
// bottleneck grid and linearly projected to its width. Residual output.
class CabImpl : public torch::nn::Module {
 public:
  CabImpl(int64_t channels, std::array<int64_t, 4> skip_channels, int64_t heads);

  torch::Tensor forward(const torch::Tensor& bottleneck, const std::array<torch::Tensor, 4>& skips);

  std::array<torch::nn::Linear, 4> skip_proj{nullptr, nullptr, nullptr, nullptr};
  torch::nn::LayerNorm norm_q{nullptr};
  torch::nn::LayerNorm norm_kv{nullptr};
  torch::nn::Linear query{nullptr};
  torch::nn::Linear key{nullptr};
  torch::nn::Linear value{nullptr};
  torch::nn::Linear out_proj{nullptr};

 private:
  int64_t channels_;
  int64_t heads_;
  std::array<int64_t, 4> skip_channels_;
};
TORCH_MODULE(Cab);

// Adds an SEB feature to the FCB feature of the same pyramid level: the SEB
// map is bilinearly resized to the FCB grid and 1x1-projected to its width.
// Used for each skip level and for the bottleneck.
class SebFusionImpl : public torch::nn::Module {
 public:
  SebFusionImpl(int64_t seb_channels, int64_t fcb_channels);

  torch::Tensor forward(const torch::Tensor& fcb_feature, const torch::Tensor& seb_feature);

  torch::nn::Conv2d proj{nullptr};

 private:
  int64_t seb_channels_;
  int64_t fcb_channels_;
};
TORCH_MODULE(SebFusion);

}  // namespace mcfnet
