#include "mcfnet/nn/cascade.hpp"

#include <cmath>
#include <string>

#include "mcfnet/nn/resize.hpp"

namespace mcfnet {
namespace {

constexpr double kLinearAttentionEps = 1e-6;

torch::Tensor to_tokens(const torch::Tensor& x) { return x.flatten(2).transpose(1, 2); }

torch::Tensor from_tokens(const torch::Tensor& t, int64_t height, int64_t width) {
  return t.transpose(1, 2).reshape({t.size(0), t.size(2), height, width});
}

// (N, L, C) -> (N, heads, L, C / heads)
torch::Tensor split_heads(const torch::Tensor& t, int64_t heads) {
  return t.view({t.size(0), t.size(1), heads, t.size(2) / heads}).transpose(1, 2);
}

torch::Tensor merge_heads(const torch::Tensor& t) {
  return t.transpose(1, 2).reshape({t.size(0), t.size(2), t.size(1) * t.size(3)});
}

}  // namespace

SccaAttentionImpl::SccaAttentionImpl(int64_t channels, int64_t heads)
    : channels_(channels), heads_(heads) {
  TORCH_CHECK(heads >= 1 && channels % heads == 0, "attention width ", channels,
              " not divisible by ", heads, " heads");
  qkv = register_module("qkv", torch::nn::Linear(channels, 3 * channels));
  proj = register_module("proj", torch::nn::Linear(channels, channels));
  temperature = register_parameter("temperature", torch::ones({heads, 1, 1}));
}

torch::Tensor SccaAttentionImpl::forward(const torch::Tensor& tokens) {
  TORCH_CHECK(tokens.dim() == 3 && tokens.size(2) == channels_, "attention expects (N, L, ",
              channels_, ") tokens");
  const int64_t batch = tokens.size(0);
  const int64_t length = tokens.size(1);
  const int64_t d = channels_ / heads_;

  auto parts = qkv->forward(tokens).chunk(3, -1);
  auto q = split_heads(parts[0], heads_);
  auto k = split_heads(parts[1], heads_);
  auto v = split_heads(parts[2], heads_);

  // Channel branch: (d x d) attention between channel tokens.
  namespace F = torch::nn::functional;
  auto qn = F::normalize(q, F::NormalizeFuncOptions().dim(2));
  auto kn = F::normalize(k, F::NormalizeFuncOptions().dim(2));
  auto channel_map = torch::softmax(torch::matmul(qn.transpose(-2, -1), kn) * temperature, -1);
  auto channel_out = torch::matmul(v, channel_map.transpose(-2, -1));

  // Spatial branch: kernelised linear attention over the L tokens.
  auto fq = torch::elu(q) + 1;
  auto fk = torch::elu(k) + 1;
  auto kv = torch::matmul(fk.transpose(-2, -1), v);
  auto normaliser = torch::matmul(fq, fk.sum(2).unsqueeze(-1)) + kLinearAttentionEps;
  auto spatial_out = torch::matmul(fq, kv) / normaliser;

  const int64_t per_head = 2 * length * d * d;  // one (L x d) by (d x d) product
  last_flops_ = batch * heads_ * (4 * per_head + 2 * length * d);

  return proj->forward(merge_heads(channel_out + spatial_out));
}

LatImpl::LatImpl(int64_t channels, int64_t heads) : channels_(channels) {
  down = register_module("down", torch::nn::Linear(channels, channels));
  norm_in = register_module("norm_in", torch::nn::LayerNorm(torch::nn::LayerNormOptions({channels})));
  attention = register_module("attention", SccaAttention(channels, heads));
  norm_out = register_module("norm_out", torch::nn::LayerNorm(torch::nn::LayerNormOptions({channels})));
  up = register_module("up", torch::nn::Linear(channels, channels));
}

torch::Tensor LatImpl::forward(const torch::Tensor& x) {
  TORCH_CHECK(x.dim() == 4 && x.size(1) == channels_, "LAT expects ", channels_,
              " channel NCHW input");
  auto t = to_tokens(x);
  auto y = up->forward(norm_out->forward(attention->forward(norm_in->forward(down->forward(t)))));
  return x + from_tokens(y, x.size(2), x.size(3));
}

CabImpl::CabImpl(int64_t channels, std::array<int64_t, 4> skip_channels, int64_t heads)
    : channels_(channels), heads_(heads), skip_channels_(skip_channels) {
  TORCH_CHECK(heads >= 1 && channels % heads == 0, "CAB width ", channels,
              " not divisible by ", heads, " heads");
  for (size_t level = 0; level < 4; ++level) {
    skip_proj[level] = register_module("skip_proj" + std::to_string(level + 1),
                                       torch::nn::Linear(skip_channels[level], channels));
  }
  norm_q = register_module("norm_q", torch::nn::LayerNorm(torch::nn::LayerNormOptions({channels})));
  norm_kv = register_module("norm_kv", torch::nn::LayerNorm(torch::nn::LayerNormOptions({channels})));
  query = register_module("query", torch::nn::Linear(channels, channels));
  key = register_module("key", torch::nn::Linear(channels, channels));
  value = register_module("value", torch::nn::Linear(channels, channels));
  out_proj = register_module("out_proj", torch::nn::Linear(channels, channels));
}

torch::Tensor CabImpl::forward(const torch::Tensor& bottleneck,
                               const std::array<torch::Tensor, 4>& skips) {
  TORCH_CHECK(bottleneck.dim() == 4 && bottleneck.size(1) == channels_, "CAB expects a ",
              channels_, " channel bottleneck");
  const int64_t height = bottleneck.size(2);
  const int64_t width = bottleneck.size(3);
  std::vector<torch::Tensor> memory;
  for (size_t level = 0; level < 4; ++level) {
    const auto& skip = skips[level];
    TORCH_CHECK(skip.dim() == 4 && skip.size(0) == bottleneck.size(0), "CAB batch mismatch: skip ",
                level + 1, " has batch ", skip.size(0), ", bottleneck ", bottleneck.size(0));
    TORCH_CHECK(skip.size(1) == skip_channels_[level], "CAB skip ", level + 1, " has ",
                skip.size(1), " channels, expected ", skip_channels_[level]);
    auto pooled = torch::adaptive_avg_pool2d(skip, {height, width});
    memory.push_back(skip_proj[level]->forward(to_tokens(pooled)));
  }
  auto q_tokens = norm_q->forward(to_tokens(bottleneck));
  auto kv_tokens = norm_kv->forward(torch::cat(memory, 1));

  auto q = split_heads(query->forward(q_tokens), heads_);
  auto k = split_heads(key->forward(kv_tokens), heads_);
  auto v = split_heads(value->forward(kv_tokens), heads_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels_ / heads_));
  auto attn = torch::softmax(torch::matmul(q, k.transpose(-2, -1)) * scale, -1);
  auto y = out_proj->forward(merge_heads(torch::matmul(attn, v)));
  return bottleneck + from_tokens(y, height, width);
}

SebFusionImpl::SebFusionImpl(int64_t seb_channels, int64_t fcb_channels)
    : seb_channels_(seb_channels), fcb_channels_(fcb_channels) {
  proj = register_module("proj",
                         torch::nn::Conv2d(torch::nn::Conv2dOptions(seb_channels, fcb_channels, 1)));
}

torch::Tensor SebFusionImpl::forward(const torch::Tensor& fcb_feature,
                                     const torch::Tensor& seb_feature) {
  TORCH_CHECK(fcb_feature.dim() == 4 && seb_feature.dim() == 4, "fusion expects NCHW tensors");
  TORCH_CHECK(fcb_feature.size(0) == seb_feature.size(0), "fusion batch mismatch: FCB ",
              fcb_feature.size(0), " vs SEB ", seb_feature.size(0));
  TORCH_CHECK(seb_feature.size(1) == seb_channels_ && fcb_feature.size(1) == fcb_channels_,
              "fusion level mismatch: got SEB/FCB widths ", seb_feature.size(1), "/",
              fcb_feature.size(1), ", expected ", seb_channels_, "/", fcb_channels_);
  auto resized = bilinear_resize(seb_feature, fcb_feature.size(2), fcb_feature.size(3));
  return fcb_feature + proj->forward(resized);
}

}  // namespace mcfnet
