#pragma once

#include <array>

#include <torch/torch.h>

namespace mcfnet {

// Per-scale prediction head: Conv(C_i -> N, K) on a decoder feature.
class ConvHeadImpl : public torch::nn::Module {
 public:
  ConvHeadImpl(int64_t in_channels, int64_t num_classes, int64_t kernel_size = 1);

  torch::Tensor forward(const torch::Tensor& features);

  torch::nn::Conv2d conv{nullptr};

 private:
  int64_t in_channels_;
};
TORCH_MODULE(ConvHead);

// Resizes the SEB map to the FCB map's grid and adds them.
torch::Tensor pairwise_aggregate(const torch::Tensor& seb_pred, const torch::Tensor& fcb_pred);

struct FinalWeights {
  double u = 1.0;
  double v = 1.0;
  double w = 1.0;
  double x = 1.0;

  std::array<double, 4> as_array() const { return {u, v, w, x}; }
};

// Pred = u p1 + v p2 + w p3 + x p4 over maps of identical shape.
torch::Tensor final_pred(const std::array<torch::Tensor, 4>& maps, const FinalWeights& weights = {});

}  // namespace mcfnet
