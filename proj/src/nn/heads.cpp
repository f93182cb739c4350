#include "mcfnet/nn/heads.hpp"

#include <cmath>

#include "mcfnet/nn/resize.hpp"

namespace mcfnet {

ConvHeadImpl::ConvHeadImpl(int64_t in_channels, int64_t num_classes, int64_t kernel_size)
    : in_channels_(in_channels) {
  TORCH_CHECK(num_classes >= 1, "head needs at least one class");
  TORCH_CHECK(kernel_size >= 1 && kernel_size % 2 == 1, "head kernel size must be odd, got ",
              kernel_size);
  conv = register_module(
      "conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, num_classes, kernel_size)
                                    .padding(kernel_size / 2)));
}

torch::Tensor ConvHeadImpl::forward(const torch::Tensor& features) {
  TORCH_CHECK(features.dim() == 4 && features.size(1) == in_channels_, "head expects ",
              in_channels_, " input channels, got ", features.dim() == 4 ? features.size(1) : -1);
  return conv->forward(features);
}

torch::Tensor pairwise_aggregate(const torch::Tensor& seb_pred, const torch::Tensor& fcb_pred) {
  TORCH_CHECK(seb_pred.dim() == 4 && fcb_pred.dim() == 4, "prediction maps must be NCHW");
  TORCH_CHECK(seb_pred.size(0) == fcb_pred.size(0), "prediction batch mismatch: ",
              seb_pred.size(0), " vs ", fcb_pred.size(0));
  TORCH_CHECK(seb_pred.size(1) == fcb_pred.size(1), "class count mismatch: SEB ",
              seb_pred.size(1), " vs FCB ", fcb_pred.size(1));
  return bilinear_resize(seb_pred, fcb_pred.size(2), fcb_pred.size(3)) + fcb_pred;
}

torch::Tensor final_pred(const std::array<torch::Tensor, 4>& maps, const FinalWeights& weights) {
  const auto coeff = weights.as_array();
  for (size_t i = 0; i < 4; ++i) {
    TORCH_CHECK(std::isfinite(coeff[i]), "final weights must be finite");
    TORCH_CHECK(maps[i].sizes() == maps[0].sizes(), "prediction map ", i + 1, " has shape ",
                maps[i].sizes(), ", expected ", maps[0].sizes());
  }
  auto pred = maps[0] * coeff[0];
  for (size_t i = 1; i < 4; ++i) pred = pred + maps[i] * coeff[i];
  return pred;
}

}  // namespace mcfnet
