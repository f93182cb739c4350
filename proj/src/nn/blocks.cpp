#include "mcfnet/nn/blocks.hpp"

#include "mcfnet/nn/resize.hpp"

namespace mcfnet {

ConvBnReluImpl::ConvBnReluImpl(int64_t in_channels, int64_t out_channels) {
  conv_ = register_module(
      "conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, out_channels, 3).padding(1)));
  bn_ = register_module("bn", torch::nn::BatchNorm2d(out_channels));
}

torch::Tensor ConvBnReluImpl::forward(const torch::Tensor& x) {
  return torch::relu(bn_->forward(conv_->forward(x)));
}

DoubleConvImpl::DoubleConvImpl(int64_t in_channels, int64_t out_channels) {
  first_ = register_module("first", ConvBnRelu(in_channels, out_channels));
  second_ = register_module("second", ConvBnRelu(out_channels, out_channels));
}

torch::Tensor DoubleConvImpl::forward(const torch::Tensor& x) {
  return second_->forward(first_->forward(x));
}

UpBlockImpl::UpBlockImpl(int64_t in_channels, int64_t skip_channels, int64_t out_channels)
    : in_channels_(in_channels), skip_channels_(skip_channels) {
  conv_ = register_module("conv", DoubleConv(in_channels + skip_channels, out_channels));
}

torch::Tensor UpBlockImpl::forward(const torch::Tensor& below, const torch::Tensor& skip) {
  TORCH_CHECK(below.dim() == 4 && skip.dim() == 4, "decoder stage expects NCHW tensors");
  TORCH_CHECK(below.size(0) == skip.size(0), "decoder stage batch mismatch: ", below.size(0),
              " vs ", skip.size(0));
  TORCH_CHECK(below.size(1) == in_channels_, "decoder stage expected ", in_channels_,
              " input channels, got ", below.size(1));
  TORCH_CHECK(skip.size(1) == skip_channels_, "skip feature has ", skip.size(1),
              " channels, decoder stage expects ", skip_channels_);
  TORCH_CHECK(skip.size(2) == 2 * below.size(2) && skip.size(3) == 2 * below.size(3),
              "skip feature at ", skip.size(2), "x", skip.size(3),
              " does not sit one scale above ", below.size(2), "x", below.size(3));
  auto up = bilinear_resize(below, skip.size(2), skip.size(3));
  return conv_->forward(torch::cat({up, skip}, 1));
}

void check_pyramid_input(const torch::Tensor& image, int64_t expected_channels, const char* who) {
  TORCH_CHECK(image.dim() == 4, who, " expects an NCHW batch, got ", image.dim(), "D");
  TORCH_CHECK(image.size(1) == expected_channels, who, " expects ", expected_channels,
              " input channels, got ", image.size(1));
  TORCH_CHECK(image.size(2) % 16 == 0 && image.size(3) % 16 == 0 && image.size(2) > 0 &&
                  image.size(3) > 0,
              who, " input size ", image.size(2), "x", image.size(3), " is not divisible by 16");
}

}  // namespace mcfnet
