#pragma once

#include <torch/torch.h>

namespace mcfnet {

// 3x3 conv -> BatchNorm -> ReLU.
class ConvBnReluImpl : public torch::nn::Module {
 public:
  ConvBnReluImpl(int64_t in_channels, int64_t out_channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv_{nullptr};
  torch::nn::BatchNorm2d bn_{nullptr};
};
TORCH_MODULE(ConvBnRelu);

class DoubleConvImpl : public torch::nn::Module {
 public:
  DoubleConvImpl(int64_t in_channels, int64_t out_channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  ConvBnRelu first_{nullptr};
  ConvBnRelu second_{nullptr};
};
TORCH_MODULE(DoubleConv);

// Decoder stage: bilinear upsample to the skip's size, concatenate along
// channels, then a double 3x3 conv.
class UpBlockImpl : public torch::nn::Module {
 public:
  UpBlockImpl(int64_t in_channels, int64_t skip_channels, int64_t out_channels);
  torch::Tensor forward(const torch::Tensor& below, const torch::Tensor& skip);

  int64_t skip_channels() const { return skip_channels_; }

 private:
  int64_t in_channels_;
  int64_t skip_channels_;
  DoubleConv conv_{nullptr};
};
TORCH_MODULE(UpBlock);

// Spatial size must be divisible by 16 (four 2x poolings).
void check_pyramid_input(const torch::Tensor& image, int64_t expected_channels, const char* who);

}  // namespace mcfnet
