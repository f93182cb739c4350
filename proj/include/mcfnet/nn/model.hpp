#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include <torch/torch.h>

#include "mcfnet/nn/cascade.hpp"
#include "mcfnet/nn/fcb.hpp"
#include "mcfnet/nn/heads.hpp"
#include "mcfnet/nn/seb.hpp"

namespace mcfnet {

enum class ArchMode { SebOnly, FcbOnly, Cascade };

std::string to_string(ArchMode mode);
ArchMode parse_arch_mode(std::string_view text);

struct ModelConfig {
  ArchMode mode = ArchMode::Cascade;
  int64_t num_classes = 2;
  // Grid of the FCB input; the gated (or raw) image is resized to it.
  int64_t fcb_input_size = 224;
  SebConfig seb;
  FcbConfig fcb;
  int64_t lat_heads = 4;
  int64_t cab_heads = 4;
  int64_t head_kernel = 1;
  FinalWeights final_weights;

  // Divides every channel plan by `divisor`, shrinking the SE reduction if
  // the narrowest SE level would otherwise be too small.
  ModelConfig scaled_down(int64_t divisor) const;
  void validate() const;

  bool uses_seb() const { return mode != ArchMode::FcbOnly; }
  bool uses_fcb() const { return mode != ArchMode::SebOnly; }
};

struct ModelOutput {
  // p1..p4 (shallowest to deepest head) at the input resolution.
  std::array<torch::Tensor, 4> heads;
  torch::Tensor pred;
};

// Every intermediate of one forward pass; members for inactive branches stay
// undefined.
struct ModelTrace {
  std::optional<SebOutput> seb;
  torch::Tensor fcb_input;
  std::optional<FcbEncodeOutput> fcb;
  std::array<torch::Tensor, 4> lat_skips;
  std::array<torch::Tensor, 4> fused_skips;
  torch::Tensor cab_out;
  torch::Tensor bridge;
  std::array<torch::Tensor, 4> fcb_decoder;
  std::array<torch::Tensor, 4> seb_preds;
  std::array<torch::Tensor, 4> fcb_preds;
  ModelOutput output;
};

class MCFNetImpl : public torch::nn::Module {
 public:
  explicit MCFNetImpl(ModelConfig config);

  ModelOutput forward(const torch::Tensor& image);
  ModelTrace forward_trace(const torch::Tensor& image);

  const ModelConfig& config() const { return config_; }

  SebBackbone seb{nullptr};
  FcbBackbone fcb{nullptr};
  std::array<Lat, 4> lat{nullptr, nullptr, nullptr, nullptr};
  Cab cab{nullptr};
  std::array<SebFusion, 4> skip_fusion{nullptr, nullptr, nullptr, nullptr};
  SebFusion bottleneck_fusion{nullptr};
  std::array<ConvHead, 4> seb_heads{nullptr, nullptr, nullptr, nullptr};
  std::array<ConvHead, 4> fcb_heads{nullptr, nullptr, nullptr, nullptr};

 private:
  ModelConfig config_;
};
TORCH_MODULE(MCFNet);

}  // namespace mcfnet
