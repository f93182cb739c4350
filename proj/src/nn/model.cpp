#include "mcfnet/nn/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "mcfnet/nn/resize.hpp"

namespace mcfnet {

std::string to_string(ArchMode mode) {
  switch (mode) {
    case ArchMode::SebOnly:
      return "seb_only";
    case ArchMode::FcbOnly:
      return "fcb_only";
    case ArchMode::Cascade:
      return "cascade";
  }
  return "unknown";
}

ArchMode parse_arch_mode(std::string_view text) {
  if (text == "seb_only") return ArchMode::SebOnly;
  if (text == "fcb_only") return ArchMode::FcbOnly;
  if (text == "cascade") return ArchMode::Cascade;
  throw std::invalid_argument("unknown architecture mode '" + std::string(text) +
                              "' (expected seb_only, fcb_only or cascade)");
}

ModelConfig ModelConfig::scaled_down(int64_t divisor) const {
  TORCH_CHECK(divisor >= 1, "width divisor must be positive");
  ModelConfig out = *this;
  out.seb = seb.scaled_down(divisor);
  out.fcb = fcb.scaled_down(divisor);
  return out;
}

void ModelConfig::validate() const {
  TORCH_CHECK(num_classes >= 2, "need background plus at least one class, got ", num_classes);
  TORCH_CHECK(fcb_input_size >= 16 && fcb_input_size % 16 == 0, "FCB input size ",
              fcb_input_size, " must be a positive multiple of 16");
  TORCH_CHECK(head_kernel >= 1 && head_kernel % 2 == 1, "head kernel must be odd");
  seb.validate();
  fcb.validate();
  if (mode == ArchMode::Cascade) {
    TORCH_CHECK(seb.in_channels == fcb.in_channels, "SEB and FCB input channels differ");
  }
}

MCFNetImpl::MCFNetImpl(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const int64_t classes = config_.num_classes;
  if (config_.uses_seb()) {
    seb = register_module("seb", SebBackbone(config_.seb));
    for (size_t i = 0; i < 4; ++i) {
      seb_heads[i] = register_module("seb_head" + std::to_string(i + 1),
                                     ConvHead(config_.seb.decoder_channels[3 - i], classes,
                                              config_.head_kernel));
    }
  }
  if (config_.uses_fcb()) {
    const auto& enc = config_.fcb.encoder_channels;
    fcb = register_module("fcb", FcbBackbone(config_.fcb));
    for (size_t level = 0; level < 4; ++level) {
      lat[level] = register_module("lat" + std::to_string(level + 1), Lat(enc[level], config_.lat_heads));
    }
    cab = register_module("cab", Cab(config_.fcb.bottleneck_channels, enc, config_.cab_heads));
    for (size_t i = 0; i < 4; ++i) {
      fcb_heads[i] = register_module("fcb_head" + std::to_string(i + 1),
                                     ConvHead(config_.fcb.decoder_channels[3 - i], classes,
                                              config_.head_kernel));
    }
  }
  if (config_.mode == ArchMode::Cascade) {
    const auto& seb_enc = config_.seb.encoder_channels;
    for (size_t level = 0; level < 4; ++level) {
      skip_fusion[level] = register_module("skip_fusion" + std::to_string(level + 1),
                                           SebFusion(seb_enc[level], config_.fcb.encoder_channels[level]));
    }
    // The fourth SEB encoding level (1/8 scale) feeds the bridge.
    bottleneck_fusion = register_module("bottleneck_fusion",
                                        SebFusion(seb_enc[3], config_.fcb.bottleneck_channels));
  }
}

ModelTrace MCFNetImpl::forward_trace(const torch::Tensor& image) {
  TORCH_CHECK(image.dim() == 4, "model expects an NCHW image batch");
  const int64_t out_h = image.size(2);
  const int64_t out_w = image.size(3);
  ModelTrace trace;

  if (config_.uses_seb()) {
    trace.seb = seb->forward(image);
    for (size_t i = 0; i < 4; ++i) {
      trace.seb_preds[i] = seb_heads[i]->forward(trace.seb->decoder[3 - i]);
    }
  }

  if (config_.uses_fcb()) {
    const auto& source = config_.mode == ArchMode::Cascade ? trace.seb->gated : image;
    trace.fcb_input = bilinear_resize(source, config_.fcb_input_size, config_.fcb_input_size);
    trace.fcb = fcb->encode(trace.fcb_input);
    for (size_t level = 0; level < 4; ++level) {
      trace.lat_skips[level] = lat[level]->forward(trace.fcb->skips[level]);
      trace.fused_skips[level] = config_.mode == ArchMode::Cascade
                                     ? skip_fusion[level]->forward(trace.lat_skips[level],
                                                                   trace.seb->skips[level])
                                     : trace.lat_skips[level];
    }
    trace.cab_out = cab->forward(trace.fcb->bottleneck, trace.fcb->skips);
    trace.bridge = config_.mode == ArchMode::Cascade
                       ? bottleneck_fusion->forward(trace.cab_out, trace.seb->skips[3])
                       : trace.cab_out;
    trace.fcb_decoder = fcb->decode(trace.bridge, trace.fused_skips);
    for (size_t i = 0; i < 4; ++i) {
      trace.fcb_preds[i] = fcb_heads[i]->forward(trace.fcb_decoder[3 - i]);
    }
  }

  for (size_t i = 0; i < 4; ++i) {
    torch::Tensor p;
    switch (config_.mode) {
      case ArchMode::SebOnly:
        p = trace.seb_preds[i];
        break;
      case ArchMode::FcbOnly:
        p = trace.fcb_preds[i];
        break;
      case ArchMode::Cascade:
        p = pairwise_aggregate(trace.seb_preds[i], trace.fcb_preds[i]);
        break;
    }
    trace.output.heads[i] = bilinear_resize(p, out_h, out_w);
  }
  trace.output.pred = final_pred(trace.output.heads, config_.final_weights);
  return trace;
}

ModelOutput MCFNetImpl::forward(const torch::Tensor& image) { return forward_trace(image).output; }

}  // namespace mcfnet
