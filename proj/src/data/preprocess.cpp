#include "mcfnet/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcfnet/metrics.hpp"
#include "mcfnet/nn/resize.hpp"

namespace mcfnet::data {

std::vector<float> normalize_slice(std::span<const float> values, Modality modality,
                                   const NormalizationConfig& config) {
  std::vector<float> out(values.begin(), values.end());
  if (out.empty()) return out;
  double lo = 0;
  double hi = 0;
  if (modality == Modality::CT) {
    lo = config.ct_level - config.ct_width / 2;
    hi = config.ct_level + config.ct_width / 2;
  } else {
    std::vector<double> sorted(values.begin(), values.end());
    lo = percentile(sorted, config.low_percentile);
    hi = percentile(std::move(sorted), config.high_percentile);
  }
  float min_v = INFINITY;
  float max_v = -INFINITY;
  for (auto& v : out) {
    v = static_cast<float>(std::clamp<double>(v, lo, hi));
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
  }
  const float range = max_v - min_v;
  for (auto& v : out) v = range > 0 ? std::clamp((v - min_v) / range, 0.0f, 1.0f) : 0.0f;
  return out;
}

std::vector<SliceSample> slice_and_normalize(const Volume& image, const Volume& labels,
                                             const NormalizationConfig& config,
                                             const std::string& case_id) {
  if (!image.same_grid(labels)) throw std::invalid_argument("image and label volumes differ in shape");
  if (config.target_size < 1) throw std::invalid_argument("target size must be positive");
  std::vector<SliceSample> samples;
  const int64_t h = image.height;
  const int64_t w = image.width;
  for (int64_t z = 0; z < image.depth; ++z) {
    const auto label_slice = labels.slice(z);
    const bool has_foreground =
        std::any_of(label_slice.begin(), label_slice.end(), [](float v) { return v != 0.0f; });
    if (config.foreground_only && !has_foreground) continue;

    auto normalized = normalize_slice(image.slice(z), image.modality, config);
    auto img = torch::from_blob(normalized.data(), {h, w}, torch::kFloat).clone();
    std::vector<uint8_t> label_bytes(label_slice.size());
    for (size_t i = 0; i < label_slice.size(); ++i) {
      const float v = label_slice[i];
      if (v < 0 || v > 255 || v != std::floor(v)) throw std::invalid_argument("labels must be integers in [0, 255]");
      label_bytes[i] = static_cast<uint8_t>(v);
    }
    auto mask = torch::from_blob(label_bytes.data(), {h, w}, torch::kUInt8).clone();

    SliceSample sample;
    sample.case_id = case_id;
    sample.slice_index = z;
    sample.image = bilinear_resize(img, config.target_size, config.target_size).clamp(0.0, 1.0).contiguous();
    sample.mask = nearest_resize(mask, config.target_size, config.target_size).contiguous();
    samples.push_back(std::move(sample));
  }
  return samples;
}

}  // namespace mcfnet::data
