#include "mcfnet/data/synth.hpp"

#include <cstdio>
#include <random>
#include <stdexcept>

namespace mcfnet::data {
namespace {

struct Box {
  int64_t y0, x0, y1, x1;  // inclusive-exclusive

  bool overlaps(const Box& o, int64_t margin) const {
    return y0 < o.y1 + margin && o.y0 < y1 + margin && x0 < o.x1 + margin && o.x0 < x1 + margin;
  }
};

constexpr int64_t kMargin = 2;
constexpr int kPlacementAttempts = 2000;

}  // namespace

float synth_intensity(int64_t label, int64_t classes) {
  if (label == 0) return 0.0f;
  return 0.25f + 0.75f * static_cast<float>(label) / static_cast<float>(classes - 1);
}

std::vector<SliceSample> synth_dataset(int64_t n_cases, int64_t classes, int64_t image_size,
                                       uint64_t seed) {
  if (n_cases < 1) throw std::invalid_argument("need at least one synthetic case");
  if (classes < 2) throw std::invalid_argument("need background plus at least one shape class");
  if (classes > 255) throw std::invalid_argument("too many classes for uint8 masks");
  const int64_t shapes = classes - 1;
  const int64_t min_side = std::max<int64_t>(4, image_size / 8);
  const int64_t max_side = std::max<int64_t>(min_side, image_size / 4);
  const int64_t footprint = (min_side + kMargin) * (min_side + kMargin);
  if (image_size < min_side + 2 || shapes * footprint * 2 > image_size * image_size) {
    throw std::invalid_argument("image of size " + std::to_string(image_size) + " is too small for " +
                                std::to_string(shapes) + " shapes");
  }

  std::mt19937_64 rng(seed);
  std::vector<SliceSample> samples;
  for (int64_t c = 0; c < n_cases; ++c) {
    std::vector<Box> boxes;
    for (int64_t s = 0; s < shapes; ++s) {
      std::uniform_int_distribution<int64_t> side(min_side, max_side);
      bool placed = false;
      for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
        const int64_t h = side(rng);
        const int64_t w = side(rng);
        std::uniform_int_distribution<int64_t> ry(1, image_size - h - 1);
        std::uniform_int_distribution<int64_t> rx(1, image_size - w - 1);
        Box box{ry(rng), rx(rng), 0, 0};
        box.y1 = box.y0 + h;
        box.x1 = box.x0 + w;
        bool clear = true;
        for (const auto& other : boxes) clear = clear && !box.overlaps(other, kMargin);
        if (clear) {
          boxes.push_back(box);
          placed = true;
        }
      }
      if (!placed) {
        throw std::invalid_argument("could not place " + std::to_string(shapes) +
                                    " non-overlapping shapes in a " + std::to_string(image_size) +
                                    " image");
      }
    }

    auto image = torch::zeros({image_size, image_size}, torch::kFloat);
    auto mask = torch::zeros({image_size, image_size}, torch::kUInt8);
    auto img = image.accessor<float, 2>();
    auto lab = mask.accessor<uint8_t, 2>();
    std::bernoulli_distribution ellipse(0.5);
    for (int64_t s = 0; s < shapes; ++s) {
      const auto& b = boxes[s];
      const bool round = ellipse(rng);
      const double cy = (b.y0 + b.y1 - 1) / 2.0;
      const double cx = (b.x0 + b.x1 - 1) / 2.0;
      const double ry = (b.y1 - b.y0) / 2.0;
      const double rx = (b.x1 - b.x0) / 2.0;
      const auto label = static_cast<uint8_t>(s + 1);
      const float level = synth_intensity(s + 1, classes);
      for (int64_t y = b.y0; y < b.y1; ++y) {
        for (int64_t x = b.x0; x < b.x1; ++x) {
          if (round) {
            const double dy = (y - cy) / ry;
            const double dx = (x - cx) / rx;
            if (dy * dy + dx * dx > 1.0) continue;
          }
          img[y][x] = level;
          lab[y][x] = label;
        }
      }
    }
    char id[32];
    std::snprintf(id, sizeof(id), "synth_%03lld", static_cast<long long>(c));
    samples.push_back({id, 0, image, mask});
  }
  return samples;
}

}  // namespace mcfnet::data
