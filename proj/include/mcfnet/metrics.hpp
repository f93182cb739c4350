#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mcfnet {

// Binary mask on a (depth, height, width) grid; 2D masks use depth 1.
struct Mask {
  std::array<int64_t, 3> shape{1, 0, 0};
  std::vector<uint8_t> data;

  Mask() = default;
  Mask(int64_t depth, int64_t height, int64_t width);
  static Mask from_2d(int64_t height, int64_t width, std::vector<uint8_t> values);

  int64_t size() const { return shape[0] * shape[1] * shape[2]; }
  int64_t count() const;
  bool empty() const { return count() == 0; }
  uint8_t& at(int64_t z, int64_t y, int64_t x) { return data[(z * shape[1] + y) * shape[2] + x]; }
  uint8_t at(int64_t z, int64_t y, int64_t x) const {
    return data[(z * shape[1] + y) * shape[2] + x];
  }
};

struct Confusion {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
};

Confusion confusion(const Mask& pred, const Mask& gt);

// Percent overlap 100 * 2|A n B| / (|A| + |B|); 100 when both masks are empty.
double dsc(const Mask& pred, const Mask& gt);

// Percent recall and precision. An empty denominator yields 100 when the
// other mask is also empty, else 0.
std::pair<double, double> recall_precision(const Mask& pred, const Mask& gt);

// Voxels of the mask with at least one background neighbour along an axis of
// extent > 1 (4-neighbourhood in 2D, 6 in 3D). Outside the grid counts as
// background. A non-empty mask with no such voxel returns all its voxels.
std::vector<std::array<int64_t, 3>> boundary_voxels(const Mask& mask);

struct Hd95Result {
  double distance = 0;
  // True when exactly one mask was empty and the penalty was returned.
  bool penalized = false;
};

// 95th percentile (linear interpolation between order statistics) of the
// pooled nearest-boundary distances in both directions, in units of
// `spacing` (depth, height, width). Both empty -> 0. One empty -> the grid
// diagonal, flagged.
Hd95Result hd95(const Mask& pred, const Mask& gt, std::array<double, 3> spacing = {1, 1, 1});

// Linear-interpolation percentile, q in [0, 100]; sorts `values`.
double percentile(std::vector<double> values, double q);

struct CaseClassMetrics {
  std::string case_id;
  int label = 0;
  double dsc = 0;
  double hd95 = 0;
  double recall = 0;
  double precision = 0;
  bool hd95_penalized = false;

  bool operator==(const CaseClassMetrics&) const = default;
};

CaseClassMetrics evaluate_case_class(const std::string& case_id, int label, const Mask& pred,
                                     const Mask& gt, std::array<double, 3> spacing = {1, 1, 1});

struct MetricReport {
  int num_classes = 0;
  std::vector<CaseClassMetrics> rows;

  double mean_dsc() const;
  double mean_hd95() const;
  double mean_recall() const;
  double mean_precision() const;
  // Mean DSC of each foreground class, labels 1..num_classes-1.
  std::vector<double> class_dsc() const;

  // One CSV row per case and class, then a MEAN row: DSC mean, HD95 mean,
  // then the per-class DSC means.
  std::string to_text() const;

  bool operator==(const MetricReport&) const = default;
};

}  // namespace mcfnet
