#include "mcfnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mcfnet {
namespace {

void require_same_shape(const Mask& a, const Mask& b) {
  if (a.shape != b.shape) throw std::invalid_argument("mask shapes differ");
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Squared distance transform along one line (lower envelope of parabolas),
// with a per-step physical spacing.
void edt_line(std::vector<double>& f, double spacing, std::vector<double>& scratch_d,
              std::vector<int64_t>& v, std::vector<double>& z) {
  const int64_t n = static_cast<int64_t>(f.size());
  const double s2 = spacing * spacing;
  auto intersect = [&](int64_t q, int64_t p) {
    return ((f[q] + s2 * q * q) - (f[p] + s2 * p * p)) / (2 * s2 * (q - p));
  };
  int64_t k = -1;
  for (int64_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      if (k < 0) break;
      s = intersect(q, v[k]);
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) return;  // no sites on this line
  int64_t j = 0;
  for (int64_t q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = static_cast<double>(q - v[j]);
    scratch_d[q] = s2 * d * d + f[v[j]];
  }
  for (int64_t q = 0; q < n; ++q) f[q] = scratch_d[q];
}

// Squared Euclidean distance from every voxel to the nearest site.
std::vector<double> squared_distance_to(const std::array<int64_t, 3>& shape,
                                        const std::vector<std::array<int64_t, 3>>& sites,
                                        const std::array<double, 3>& spacing) {
  const int64_t D = shape[0], H = shape[1], W = shape[2];
  std::vector<double> grid(static_cast<size_t>(D * H * W), kInf);
  for (const auto& p : sites) grid[(p[0] * H + p[1]) * W + p[2]] = 0;

  const int64_t longest = std::max({D, H, W});
  std::vector<double> line(longest), scratch(longest), z(longest + 1);
  std::vector<int64_t> v(longest);
  auto pass = [&](int64_t extent, int64_t stride, int64_t count, auto base_of, double step) {
    line.resize(extent);
    scratch.resize(extent);
    for (int64_t c = 0; c < count; ++c) {
      const int64_t base = base_of(c);
      for (int64_t i = 0; i < extent; ++i) line[i] = grid[base + i * stride];
      edt_line(line, step, scratch, v, z);
      for (int64_t i = 0; i < extent; ++i) grid[base + i * stride] = line[i];
    }
  };
  pass(W, 1, D * H, [&](int64_t c) { return c * W; }, spacing[2]);
  pass(H, W, D * W, [&](int64_t c) { return (c / W) * H * W + c % W; }, spacing[1]);
  pass(D, H * W, H * W, [&](int64_t c) { return c; }, spacing[0]);
  return grid;
}

double mean_of(const std::vector<CaseClassMetrics>& rows, double CaseClassMetrics::*field) {
  if (rows.empty()) return 0;
  double sum = 0;
  for (const auto& r : rows) sum += r.*field;
  return sum / static_cast<double>(rows.size());
}

}  // namespace

Mask::Mask(int64_t depth, int64_t height, int64_t width)
    : shape{depth, height, width}, data(static_cast<size_t>(depth * height * width), 0) {
  if (depth < 1 || height < 1 || width < 1) throw std::invalid_argument("mask extents must be positive");
}

Mask Mask::from_2d(int64_t height, int64_t width, std::vector<uint8_t> values) {
  if (static_cast<int64_t>(values.size()) != height * width) {
    throw std::invalid_argument("mask value count does not match its shape");
  }
  Mask m(1, height, width);
  for (auto& v : values) v = v ? 1 : 0;
  m.data = std::move(values);
  return m;
}

int64_t Mask::count() const {
  return std::count_if(data.begin(), data.end(), [](uint8_t v) { return v != 0; });
}

Confusion confusion(const Mask& pred, const Mask& gt) {
  require_same_shape(pred, gt);
  Confusion c;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    const bool p = pred.data[i] != 0;
    const bool g = gt.data[i] != 0;
    c.tp += p && g;
    c.fp += p && !g;
    c.fn += !p && g;
  }
  return c;
}

double dsc(const Mask& pred, const Mask& gt) {
  const auto c = confusion(pred, gt);
  const int64_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 100.0;
  return 100.0 * 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

std::pair<double, double> recall_precision(const Mask& pred, const Mask& gt) {
  const auto c = confusion(pred, gt);
  auto ratio = [](int64_t num, int64_t denom, bool other_empty) {
    if (denom == 0) return other_empty ? 100.0 : 0.0;
    return 100.0 * static_cast<double>(num) / static_cast<double>(denom);
  };
  const bool pred_empty = c.tp + c.fp == 0;
  const bool gt_empty = c.tp + c.fn == 0;
  return {ratio(c.tp, c.tp + c.fn, pred_empty), ratio(c.tp, c.tp + c.fp, gt_empty)};
}

std::vector<std::array<int64_t, 3>> boundary_voxels(const Mask& mask) {
  const int64_t D = mask.shape[0], H = mask.shape[1], W = mask.shape[2];
  const std::array<int64_t, 3> extent{D, H, W};
  std::vector<std::array<int64_t, 3>> out;
  std::vector<std::array<int64_t, 3>> all;
  for (int64_t z = 0; z < D; ++z) {
    for (int64_t y = 0; y < H; ++y) {
      for (int64_t x = 0; x < W; ++x) {
        if (!mask.at(z, y, x)) continue;
        all.push_back({z, y, x});
        bool edge = false;
        const std::array<int64_t, 3> p{z, y, x};
        for (int axis = 0; axis < 3 && !edge; ++axis) {
          if (extent[axis] == 1) continue;
          for (int step : {-1, 1}) {
            auto q = p;
            q[axis] += step;
            if (q[axis] < 0 || q[axis] >= extent[axis] || !mask.at(q[0], q[1], q[2])) {
              edge = true;
              break;
            }
          }
        }
        if (edge) out.push_back(p);
      }
    }
  }
  return out.empty() ? all : out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

Hd95Result hd95(const Mask& pred, const Mask& gt, std::array<double, 3> spacing) {
  require_same_shape(pred, gt);
  const bool pred_empty = pred.empty();
  const bool gt_empty = gt.empty();
  if (pred_empty && gt_empty) return {0.0, false};
  if (pred_empty || gt_empty) {
    double diag2 = 0;
    for (int axis = 0; axis < 3; ++axis) {
      const double len = static_cast<double>(pred.shape[axis]) * spacing[axis];
      diag2 += len * len;
    }
    return {std::sqrt(diag2), true};
  }
  const auto pred_edge = boundary_voxels(pred);
  const auto gt_edge = boundary_voxels(gt);
  const auto to_gt = squared_distance_to(gt.shape, gt_edge, spacing);
  const auto to_pred = squared_distance_to(pred.shape, pred_edge, spacing);
  const int64_t H = pred.shape[1], W = pred.shape[2];

  std::vector<double> distances;
  distances.reserve(pred_edge.size() + gt_edge.size());
  for (const auto& p : pred_edge) distances.push_back(std::sqrt(to_gt[(p[0] * H + p[1]) * W + p[2]]));
  for (const auto& p : gt_edge) distances.push_back(std::sqrt(to_pred[(p[0] * H + p[1]) * W + p[2]]));
  return {percentile(std::move(distances), 95.0), false};
}

CaseClassMetrics evaluate_case_class(const std::string& case_id, int label, const Mask& pred,
                                     const Mask& gt, std::array<double, 3> spacing) {
  CaseClassMetrics m;
  m.case_id = case_id;
  m.label = label;
  m.dsc = dsc(pred, gt);
  const auto hd = hd95(pred, gt, spacing);
  m.hd95 = hd.distance;
  m.hd95_penalized = hd.penalized;
  std::tie(m.recall, m.precision) = recall_precision(pred, gt);
  return m;
}

double MetricReport::mean_dsc() const { return mean_of(rows, &CaseClassMetrics::dsc); }
double MetricReport::mean_hd95() const { return mean_of(rows, &CaseClassMetrics::hd95); }
double MetricReport::mean_recall() const { return mean_of(rows, &CaseClassMetrics::recall); }
double MetricReport::mean_precision() const { return mean_of(rows, &CaseClassMetrics::precision); }

std::vector<double> MetricReport::class_dsc() const {
  std::vector<double> sum(std::max(0, num_classes - 1), 0.0);
  std::vector<int> count(sum.size(), 0);
  for (const auto& r : rows) {
    if (r.label < 1 || r.label >= num_classes) continue;
    sum[r.label - 1] += r.dsc;
    ++count[r.label - 1];
  }
  for (size_t i = 0; i < sum.size(); ++i) {
    if (count[i] > 0) sum[i] /= count[i];
  }
  return sum;
}

std::string MetricReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "case,class,dsc,hd95,recall,precision,hd95_penalized\n";
  for (const auto& r : rows) {
    os << r.case_id << ',' << r.label << ',' << r.dsc << ',' << r.hd95 << ',' << r.recall << ','
       << r.precision << ',' << (r.hd95_penalized ? 1 : 0) << '\n';
  }
  os << "# MEAN,dsc_mean,hd95_mean";
  for (int label = 1; label < num_classes; ++label) os << ",dsc_class" << label;
  os << "\nMEAN," << mean_dsc() << ',' << mean_hd95();
  for (double d : class_dsc()) os << ',' << d;
  os << '\n';
  return os.str();
}

}  // namespace mcfnet
