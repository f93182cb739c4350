#include "testing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mcfnet/metrics.hpp"

using namespace mcfnet;

namespace {

Mask random_mask(std::mt19937_64& rng, int64_t h, int64_t w, double density) {
  std::bernoulli_distribution on(density);
  Mask m(1, h, w);
  for (auto& v : m.data) v = on(rng) ? 1 : 0;
  return m;
}

// A few random filled rectangles; gives connected regions with long boundaries.
Mask random_blobs(std::mt19937_64& rng, int64_t h, int64_t w) {
  Mask m(1, h, w);
  std::uniform_int_distribution<int> count(1, 3);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int64_t> y0(0, h - 1), x0(0, w - 1);
    const int64_t a = y0(rng), b = x0(rng);
    std::uniform_int_distribution<int64_t> hh(1, std::max<int64_t>(1, h / 2)), ww(1, std::max<int64_t>(1, w / 2));
    const int64_t y1 = std::min(h, a + hh(rng)), x1 = std::min(w, b + ww(rng));
    for (int64_t y = a; y < y1; ++y) {
      for (int64_t x = b; x < x1; ++x) m.at(0, y, x) = 1;
    }
  }
  return m;
}

// Plain 4-neighbour boundary of a 2D mask, outside counts as background.
std::vector<std::pair<int64_t, int64_t>> boundary_2d(const Mask& m) {
  const int64_t h = m.shape[1], w = m.shape[2];
  auto fg = [&](int64_t y, int64_t x) { return y >= 0 && y < h && x >= 0 && x < w && m.at(0, y, x); };
  std::vector<std::pair<int64_t, int64_t>> out;
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      if (fg(y, x) && (!fg(y - 1, x) || !fg(y + 1, x) || !fg(y, x - 1) || !fg(y, x + 1))) out.emplace_back(y, x);
    }
  }
  return out;
}

double brute_hd95(const Mask& a, const Mask& b) {
  const auto ea = boundary_2d(a), eb = boundary_2d(b);
  std::vector<double> d;
  auto directed = [&](const auto& from, const auto& to) {
    for (auto [y, x] : from) {
      double best = std::numeric_limits<double>::infinity();
      for (auto [v, u] : to) {
        const double dy = static_cast<double>(y - v), dx = static_cast<double>(x - u);
        best = std::min(best, std::sqrt(dy * dy + dx * dx));
      }
      d.push_back(best);
    }
  };
  directed(ea, eb);
  directed(eb, ea);
  std::sort(d.begin(), d.end());
  const double rank = 0.95 * static_cast<double>(d.size() - 1);
  const size_t lo = static_cast<size_t>(rank);
  const size_t hi = std::min(lo + 1, d.size() - 1);
  return d[lo] + (d[hi] - d[lo]) * (rank - static_cast<double>(lo));
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("DSC examples") {
    auto pred = Mask::from_2d(2, 2, {1, 1, 0, 0});
    auto gt = Mask::from_2d(2, 2, {0, 1, 0, 1});
    CHECK(dsc(pred, gt) == doctest::Approx(50.0));
    CHECK(dsc(gt, gt) == 100.0);
    CHECK(dsc(Mask::from_2d(2, 2, {1, 0, 0, 0}), Mask::from_2d(2, 2, {0, 0, 0, 1})) == 0.0);
    CHECK(dsc(Mask(1, 3, 3), Mask(1, 3, 3)) == 100.0);
    CHECK_THROWS(dsc(Mask(1, 2, 2), Mask(1, 2, 3)));
  }

  TEST_CASE("recall and precision examples") {
    Mask gt(1, 4, 4), pred(1, 4, 4);
    for (int x = 0; x < 4; ++x) {
      gt.at(0, 0, x) = 1;
      pred.at(0, 0, x) = 1;
      pred.at(0, 1, x) = 1;
    }
    CHECK(recall_precision(gt, gt) == std::pair{100.0, 100.0});
    CHECK(recall_precision(pred, gt) == std::pair{100.0, 50.0});
    CHECK(recall_precision(Mask(1, 4, 4), gt) == std::pair{0.0, 0.0});
    CHECK(recall_precision(Mask(1, 4, 4), Mask(1, 4, 4)) == std::pair{100.0, 100.0});
    CHECK_THROWS(recall_precision(Mask(1, 4, 4), Mask(2, 4, 4)));
  }

  TEST_CASE("overlap metrics equal brute-force confusion counts") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> density(0.0, 0.6);
    for (int draw = 0; draw < 200; ++draw) {
      auto a = random_mask(rng, 32, 32, density(rng));
      auto b = random_mask(rng, 32, 32, density(rng));
      int64_t tp = 0, fp = 0, fn = 0;
      for (int64_t y = 0; y < 32; ++y) {
        for (int64_t x = 0; x < 32; ++x) {
          const bool p = a.at(0, y, x), g = b.at(0, y, x);
          if (p && g) ++tp;
          else if (p) ++fp;
          else if (g) ++fn;
        }
      }
      const double d = tp + fp + fn == 0 ? 100.0 : 100.0 * 2 * tp / double(2 * tp + fp + fn);
      const double r = tp + fn == 0 ? (tp + fp == 0 ? 100.0 : 0.0) : 100.0 * tp / double(tp + fn);
      const double p = tp + fp == 0 ? (tp + fn == 0 ? 100.0 : 0.0) : 100.0 * tp / double(tp + fp);
      CHECK(dsc(a, b) == d);
      const auto [rec, prec] = recall_precision(a, b);
      CHECK(rec == r);
      CHECK(prec == p);
      // Symmetries and the harmonic-mean identity.
      CHECK(dsc(a, b) == dsc(b, a));
      CHECK(recall_precision(a, b).first == recall_precision(b, a).second);
      if (rec + prec > 0) CHECK(dsc(a, b) == doctest::Approx(2 * rec * prec / (rec + prec)).epsilon(1e-12));
      CHECK(d >= 0.0);
      CHECK(d <= 100.0);
    }
  }

  TEST_CASE("HD95 examples") {
    auto a = Mask::from_2d(5, 5, std::vector<uint8_t>(25, 0));
    auto b = a;
    a.at(0, 1, 1) = 1;
    b.at(0, 1, 4) = 1;
    CHECK(hd95(a, b).distance == 3.0);
    CHECK(hd95(a, a).distance == 0.0);
    auto empty = Mask(1, 5, 5);
    const auto pen = hd95(empty, b);
    CHECK(pen.penalized);
    CHECK(pen.distance == doctest::Approx(std::sqrt(1.0 + 25 + 25)));
    const auto none = hd95(empty, empty);
    CHECK_FALSE(none.penalized);
    CHECK(none.distance == 0.0);
    CHECK_THROWS(hd95(a, Mask(1, 5, 6)));
  }

  TEST_CASE("HD95 honours anisotropic spacing") {
    Mask a(3, 4, 4), b(3, 4, 4);
    a.at(0, 1, 1) = 1;
    b.at(2, 1, 1) = 1;
    CHECK(hd95(a, b, {3.0, 1.0, 1.0}).distance == doctest::Approx(6.0));
    Mask c(1, 4, 8), d(1, 4, 8);
    c.at(0, 0, 0) = 1;
    d.at(0, 0, 5) = 1;
    CHECK(hd95(c, d, {1.0, 1.0, 0.5}).distance == doctest::Approx(2.5));
  }

  TEST_CASE("HD95 equals the all-pairs boundary oracle") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int64_t> side(4, 64);
    for (int draw = 0; draw < 50; ++draw) {
      const int64_t h = side(rng), w = side(rng);
      auto a = random_blobs(rng, h, w);
      auto b = draw % 2 ? random_blobs(rng, h, w) : random_mask(rng, h, w, 0.2);
      if (a.empty() || b.empty()) continue;
      INFO("draw ", draw, " size ", h, "x", w);
      CHECK(hd95(a, b).distance == brute_hd95(a, b));
      CHECK(hd95(a, b).distance == hd95(b, a).distance);
      CHECK(hd95(a, a).distance == 0.0);
    }
  }

  TEST_CASE("boundary extraction") {
    Mask m(1, 5, 5);
    for (int y = 1; y < 4; ++y) {
      for (int x = 1; x < 4; ++x) m.at(0, y, x) = 1;
    }
    CHECK(boundary_voxels(m).size() == 8);
    Mask full(1, 3, 3);
    std::fill(full.data.begin(), full.data.end(), 1);
    CHECK(boundary_voxels(full).size() == 8);  // the grid edge counts as background
    Mask single(1, 1, 1);
    single.at(0, 0, 0) = 1;
    CHECK(boundary_voxels(single).size() == 1);
  }

  TEST_CASE("percentile interpolates linearly") {
    CHECK(percentile({1, 2, 3, 4, 5}, 50) == 3.0);
    CHECK(percentile({4, 1, 3, 2}, 50) == 2.5);
    CHECK(percentile({0, 10}, 95) == doctest::Approx(9.5));
    CHECK(percentile({7}, 95) == 7.0);
    CHECK_THROWS(percentile({}, 95));
  }

  TEST_CASE("report text layout") {
    MetricReport report;
    report.num_classes = 3;
    report.rows.push_back(evaluate_case_class("a", 1, Mask::from_2d(2, 2, {1, 1, 0, 0}),
                                              Mask::from_2d(2, 2, {0, 1, 0, 1})));
    report.rows.push_back(evaluate_case_class("a", 2, Mask::from_2d(2, 2, {1, 0, 0, 0}),
                                              Mask::from_2d(2, 2, {1, 0, 0, 0})));
    CHECK(report.mean_dsc() == doctest::Approx(75.0));
    CHECK(report.class_dsc() == std::vector<double>{50.0, 100.0});
    const auto text = report.to_text();
    CHECK(text.rfind("case,class,dsc,hd95,recall,precision,hd95_penalized\n", 0) == 0);
    CHECK(text.find("\nMEAN,75,") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  }
}
