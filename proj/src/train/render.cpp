#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "mcfnet/train/trainer.hpp"

namespace mcfnet::train {
namespace fs = std::filesystem;

namespace {

const cv::Scalar kTruthColour(0, 200, 0);
const cv::Scalar kPredColour(0, 0, 230);

void draw_label_contours(cv::Mat& canvas, const cv::Mat& labels, int num_classes, const cv::Scalar& colour) {
  for (int label = 1; label < num_classes; ++label) {
    cv::Mat binary = labels == label;
    std::vector<std::vector<cv::Point>> contours;
    cv::findContours(binary, contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_NONE);
    cv::drawContours(canvas, contours, -1, colour, 1);
  }
}

cv::Mat to_mat_u8(const torch::Tensor& t) {
  auto c = t.to(torch::kUInt8).contiguous();
  return cv::Mat(static_cast<int>(c.size(0)), static_cast<int>(c.size(1)), CV_8U, c.data_ptr<uint8_t>()).clone();
}

void write_png(const fs::path& path, const cv::Mat& image) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), image);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw std::runtime_error("cannot write " + path.string());
}

cv::Mat loss_curve(const std::vector<EpochRecord>& history) {
  const int width = 640, height = 400, margin = 50;
  cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  const cv::Point origin(margin, height - margin);
  cv::line(canvas, origin, {width - margin / 2, height - margin}, cv::Scalar(0, 0, 0));
  cv::line(canvas, origin, {margin, margin / 2}, cv::Scalar(0, 0, 0));
  cv::putText(canvas, "epoch", {width / 2 - 20, height - 15}, cv::FONT_HERSHEY_SIMPLEX, 0.5, cv::Scalar(0, 0, 0));
  cv::putText(canvas, "LOSS", {5, margin / 2 + 5}, cv::FONT_HERSHEY_SIMPLEX, 0.5, cv::Scalar(0, 0, 0));
  if (history.empty()) return canvas;

  double lo = history.front().loss, hi = lo;
  for (const auto& r : history) {
    lo = std::min(lo, r.loss);
    hi = std::max(hi, r.loss);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double plot_w = width - 1.5 * margin, plot_h = height - 1.5 * margin;
  std::vector<cv::Point> points;
  for (size_t i = 0; i < history.size(); ++i) {
    const double fx = history.size() > 1 ? static_cast<double>(i) / static_cast<double>(history.size() - 1) : 0.0;
    const double fy = (history[i].loss - lo) / (hi - lo);
    points.emplace_back(static_cast<int>(margin + fx * plot_w), static_cast<int>(height - margin - fy * plot_h));
  }
  cv::polylines(canvas, points, false, cv::Scalar(200, 80, 0), 2);
  for (const auto& p : points) cv::circle(canvas, p, 2, cv::Scalar(200, 80, 0), cv::FILLED);
  char text[64];
  std::snprintf(text, sizeof(text), "%.4g", hi);
  cv::putText(canvas, text, {margin + 5, margin / 2 + 15}, cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(0, 0, 0));
  std::snprintf(text, sizeof(text), "%.4g", lo);
  cv::putText(canvas, text, {margin + 5, height - margin - 5}, cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(0, 0, 0));
  return canvas;
}

}  // namespace

std::vector<fs::path> render_outputs(Checkpoint& checkpoint, std::span<const data::SliceSample> samples,
                                     const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw std::runtime_error("cannot create output directory " + out_dir.string());
  }
  const int classes = static_cast<int>(checkpoint.config.num_classes);
  std::vector<fs::path> written;
  torch::Tensor predicted;
  if (!samples.empty()) predicted = predict_labels(checkpoint.model, samples, 4);

  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    cv::Mat gray = to_mat_u8((s.image.clamp(0, 1) * 255.0).round());
    cv::Mat canvas;
    cv::cvtColor(gray, canvas, cv::COLOR_GRAY2BGR);
    draw_label_contours(canvas, to_mat_u8(s.mask), classes, kTruthColour);
    draw_label_contours(canvas, to_mat_u8(predicted[static_cast<int64_t>(i)]), classes, kPredColour);

    char name[512];
    std::snprintf(name, sizeof(name), "overlay_%s_%04lld.png", s.case_id.c_str(),
                  static_cast<long long>(s.slice_index));
    write_png(out_dir / name, canvas);
    written.push_back(out_dir / name);
  }
  write_png(out_dir / "loss_curve.png", loss_curve(checkpoint.history));
  written.push_back(out_dir / "loss_curve.png");
  return written;
}

}  // namespace mcfnet::train
