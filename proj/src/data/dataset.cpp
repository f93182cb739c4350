#include "mcfnet/data/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

namespace mcfnet::data {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slice_file(const SliceSample& s) {
  char name[512];
  std::snprintf(name, sizeof(name), "%s_%04lld.png", s.case_id.c_str(),
                static_cast<long long>(s.slice_index));
  return name;
}

}  // namespace

std::vector<std::string> Dataset::case_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& s : samples) {
    if (seen.insert(s.case_id).second) ids.push_back(s.case_id);
  }
  return ids;
}

Dataset Dataset::subset(const std::vector<std::string>& cases) const {
  const std::set<std::string> keep(cases.begin(), cases.end());
  Dataset out;
  out.num_classes = num_classes;
  out.class_names = class_names;
  out.split = split;
  for (const auto& s : samples) {
    if (keep.count(s.case_id)) out.samples.push_back(s);
  }
  return out;
}

void Dataset::validate() const {
  if (num_classes < 2) throw std::invalid_argument("dataset needs at least two classes");
  if (static_cast<int64_t>(class_names.size()) != num_classes) {
    throw std::invalid_argument("class name count does not match class count");
  }
  for (const auto& s : samples) {
    if (s.image.dim() != 2 || s.mask.sizes() != s.image.sizes()) {
      throw std::invalid_argument("sample " + s.case_id + " has mismatched image/mask shapes");
    }
    if (s.mask.numel() > 0 && s.mask.max().item<int64_t>() >= num_classes) {
      throw std::invalid_argument("sample " + s.case_id + " has a label >= class count");
    }
  }
}

std::vector<std::string> default_class_names(int64_t num_classes) {
  std::vector<std::string> names{"background"};
  for (int64_t k = 1; k < num_classes; ++k) names.push_back("class" + std::to_string(k));
  return names;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  dataset.validate();
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");

  std::map<std::string, int64_t> slice_counts;
  for (const auto& s : dataset.samples) {
    const auto name = slice_file(s);
    auto img = (s.image.contiguous().clamp(0, 1) * 65535.0).round().to(torch::kInt32).to(torch::kFloat);
    cv::Mat image16(static_cast<int>(s.image.size(0)), static_cast<int>(s.image.size(1)), CV_16U);
    auto acc = img.accessor<float, 2>();
    for (int y = 0; y < image16.rows; ++y) {
      for (int x = 0; x < image16.cols; ++x) image16.at<uint16_t>(y, x) = static_cast<uint16_t>(acc[y][x]);
    }
    auto mask = s.mask.to(torch::kUInt8).contiguous();
    cv::Mat mask8(static_cast<int>(mask.size(0)), static_cast<int>(mask.size(1)), CV_8U, mask.data_ptr<uint8_t>());
    if (!cv::imwrite((dir / "images" / name).string(), image16) ||
        !cv::imwrite((dir / "masks" / name).string(), mask8)) {
      throw std::runtime_error("cannot write slice " + name + " into " + dir.string());
    }
    ++slice_counts[s.case_id];
  }

  const std::set<std::string> test(dataset.split.test.begin(), dataset.split.test.end());
  json manifest;
  manifest["num_classes"] = dataset.num_classes;
  manifest["class_names"] = dataset.class_names;
  manifest["seed"] = dataset.split.seed;
  manifest["cases"] = json::array();
  for (const auto& id : dataset.case_ids()) {
    manifest["cases"].push_back(
        {{"id", id}, {"partition", test.count(id) ? "test" : "train"}, {"slices", slice_counts[id]}});
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

Dataset load_dataset(const fs::path& dir, const std::optional<std::string>& partition) {
  if (partition && *partition != "train" && *partition != "test") {
    throw std::invalid_argument("partition must be train or test, got '" + *partition + "'");
  }
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("no manifest.json in " + dir.string());
  const json manifest = json::parse(in);

  Dataset dataset;
  dataset.num_classes = manifest.at("num_classes").get<int64_t>();
  dataset.class_names = manifest.at("class_names").get<std::vector<std::string>>();
  dataset.split.seed = manifest.value("seed", uint64_t{0});

  for (const auto& entry : manifest.at("cases")) {
    const auto id = entry.at("id").get<std::string>();
    const auto part = entry.at("partition").get<std::string>();
    if (part != "train" && part != "test") throw std::runtime_error("unknown partition '" + part + "'");
    (part == "train" ? dataset.split.train : dataset.split.test).push_back(id);
    if (partition && part != *partition) continue;

    std::vector<fs::path> files;
    const std::string prefix = id + "_";
    for (const auto& f : fs::directory_iterator(dir / "masks")) {
      const auto name = f.path().filename().string();
      if (name.rfind(prefix, 0) == 0 && name.size() == prefix.size() + 8 && f.path().extension() == ".png") {
        files.push_back(f.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (static_cast<int64_t>(files.size()) != entry.at("slices").get<int64_t>()) {
      throw std::runtime_error("case " + id + ": manifest slice count does not match files");
    }
    for (const auto& mask_path : files) {
      const auto name = mask_path.filename().string();
      cv::Mat image = cv::imread((dir / "images" / name).string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
      cv::Mat mask = cv::imread(mask_path.string(), cv::IMREAD_GRAYSCALE);
      if (image.empty() || mask.empty()) throw std::runtime_error("cannot read slice " + name);
      if (image.size() != mask.size()) throw std::runtime_error("slice " + name + ": image/mask shapes differ");
      cv::Mat as_float;
      image.convertTo(as_float, CV_32F, image.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0);

      SliceSample s;
      s.case_id = id;
      s.slice_index = std::stoll(name.substr(prefix.size(), 4));
      s.image = torch::from_blob(as_float.data, {as_float.rows, as_float.cols}, torch::kFloat).clone();
      s.mask = torch::from_blob(mask.data, {mask.rows, mask.cols}, torch::kUInt8).clone();
      dataset.samples.push_back(std::move(s));
    }
  }
  dataset.validate();
  return dataset;
}

Batch make_batch(std::span<const SliceSample> samples, std::span<const size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("empty batch");
  std::vector<torch::Tensor> images, labels;
  for (size_t i : indices) {
    if (i >= samples.size()) throw std::out_of_range("batch index out of range");
    images.push_back(samples[i].image.unsqueeze(0));
    labels.push_back(samples[i].mask.to(torch::kLong));
  }
  return {torch::stack(images), torch::stack(labels)};
}

}  // namespace mcfnet::data
