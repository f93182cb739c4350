// Command-line front end: synth, prepare, train, eval, render.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcfnet/data/dataset.hpp"
#include "mcfnet/data/split.hpp"
#include "mcfnet/data/synth.hpp"
#include "mcfnet/data/volume.hpp"
#include "mcfnet/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace mcfnet;

namespace {

int run_synth(int64_t cases, int64_t classes, int64_t size, uint64_t seed, double train_fraction,
              const fs::path& out) {
  data::Dataset dataset;
  dataset.num_classes = classes;
  dataset.class_names = data::default_class_names(classes);
  dataset.samples = data::synth_dataset(cases, classes, size, seed);
  if (cases >= 2) dataset.split = data::make_split(dataset.case_ids(), train_fraction, seed);
  else dataset.split.train = dataset.case_ids();
  data::save_dataset(dataset, out);
  std::cout << "wrote " << dataset.samples.size() << " synthetic slices to " << out << '\n';
  return 0;
}

// Pairs <images>/<case>.nii[.gz] with <labels>/<case>.nii[.gz] (an integer
// label volume) and writes a normalised slice dataset.
int run_prepare(const fs::path& images, const fs::path& labels, int64_t classes, const std::string& modality,
                bool keep_empty, double train_fraction, uint64_t seed, const fs::path& out) {
  data::Dataset dataset;
  dataset.num_classes = classes;
  dataset.class_names = data::default_class_names(classes);
  data::NormalizationConfig norm;
  norm.foreground_only = !keep_empty;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(images)) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    auto name = path.filename().string();
    std::string id = name.substr(0, name.find('.'));
    const auto image = data::load_volume(path, data::parse_modality(modality));
    const auto label = data::load_volume(labels / name);
    auto slices = data::slice_and_normalize(image, label, norm, id);
    std::move(slices.begin(), slices.end(), std::back_inserter(dataset.samples));
  }
  dataset.split = data::make_split(dataset.case_ids(), train_fraction, seed);
  data::save_dataset(dataset, out);
  std::cout << "wrote " << dataset.samples.size() << " slices from " << files.size() << " cases to " << out
            << '\n';
  return 0;
}

int run_train(const fs::path& config_path, std::optional<uint64_t> seed, std::optional<fs::path> out) {
  auto config = train::load_train_config(config_path);
  if (seed) config.seed = *seed;
  if (out) config.out_dir = *out;
  const auto dataset = data::load_dataset(config.dataset, "train");
  std::cout << train::log_header() << '\n';
  const auto result = train::train(config, dataset, config.out_dir, [](const train::EpochRecord& r) {
    std::cout << train::format_log_line(r) << std::endl;
  });
  std::cout << "last checkpoint: " << result.last_checkpoint << "\nbest checkpoint: " << result.best_checkpoint
            << '\n';
  return 0;
}

int run_eval(const fs::path& checkpoint_path, const fs::path& data_dir, const std::string& partition,
             const fs::path& out) {
  auto ckpt = train::load_checkpoint(checkpoint_path);
  const auto dataset = data::load_dataset(data_dir, partition == "all" ? std::nullopt : std::optional(partition));
  const auto report = train::evaluate(ckpt, dataset);
  fs::create_directories(out);
  std::ofstream file(out / "metrics.csv");
  if (!file) throw std::runtime_error("cannot write " + (out / "metrics.csv").string());
  file << report.to_text();
  std::cout << "mean DSC " << report.mean_dsc() << "  mean HD95 " << report.mean_hd95() << "  ("
            << report.rows.size() << " case/class rows) -> " << out / "metrics.csv" << '\n';
  return 0;
}

int run_render(const fs::path& checkpoint_path, const fs::path& data_dir, const std::string& partition,
               int64_t limit, const fs::path& out) {
  auto ckpt = train::load_checkpoint(checkpoint_path);
  auto dataset = data::load_dataset(data_dir, partition == "all" ? std::nullopt : std::optional(partition));
  if (limit > 0 && static_cast<int64_t>(dataset.samples.size()) > limit) dataset.samples.resize(limit);
  const auto files = train::render_outputs(ckpt, dataset.samples, out);
  std::cout << "wrote " << files.size() << " images to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MCFNet cascaded segmentation: training, evaluation and rendering"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic shape dataset");
  int64_t synth_cases = 16, synth_classes = 3, synth_size = 256;
  uint64_t synth_seed = 1;
  double synth_fraction = 0.8;
  fs::path synth_out;
  synth->add_option("--cases", synth_cases, "Number of cases")->required();
  synth->add_option("--classes", synth_classes, "Class count including background")->required();
  synth->add_option("--size", synth_size, "Image side length");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--train-fraction", synth_fraction, "Fraction of cases in the train partition");
  synth->add_option("--out", synth_out, "Output dataset directory")->required();

  auto* prepare = app.add_subcommand("prepare", "Slice and normalise NIfTI volumes into a dataset");
  fs::path prep_images, prep_labels, prep_out;
  int64_t prep_classes = 2;
  std::string prep_modality = "CT";
  bool prep_keep_empty = false;
  double prep_fraction = 0.8;
  uint64_t prep_seed = 0;
  prepare->add_option("--images", prep_images, "Directory of image volumes")->required();
  prepare->add_option("--labels", prep_labels, "Directory of label volumes with matching names")->required();
  prepare->add_option("--classes", prep_classes, "Class count including background")->required();
  prepare->add_option("--modality", prep_modality, "CT, MR or PET");
  prepare->add_flag("--keep-empty", prep_keep_empty, "Keep slices without foreground");
  prepare->add_option("--train-fraction", prep_fraction, "Fraction of cases in the train partition");
  prepare->add_option("--seed", prep_seed, "Split seed");
  prepare->add_option("--out", prep_out, "Output dataset directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train from a config file");
  fs::path train_config;
  std::optional<uint64_t> train_seed;
  std::optional<fs::path> train_out;
  train_cmd->add_option("--config", train_config, "INI config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", train_seed, "Override train.seed");
  train_cmd->add_option("--out", train_out, "Override data.out_dir");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  fs::path eval_ckpt, eval_data, eval_out;
  std::string eval_partition = "test";
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval->add_option("--data", eval_data, "Dataset directory")->required();
  eval->add_option("--partition", eval_partition, "train, test or all")
      ->check(CLI::IsMember({"train", "test", "all"}));
  eval->add_option("--out", eval_out, "Report directory")->required();

  auto* render = app.add_subcommand("render", "Render prediction overlays and the loss curve");
  fs::path render_ckpt, render_data, render_out;
  std::string render_partition = "test";
  int64_t render_limit = 0;
  render->add_option("--checkpoint", render_ckpt, "Checkpoint file")->required();
  render->add_option("--data", render_data, "Dataset directory")->required();
  render->add_option("--partition", render_partition, "train, test or all")
      ->check(CLI::IsMember({"train", "test", "all"}));
  render->add_option("--limit", render_limit, "Render at most this many slices (0 = all)");
  render->add_option("--out", render_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return run_synth(synth_cases, synth_classes, synth_size, synth_seed, synth_fraction, synth_out);
    if (*prepare) {
      return run_prepare(prep_images, prep_labels, prep_classes, prep_modality, prep_keep_empty, prep_fraction,
                         prep_seed, prep_out);
    }
    if (*train_cmd) return run_train(train_config, train_seed, train_out);
    if (*eval) return run_eval(eval_ckpt, eval_data, eval_partition, eval_out);
    if (*render) return run_render(render_ckpt, render_data, render_partition, render_limit, render_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
