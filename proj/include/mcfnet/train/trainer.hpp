#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "mcfnet/adaptive_mfa.hpp"
#include "mcfnet/data/dataset.hpp"
#include "mcfnet/metrics.hpp"
#include "mcfnet/nn/model.hpp"
#include "mcfnet/train/config.hpp"

namespace mcfnet::train {

// One line of the training log.
struct EpochRecord {
  int64_t epoch = 0;
  double lr = 0;
  double loss = 0;
  std::vector<double> set_losses;  // epoch means of L1..L4
  std::vector<double> weights;     // W1..W4 after the epoch-end update
  double train_dsc = 0;            // percent, foreground classes

  bool operator==(const EpochRecord&) const = default;
};

// Tab-separated, fixed column order:
// epoch lr LOSS L1 L2 L3 L4 W1 W2 W3 W4 train_dsc
std::string log_header();
std::string format_log_line(const EpochRecord& record);

// Model, optimiser and loss-weight state of a run.
struct Checkpoint {
  TrainConfig config;
  MCFNet model{nullptr};
  std::unique_ptr<torch::optim::Adam> optimizer;
  MfaWeightState mfa;
  int64_t epoch = 0;  // epochs completed
  int64_t iterations = 0;
  std::string fingerprint;
  std::vector<EpochRecord> history;

  // Fresh model and optimiser for `config`, seeded with config.seed.
  static Checkpoint initial(const TrainConfig& config);
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct StepResult {
  double loss = 0;
  std::vector<double> set_losses;
};

// Owns a checkpoint and advances it one optimiser step or one epoch at a time.
class Trainer {
 public:
  explicit Trainer(Checkpoint checkpoint);

  // Forward, loss, backward and optimiser step on one batch. Throws on a
  // non-finite loss.
  StepResult step(const data::Batch& batch);

  // One pass over `train` in shuffled batches, followed by the epoch-end
  // weight update. Stops early once config.max_iterations is reached.
  EpochRecord run_epoch(const data::Dataset& train);

  // Loss for the current model on a batch; the graph is kept for backward.
  MfaLossReport compute_loss(const ModelOutput& output, const torch::Tensor& labels) const;

  bool finished() const;
  Checkpoint& checkpoint() { return ckpt_; }
  const Checkpoint& checkpoint() const { return ckpt_; }

 private:
  Checkpoint ckpt_;
  SubsetSets subsets_;
  CombinedLossConfig loss_config_;
  std::vector<int64_t> class_tp_, class_fp_, class_fn_;
};

struct TrainResult {
  std::filesystem::path last_checkpoint;
  std::filesystem::path best_checkpoint;
  std::filesystem::path log_file;
  std::vector<EpochRecord> history;
  double best_score = 0;
};

// Full run: epochs until max_epochs or max_iterations, writing last.pt,
// best.pt and train_log.tsv under out_dir. The best checkpoint is chosen by
// mean DSC on a held-out fraction of the training cases (or by training DSC
// when val_fraction is 0). `on_epoch` is called after every epoch.
TrainResult train(const TrainConfig& config, const data::Dataset& dataset,
                  const std::filesystem::path& out_dir,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

// Argmax of the final prediction for each sample, (N, H, W) int64.
torch::Tensor predict_labels(MCFNet& model, std::span<const data::SliceSample> samples,
                             int64_t batch_size = 8);

// Per-case, per-class metrics. Slices of a case are stacked by slice index;
// distances are in pixels.
MetricReport evaluate(Checkpoint& checkpoint, const data::Dataset& dataset);

// One overlay PNG per sample (image, ground-truth contour in green,
// prediction contour in red) and loss_curve.png from the checkpoint history.
std::vector<std::filesystem::path> render_outputs(Checkpoint& checkpoint,
                                                  std::span<const data::SliceSample> samples,
                                                  const std::filesystem::path& out_dir);

}  // namespace mcfnet::train
