#include "mcfnet/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mcfnet/loss.hpp"

namespace mcfnet::train {

namespace {

constexpr size_t kNumSets = 4;

void set_learning_rate(torch::optim::Adam& optimizer, double lr) {
  for (auto& group : optimizer.param_groups()) {
    static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
  }
}

double foreground_dice(const std::vector<int64_t>& tp, const std::vector<int64_t>& fp,
                       const std::vector<int64_t>& fn) {
  double sum = 0;
  for (size_t k = 1; k < tp.size(); ++k) {
    const int64_t denom = 2 * tp[k] + fp[k] + fn[k];
    sum += denom == 0 ? 100.0 : 100.0 * 2.0 * static_cast<double>(tp[k]) / static_cast<double>(denom);
  }
  return tp.size() > 1 ? sum / static_cast<double>(tp.size() - 1) : 0.0;
}

}  // namespace

std::string log_header() {
  return "epoch\tlr\tLOSS\tL1\tL2\tL3\tL4\tW1\tW2\tW3\tW4\ttrain_dsc";
}

std::string format_log_line(const EpochRecord& r) {
  std::ostringstream os;
  os << std::setprecision(8) << r.epoch << '\t' << r.lr << '\t' << r.loss;
  for (size_t k = 0; k < kNumSets; ++k) os << '\t' << (k < r.set_losses.size() ? r.set_losses[k] : 0.0);
  for (size_t k = 0; k < kNumSets; ++k) os << '\t' << (k < r.weights.size() ? r.weights[k] : 0.0);
  os << '\t' << r.train_dsc;
  return os.str();
}

Trainer::Trainer(Checkpoint checkpoint)
    : ckpt_(std::move(checkpoint)),
      subsets_(enumerate_subsets(4)),
      loss_config_(ckpt_.config.loss_config()) {
  if (!ckpt_.model || !ckpt_.optimizer) throw std::invalid_argument("trainer needs a model and an optimiser");
}

MfaLossReport Trainer::compute_loss(const ModelOutput& output, const torch::Tensor& labels) const {
  const auto target = one_hot_target(labels, ckpt_.config.num_classes, output.pred.scalar_type());
  const auto& cfg = loss_config_;
  BaseLoss base = [&cfg](const torch::Tensor& logits, const torch::Tensor& one_hot) {
    return dice_ce_loss(torch::softmax(logits, 1), one_hot, cfg);
  };
  if (ckpt_.config.adaptive_mfa) {
    return compute_mfa_loss(output.heads, target, subsets_, ckpt_.mfa, base, ckpt_.config.set_reduction);
  }
  MfaLossReport report;
  report.loss = base(output.pred, target);
  return report;
}

StepResult Trainer::step(const data::Batch& batch) {
  auto& model = ckpt_.model;
  model->train();
  ckpt_.optimizer->zero_grad();
  const auto output = model->forward(batch.images);
  if (!torch::isfinite(output.pred).all().item<bool>()) {
    throw std::runtime_error("non-finite loss at epoch " + std::to_string(ckpt_.epoch) + ", iteration " +
                             std::to_string(ckpt_.iterations) + ": the prediction is not finite");
  }
  auto report = compute_loss(output, batch.labels);
  const double loss = report.loss.item<double>();
  if (!std::isfinite(loss)) {
    throw std::runtime_error("non-finite loss at epoch " + std::to_string(ckpt_.epoch) + ", iteration " +
                             std::to_string(ckpt_.iterations));
  }
  report.loss.backward();
  ckpt_.optimizer->step();
  ++ckpt_.iterations;

  {
    torch::NoGradGuard no_grad;
    const auto predicted = output.pred.argmax(1);
    for (int64_t k = 1; k < ckpt_.config.num_classes; ++k) {
      const auto p = predicted == k;
      const auto g = batch.labels == k;
      class_tp_[k] += (p & g).sum().item<int64_t>();
      class_fp_[k] += (p & ~g).sum().item<int64_t>();
      class_fn_[k] += (~p & g).sum().item<int64_t>();
    }
  }
  return {loss, report.set_loss_values};
}

bool Trainer::finished() const {
  const auto& cfg = ckpt_.config;
  return ckpt_.epoch >= cfg.max_epochs || (cfg.max_iterations > 0 && ckpt_.iterations >= cfg.max_iterations);
}

EpochRecord Trainer::run_epoch(const data::Dataset& train) {
  if (train.samples.empty()) throw std::invalid_argument("training set is empty");
  if (finished()) throw std::logic_error("training already finished");
  const auto& cfg = ckpt_.config;
  const int64_t epoch = ckpt_.epoch;
  const double lr = lr_schedule(epoch, cfg.base_lr, cfg.max_epochs);
  set_learning_rate(*ckpt_.optimizer, lr);

  std::vector<size_t> order(train.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed * 1000003ULL + static_cast<uint64_t>(epoch));
  std::shuffle(order.begin(), order.end(), rng);

  class_tp_.assign(cfg.num_classes, 0);
  class_fp_.assign(cfg.num_classes, 0);
  class_fn_.assign(cfg.num_classes, 0);
  double loss_sum = 0;
  std::vector<double> set_sums(kNumSets, 0.0);
  int64_t steps = 0;
  for (size_t start = 0; start < order.size() && !finished(); start += cfg.batch_size) {
    const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
    const auto batch = data::make_batch(train.samples, std::span(order).subspan(start, end - start));
    const auto result = step(batch);
    loss_sum += result.loss;
    for (size_t k = 0; k < result.set_losses.size() && k < kNumSets; ++k) set_sums[k] += result.set_losses[k];
    ++steps;
  }

  EpochRecord record;
  record.epoch = epoch;
  record.lr = lr;
  record.loss = loss_sum / static_cast<double>(steps);
  record.set_losses.resize(kNumSets);
  for (size_t k = 0; k < kNumSets; ++k) record.set_losses[k] = set_sums[k] / static_cast<double>(steps);
  if (cfg.adaptive_mfa) ckpt_.mfa = update_weights(ckpt_.mfa, record.set_losses);
  record.weights = ckpt_.mfa.weights;
  record.train_dsc = foreground_dice(class_tp_, class_fp_, class_fn_);

  ++ckpt_.epoch;
  ckpt_.history.push_back(record);
  return record;
}

TrainResult train(const TrainConfig& config, const data::Dataset& dataset,
                  const std::filesystem::path& out_dir,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  dataset.validate();
  if (dataset.samples.empty()) throw std::invalid_argument("training set is empty");
  if (dataset.num_classes != config.num_classes) {
    throw std::invalid_argument("dataset has " + std::to_string(dataset.num_classes) +
                                " classes, config expects " + std::to_string(config.num_classes));
  }

  data::Dataset fit = dataset;
  std::optional<data::Dataset> val;
  const auto cases = dataset.case_ids();
  if (config.val_fraction > 0 && cases.size() >= 2) {
    const auto split = data::make_split(cases, 1.0 - config.val_fraction, config.seed);
    fit = dataset.subset(split.train);
    val = dataset.subset(split.test);
  }

  std::filesystem::create_directories(out_dir);
  TrainResult result;
  result.last_checkpoint = out_dir / "last.pt";
  result.best_checkpoint = out_dir / "best.pt";
  result.log_file = out_dir / "train_log.tsv";
  std::ofstream log(result.log_file);
  if (!log) throw std::runtime_error("cannot write " + result.log_file.string());
  log << log_header() << '\n';

  Trainer trainer(Checkpoint::initial(config));
  double best = -1;
  while (!trainer.finished()) {
    EpochRecord record;
    try {
      record = trainer.run_epoch(fit);
    } catch (const std::exception& e) {
      log << "# aborted: " << e.what() << '\n';
      log.flush();
      throw;
    }
    log << format_log_line(record) << '\n';
    log.flush();

    const double score = val ? evaluate(trainer.checkpoint(), *val).mean_dsc() : record.train_dsc;
    save_checkpoint(trainer.checkpoint(), result.last_checkpoint);
    if (score > best) {
      best = score;
      save_checkpoint(trainer.checkpoint(), result.best_checkpoint);
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  result.best_score = best;
  return result;
}

torch::Tensor predict_labels(MCFNet& model, std::span<const data::SliceSample> samples, int64_t batch_size) {
  torch::NoGradGuard no_grad;
  model->eval();
  std::vector<torch::Tensor> out;
  for (size_t start = 0; start < samples.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(samples.size(), start + static_cast<size_t>(batch_size));
    std::vector<size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const auto batch = data::make_batch(samples, idx);
    out.push_back(model->forward(batch.images).pred.argmax(1));
  }
  return torch::cat(out, 0);
}

MetricReport evaluate(Checkpoint& checkpoint, const data::Dataset& dataset) {
  const int64_t classes = checkpoint.config.num_classes;
  if (dataset.num_classes != classes) {
    throw std::invalid_argument("checkpoint has " + std::to_string(classes) + " classes, dataset has " +
                                std::to_string(dataset.num_classes));
  }
  MetricReport report;
  report.num_classes = static_cast<int>(classes);
  if (dataset.samples.empty()) return report;

  const auto predicted = predict_labels(checkpoint.model, dataset.samples,
                                        std::max<int64_t>(1, checkpoint.config.batch_size))
                             .to(torch::kUInt8)
                             .contiguous();
  std::map<std::string, std::vector<std::pair<int64_t, size_t>>> by_case;
  for (size_t i = 0; i < dataset.samples.size(); ++i) {
    by_case[dataset.samples[i].case_id].emplace_back(dataset.samples[i].slice_index, i);
  }
  for (auto& [case_id, slices] : by_case) {
    std::sort(slices.begin(), slices.end());
    const auto& first = dataset.samples[slices.front().second].mask;
    const int64_t h = first.size(0), w = first.size(1);
    const auto depth = static_cast<int64_t>(slices.size());
    for (int64_t label = 1; label < classes; ++label) {
      Mask pred(depth, h, w), gt(depth, h, w);
      for (int64_t z = 0; z < depth; ++z) {
        const size_t i = slices[z].second;
        const auto p = predicted[static_cast<int64_t>(i)];
        const auto g = dataset.samples[i].mask.contiguous();
        const uint8_t* pp = p.data_ptr<uint8_t>();
        const uint8_t* gp = g.data_ptr<uint8_t>();
        for (int64_t j = 0; j < h * w; ++j) {
          pred.data[z * h * w + j] = pp[j] == label;
          gt.data[z * h * w + j] = gp[j] == label;
        }
      }
      report.rows.push_back(evaluate_case_class(case_id, static_cast<int>(label), pred, gt));
    }
  }
  return report;
}

}  // namespace mcfnet::train
