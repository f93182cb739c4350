#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcfnet/adaptive_mfa.hpp"
#include "mcfnet/loss.hpp"
#include "mcfnet/nn/model.hpp"

namespace mcfnet::train {

// Every knob of a training run. Serialised as INI text with the sections
// [train], [model], [mfa], [loss] and [data]; unknown keys are rejected.
struct TrainConfig {
  // [train]
  int64_t max_epochs = 300;
  int64_t batch_size = 16;
  double base_lr = 1e-3;
  double weight_decay = 1e-4;
  // Stop after this many optimiser steps in total; 0 means no cap.
  int64_t max_iterations = 0;
  // Fraction of training cases held out to pick the best checkpoint; 0 picks
  // on the training DSC instead.
  double val_fraction = 0.1;
  uint64_t seed = 0;

  // [model]
  ArchMode mode = ArchMode::Cascade;
  bool adaptive_mfa = true;
  int64_t num_classes = 2;
  int64_t in_channels = 1;
  int64_t width_divisor = 1;
  int64_t se_reduction = 8;
  int64_t lat_heads = 4;
  int64_t cab_heads = 4;
  int64_t fcb_input_size = 224;
  int64_t head_kernel = 1;
  FinalWeights final_weights;

  // [mfa]
  WeightPolicy policy = WeightPolicy::InverseLossEma;
  double rho = 0.1;
  double tau = 1.0;
  double initial_weight = 0.25;
  SetReduction set_reduction = SetReduction::Sum;

  // [loss]
  std::optional<double> lambda;
  double smooth = 1e-5;
  double prob_clamp = 1e-8;

  // [data]
  std::filesystem::path dataset;
  std::filesystem::path out_dir = "runs/mcfnet";

  ModelConfig model_config() const;
  CombinedLossConfig loss_config() const;
  MfaWeightState initial_mfa_state() const;

  void validate() const;
  // Canonical INI text; parse_train_config(to_ini()) reproduces the config.
  std::string to_ini() const;
  // Stable 64-bit FNV-1a hash of to_ini(), hex encoded.
  std::string fingerprint() const;
};

TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);

// Cosine annealing per epoch: 0.5 * base_lr * (1 + cos(pi * epoch / max_epochs)).
double lr_schedule(int64_t epoch, double base_lr, int64_t max_epochs);

// The architecture / loss combinations of the ablation study.
struct AblationPreset {
  std::string name;
  ArchMode mode;
  bool adaptive_mfa;
};

std::vector<AblationPreset> ablation_presets();

}  // namespace mcfnet::train
