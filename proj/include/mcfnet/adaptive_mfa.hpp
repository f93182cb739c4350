#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <torch/torch.h>

namespace mcfnet {

// Zero-based prediction-head indices, ascending.
using HeadSubset = std::vector<int>;

// All non-empty subsets of n heads grouped by cardinality: sets[k - 1] holds
// the size-k subsets in lexicographic order.
struct SubsetSets {
  int n_heads = 0;
  std::vector<std::vector<HeadSubset>> sets;

  size_t total() const;
};

SubsetSets enumerate_subsets(int n_heads);

// Elementwise sum of the maps named by `subset`.
torch::Tensor subset_prediction(const HeadSubset& subset, std::span<const torch::Tensor> maps);

enum class SetReduction { Sum, Mean };

// Loss of one aggregated prediction (logits) against a one-hot target.
using BaseLoss = std::function<torch::Tensor(const torch::Tensor& logits, const torch::Tensor& target)>;

// Total (or mean) of base_loss over every subset of one set. Per-subset values
// are appended to `per_subset` when given.
torch::Tensor set_loss(const std::vector<HeadSubset>& set, std::span<const torch::Tensor> maps,
                       const torch::Tensor& target, const BaseLoss& base_loss,
                       SetReduction reduction = SetReduction::Sum,
                       std::vector<double>* per_subset = nullptr);

enum class WeightPolicy {
  // Shift weight mass toward sets with below-average epoch loss.
  InverseLossEma,
  // Shift weight mass toward sets with above-average epoch loss.
  FocusHardEma,
  // Never change the weights.
  Fixed,
};

std::string to_string(WeightPolicy policy);
WeightPolicy parse_weight_policy(std::string_view text);

// Per-set weights. They are constants during a step and only change at epoch
// boundaries through update_weights; no sum-to-one constraint is imposed.
struct MfaWeightState {
  static constexpr double kTauFloor = 0.05;

  std::vector<double> weights;
  WeightPolicy policy = WeightPolicy::InverseLossEma;
  double rho = 0.1;
  double tau = 1.0;

  static MfaWeightState initial(size_t n_sets = 4, double value = 0.25,
                                WeightPolicy policy = WeightPolicy::InverseLossEma,
                                double rho = 0.1, double tau = 1.0);
  double mass() const;
  void validate() const;

  bool operator==(const MfaWeightState&) const = default;
};

// LOSS = sum_k W_k L_k.
torch::Tensor total_loss(std::span<const torch::Tensor> set_losses, const MfaWeightState& state);

// Epoch-end update. With z the standardised epoch-mean set losses
// (z = 0 when they are all equal) and s = -1 for InverseLossEma, +1 for
// FocusHardEma:
//   target_k = (sum_j W_j) * softmax(s z / max(tau, tau_floor))_k
//   W_k     <- (1 - rho) W_k + rho target_k
std::vector<double> standardized_losses(std::span<const double> epoch_set_losses);
MfaWeightState update_weights(const MfaWeightState& state, std::span<const double> epoch_set_losses);

struct MfaLossReport {
  torch::Tensor loss;
  std::vector<torch::Tensor> set_losses;
  std::vector<double> set_loss_values;
  std::vector<double> subset_losses;
};

// Evaluates every set's loss and combines them with the current weights.
MfaLossReport compute_mfa_loss(std::span<const torch::Tensor> maps, const torch::Tensor& target,
                               const SubsetSets& sets, const MfaWeightState& state,
                               const BaseLoss& base_loss,
                               SetReduction reduction = SetReduction::Sum);

}  // namespace mcfnet
