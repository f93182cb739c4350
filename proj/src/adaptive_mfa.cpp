#include "mcfnet/adaptive_mfa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mcfnet {
namespace {

void collect(int n, int k, int start, HeadSubset& current, std::vector<HeadSubset>& out) {
  if (static_cast<int>(current.size()) == k) {
    out.push_back(current);
    return;
  }
  for (int i = start; i < n; ++i) {
    current.push_back(i);
    collect(n, k, i + 1, current, out);
    current.pop_back();
  }
}

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace

size_t SubsetSets::total() const {
  size_t n = 0;
  for (const auto& set : sets) n += set.size();
  return n;
}

SubsetSets enumerate_subsets(int n_heads) {
  if (n_heads < 1) throw std::invalid_argument("need at least one prediction head");
  if (n_heads > 20) throw std::invalid_argument("too many prediction heads to enumerate");
  SubsetSets out;
  out.n_heads = n_heads;
  out.sets.resize(n_heads);
  for (int k = 1; k <= n_heads; ++k) {
    HeadSubset current;
    collect(n_heads, k, 0, current, out.sets[k - 1]);
  }
  return out;
}

torch::Tensor subset_prediction(const HeadSubset& subset, std::span<const torch::Tensor> maps) {
  TORCH_CHECK(!subset.empty(), "subset must not be empty");
  for (int index : subset) {
    TORCH_CHECK(index >= 0 && static_cast<size_t>(index) < maps.size(), "head index ", index,
                " out of range");
    TORCH_CHECK(maps[index].sizes() == maps[subset.front()].sizes(),
                "prediction maps must share a shape");
  }
  torch::Tensor sum = maps[subset.front()];
  for (size_t i = 1; i < subset.size(); ++i) sum = sum + maps[subset[i]];
  return sum;
}

torch::Tensor set_loss(const std::vector<HeadSubset>& set, std::span<const torch::Tensor> maps,
                       const torch::Tensor& target, const BaseLoss& base_loss,
                       SetReduction reduction, std::vector<double>* per_subset) {
  TORCH_CHECK(!set.empty(), "set must contain at least one subset");
  torch::Tensor total;
  for (const auto& subset : set) {
    auto prediction = subset_prediction(subset, maps);
    TORCH_CHECK(prediction.sizes() == target.sizes(), "prediction shape ", prediction.sizes(),
                " does not match target ", target.sizes());
    auto loss = base_loss(prediction, target);
    if (per_subset) per_subset->push_back(loss.item<double>());
    total = total.defined() ? total + loss : loss;
  }
  if (reduction == SetReduction::Mean) total = total / static_cast<double>(set.size());
  return total;
}

std::string to_string(WeightPolicy policy) {
  switch (policy) {
    case WeightPolicy::InverseLossEma:
      return "inverse_loss_ema";
    case WeightPolicy::FocusHardEma:
      return "focus_hard_ema";
    case WeightPolicy::Fixed:
      return "fixed";
  }
  return "unknown";
}

WeightPolicy parse_weight_policy(std::string_view text) {
  if (text == "inverse_loss_ema") return WeightPolicy::InverseLossEma;
  if (text == "focus_hard_ema") return WeightPolicy::FocusHardEma;
  if (text == "fixed") return WeightPolicy::Fixed;
  throw std::invalid_argument("unknown weight policy '" + std::string(text) + "'");
}

MfaWeightState MfaWeightState::initial(size_t n_sets, double value, WeightPolicy policy, double rho,
                                       double tau) {
  MfaWeightState state;
  state.weights.assign(n_sets, value);
  state.policy = policy;
  state.rho = rho;
  state.tau = tau;
  state.validate();
  return state;
}

double MfaWeightState::mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

void MfaWeightState::validate() const {
  if (weights.empty()) throw std::invalid_argument("weight state has no sets");
  for (double w : weights) {
    if (!(w > 0) || !std::isfinite(w)) throw std::invalid_argument("set weights must be positive and finite");
  }
  if (!(rho >= 0 && rho <= 1)) throw std::invalid_argument("EMA rate must lie in [0, 1]");
  if (!(tau > 0) || !std::isfinite(tau)) throw std::invalid_argument("temperature must be positive");
}

torch::Tensor total_loss(std::span<const torch::Tensor> set_losses, const MfaWeightState& state) {
  TORCH_CHECK(set_losses.size() == state.weights.size(), "got ", set_losses.size(),
              " set losses for ", state.weights.size(), " weights");
  torch::Tensor total;
  for (size_t k = 0; k < set_losses.size(); ++k) {
    TORCH_CHECK(torch::isfinite(set_losses[k]).all().item<bool>(), "set loss L", k + 1,
                " is not finite");
    auto term = set_losses[k] * state.weights[k];
    total = total.defined() ? total + term : term;
  }
  return total;
}

std::vector<double> standardized_losses(std::span<const double> losses) {
  const double n = static_cast<double>(losses.size());
  const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
  double var = 0;
  for (double l : losses) var += (l - mean) * (l - mean);
  const double std_dev = std::sqrt(var / n);
  std::vector<double> z(losses.size(), 0.0);
  if (std_dev > 0) {
    for (size_t k = 0; k < losses.size(); ++k) z[k] = (losses[k] - mean) / std_dev;
  }
  return z;
}

MfaWeightState update_weights(const MfaWeightState& state, std::span<const double> epoch_set_losses) {
  state.validate();
  if (epoch_set_losses.size() != state.weights.size()) {
    throw std::invalid_argument("epoch loss count does not match weight count");
  }
  require_finite(epoch_set_losses, "epoch set losses");
  if (state.policy == WeightPolicy::Fixed) return state;

  const double sign = state.policy == WeightPolicy::InverseLossEma ? -1.0 : 1.0;
  const double tau = std::max(state.tau, MfaWeightState::kTauFloor);
  const auto z = standardized_losses(epoch_set_losses);

  std::vector<double> logits(z.size());
  for (size_t k = 0; k < z.size(); ++k) logits[k] = sign * z[k] / tau;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double partition = 0;
  for (auto& l : logits) partition += (l = std::exp(l - peak));

  const double mass = state.mass();
  MfaWeightState next = state;
  for (size_t k = 0; k < z.size(); ++k) {
    const double target = mass * logits[k] / partition;
    next.weights[k] = (1 - state.rho) * state.weights[k] + state.rho * target;
  }
  return next;
}

MfaLossReport compute_mfa_loss(std::span<const torch::Tensor> maps, const torch::Tensor& target,
                               const SubsetSets& sets, const MfaWeightState& state,
                               const BaseLoss& base_loss, SetReduction reduction) {
  TORCH_CHECK(static_cast<int>(maps.size()) == sets.n_heads, "got ", maps.size(),
              " prediction maps for ", sets.n_heads, " heads");
  MfaLossReport report;
  for (const auto& set : sets.sets) {
    auto loss = set_loss(set, maps, target, base_loss, reduction, &report.subset_losses);
    report.set_loss_values.push_back(loss.item<double>());
    report.set_losses.push_back(std::move(loss));
  }
  report.loss = total_loss(report.set_losses, state);
  return report;
}

}  // namespace mcfnet
