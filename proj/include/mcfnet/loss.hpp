#pragma once

#include <optional>

#include <torch/torch.h>

namespace mcfnet {

struct CombinedLossConfig {
  int64_t num_classes = 2;
  // Dice weight; defaults to 1 / num_classes, which makes a perfect
  // prediction a zero of the loss.
  std::optional<double> lambda;
  // Added to the numerator and denominator of every per-class dice ratio.
  double smooth = 1e-5;
  // Lower clamp on probabilities inside the log.
  double prob_clamp = 1e-8;

  double dice_weight() const;
  void validate() const;
};

// L = 1 - sum_i [ lambda * (2 sum_n Y P + eps) / (sum_n Y^2 + sum_n P^2 + eps)
//               + (1/N) sum_n Y log(max(P, eps_p)) ]
// over probabilities P and one-hot targets Y, both (batch, I, H, W). The sums
// over n run across the batch and all pixels; N is their count.
torch::Tensor dice_ce_loss(const torch::Tensor& probs, const torch::Tensor& one_hot,
                           const CombinedLossConfig& config);

// (batch, H, W) integer labels -> (batch, I, H, W) one-hot in `dtype`.
torch::Tensor one_hot_target(const torch::Tensor& labels, int64_t num_classes,
                             torch::ScalarType dtype = torch::kFloat);

// Softmax over the class axis followed by dice_ce_loss against integer labels.
torch::Tensor dice_ce_from_logits(const torch::Tensor& logits, const torch::Tensor& labels,
                                  const CombinedLossConfig& config);

}  // namespace mcfnet
