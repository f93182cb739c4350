#include "mcfnet/loss.hpp"

namespace mcfnet {

double CombinedLossConfig::dice_weight() const {
  return lambda.value_or(1.0 / static_cast<double>(num_classes));
}

void CombinedLossConfig::validate() const {
  TORCH_CHECK(num_classes >= 1, "loss needs at least one class");
  TORCH_CHECK(dice_weight() > 0, "dice weight must be positive");
  TORCH_CHECK(smooth > 0 && prob_clamp > 0, "loss epsilons must be positive");
}

torch::Tensor dice_ce_loss(const torch::Tensor& probs, const torch::Tensor& one_hot,
                           const CombinedLossConfig& config) {
  config.validate();
  TORCH_CHECK(probs.dim() == 4, "probabilities must be (batch, I, H, W)");
  TORCH_CHECK(probs.sizes() == one_hot.sizes(), "probability shape ", probs.sizes(),
              " does not match target shape ", one_hot.sizes());
  TORCH_CHECK(probs.size(1) == config.num_classes, "expected ", config.num_classes,
              " classes, got ", probs.size(1));
  TORCH_CHECK(!torch::isnan(probs).any().item<bool>(), "probabilities contain NaN");

  const auto target = one_hot.to(probs.scalar_type());
  const std::vector<int64_t> reduce{0, 2, 3};
  const double voxels = static_cast<double>(probs.numel() / probs.size(1));

  auto intersection = (target * probs).sum(reduce);
  auto denominator = (target * target).sum(reduce) + (probs * probs).sum(reduce);
  auto dice = (2 * intersection + config.smooth) / (denominator + config.smooth);
  auto log_likelihood = (target * torch::log(probs.clamp_min(config.prob_clamp))).sum(reduce) / voxels;

  return 1 - (config.dice_weight() * dice + log_likelihood).sum();
}

torch::Tensor one_hot_target(const torch::Tensor& labels, int64_t num_classes,
                             torch::ScalarType dtype) {
  TORCH_CHECK(labels.dim() == 3, "labels must be (batch, H, W)");
  auto as_long = labels.to(torch::kLong);
  if (as_long.numel() > 0) {
    TORCH_CHECK(as_long.min().item<int64_t>() >= 0 &&
                    as_long.max().item<int64_t>() < num_classes,
                "label outside [0, ", num_classes, ")");
  }
  return torch::one_hot(as_long, num_classes).permute({0, 3, 1, 2}).to(dtype);
}

torch::Tensor dice_ce_from_logits(const torch::Tensor& logits, const torch::Tensor& labels,
                                  const CombinedLossConfig& config) {
  TORCH_CHECK(logits.dim() == 4, "logits must be (batch, I, H, W)");
  return dice_ce_loss(torch::softmax(logits, 1),
                      one_hot_target(labels, logits.size(1), logits.scalar_type()), config);
}

}  // namespace mcfnet
