#include "mcfnet/train/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace mcfnet::train {
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"train",
       {"max_epochs", "batch_size", "base_lr", "weight_decay", "max_iterations", "val_fraction", "seed"}},
      {"model",
       {"mode", "adaptive_mfa", "num_classes", "in_channels", "width_divisor", "se_reduction",
        "lat_heads", "cab_heads", "fcb_input_size", "head_kernel", "final_weights"}},
      {"mfa", {"policy", "rho", "tau", "initial_weight", "set_reduction"}},
      {"loss", {"lambda", "smooth", "prob_clamp"}},
      {"data", {"dataset", "out_dir"}},
  };
  return keys;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "on" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "off" || text == "0" || text == "no") return false;
  throw std::invalid_argument("config key " + key + ": expected a boolean, got '" + text + "'");
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  T value{};
  is >> value;
  if (is.fail() || !is.eof()) {
    throw std::invalid_argument("config key " + key + ": cannot parse '" + text + "'");
  }
  return value;
}

FinalWeights parse_final_weights(const std::string& text) {
  std::istringstream is(text);
  std::vector<double> values;
  std::string item;
  while (std::getline(is, item, ',')) values.push_back(parse_number<double>(item, "model.final_weights"));
  if (values.size() != 4) throw std::invalid_argument("model.final_weights needs four values u,v,w,x");
  return {values[0], values[1], values[2], values[3]};
}

SetReduction parse_set_reduction(const std::string& text) {
  if (text == "sum") return SetReduction::Sum;
  if (text == "mean") return SetReduction::Mean;
  throw std::invalid_argument("mfa.set_reduction must be sum or mean, got '" + text + "'");
}

}  // namespace

ModelConfig TrainConfig::model_config() const {
  ModelConfig base;
  base.seb.in_channels = in_channels;
  base.seb.se_reduction = se_reduction;
  base.fcb.in_channels = in_channels;
  ModelConfig config = base.scaled_down(width_divisor);
  config.mode = mode;
  config.num_classes = num_classes;
  config.fcb_input_size = fcb_input_size;
  config.lat_heads = lat_heads;
  config.cab_heads = cab_heads;
  config.head_kernel = head_kernel;
  config.final_weights = final_weights;
  return config;
}

CombinedLossConfig TrainConfig::loss_config() const {
  CombinedLossConfig config;
  config.num_classes = num_classes;
  config.lambda = lambda;
  config.smooth = smooth;
  config.prob_clamp = prob_clamp;
  return config;
}

MfaWeightState TrainConfig::initial_mfa_state() const {
  return MfaWeightState::initial(4, initial_weight, policy, rho, tau);
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
  };
  require(max_epochs > 0, "train.max_epochs must be positive");
  require(batch_size > 0, "train.batch_size must be positive");
  require(base_lr > 0 && std::isfinite(base_lr), "train.base_lr must be positive");
  require(weight_decay >= 0, "train.weight_decay must be non-negative");
  require(max_iterations >= 0, "train.max_iterations must be non-negative");
  require(val_fraction >= 0 && val_fraction < 1, "train.val_fraction must lie in [0, 1)");
  require(num_classes >= 2, "model.num_classes must be at least 2");
  require(in_channels >= 1, "model.in_channels must be positive");
  require(width_divisor >= 1, "model.width_divisor must be positive");
  require(rho >= 0 && rho <= 1, "mfa.rho must lie in [0, 1]");
  require(tau > 0, "mfa.tau must be positive");
  require(initial_weight > 0, "mfa.initial_weight must be positive");
  require(smooth > 0 && prob_clamp > 0, "loss epsilons must be positive");
  require(!lambda || *lambda > 0, "loss.lambda must be positive");
  model_config().validate();
}

std::string TrainConfig::to_ini() const {
  std::ostringstream os;
  os << "[train]\n"
     << "max_epochs = " << max_epochs << "\n"
     << "batch_size = " << batch_size << "\n"
     << "base_lr = " << format_double(base_lr) << "\n"
     << "weight_decay = " << format_double(weight_decay) << "\n"
     << "max_iterations = " << max_iterations << "\n"
     << "val_fraction = " << format_double(val_fraction) << "\n"
     << "seed = " << seed << "\n\n"
     << "[model]\n"
     << "mode = " << to_string(mode) << "\n"
     << "adaptive_mfa = " << (adaptive_mfa ? "true" : "false") << "\n"
     << "num_classes = " << num_classes << "\n"
     << "in_channels = " << in_channels << "\n"
     << "width_divisor = " << width_divisor << "\n"
     << "se_reduction = " << se_reduction << "\n"
     << "lat_heads = " << lat_heads << "\n"
     << "cab_heads = " << cab_heads << "\n"
     << "fcb_input_size = " << fcb_input_size << "\n"
     << "head_kernel = " << head_kernel << "\n"
     << "final_weights = " << format_double(final_weights.u) << "," << format_double(final_weights.v)
     << "," << format_double(final_weights.w) << "," << format_double(final_weights.x) << "\n\n"
     << "[mfa]\n"
     << "policy = " << to_string(policy) << "\n"
     << "rho = " << format_double(rho) << "\n"
     << "tau = " << format_double(tau) << "\n"
     << "initial_weight = " << format_double(initial_weight) << "\n"
     << "set_reduction = " << (set_reduction == SetReduction::Sum ? "sum" : "mean") << "\n\n"
     << "[loss]\n";
  if (lambda) os << "lambda = " << format_double(*lambda) << "\n";
  os << "smooth = " << format_double(smooth) << "\n"
     << "prob_clamp = " << format_double(prob_clamp) << "\n\n"
     << "[data]\n"
     << "dataset = " << dataset.string() << "\n"
     << "out_dir = " << out_dir.string() << "\n";
  return os.str();
}

std::string TrainConfig::fingerprint() const {
  uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : to_ini()) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

TrainConfig parse_train_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }

  TrainConfig c;
  for (const auto& [section, entries] : tree) {
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) {
      if (entries.empty()) throw std::invalid_argument("config key '" + section + "' is outside any section");
      throw std::invalid_argument("unknown config section [" + section + "]");
    }
    for (const auto& [key, node] : entries) {
      if (!known->second.count(key)) {
        throw std::invalid_argument("unknown config key " + section + "." + key);
      }
      const std::string full = section + "." + key;
      const std::string value = node.get_value<std::string>();
      if (full == "train.max_epochs") c.max_epochs = parse_number<int64_t>(value, full);
      else if (full == "train.batch_size") c.batch_size = parse_number<int64_t>(value, full);
      else if (full == "train.base_lr") c.base_lr = parse_number<double>(value, full);
      else if (full == "train.weight_decay") c.weight_decay = parse_number<double>(value, full);
      else if (full == "train.max_iterations") c.max_iterations = parse_number<int64_t>(value, full);
      else if (full == "train.val_fraction") c.val_fraction = parse_number<double>(value, full);
      else if (full == "train.seed") c.seed = parse_number<uint64_t>(value, full);
      else if (full == "model.mode") c.mode = parse_arch_mode(value);
      else if (full == "model.adaptive_mfa") c.adaptive_mfa = parse_bool(value, full);
      else if (full == "model.num_classes") c.num_classes = parse_number<int64_t>(value, full);
      else if (full == "model.in_channels") c.in_channels = parse_number<int64_t>(value, full);
      else if (full == "model.width_divisor") c.width_divisor = parse_number<int64_t>(value, full);
      else if (full == "model.se_reduction") c.se_reduction = parse_number<int64_t>(value, full);
      else if (full == "model.lat_heads") c.lat_heads = parse_number<int64_t>(value, full);
      else if (full == "model.cab_heads") c.cab_heads = parse_number<int64_t>(value, full);
      else if (full == "model.fcb_input_size") c.fcb_input_size = parse_number<int64_t>(value, full);
      else if (full == "model.head_kernel") c.head_kernel = parse_number<int64_t>(value, full);
      else if (full == "model.final_weights") c.final_weights = parse_final_weights(value);
      else if (full == "mfa.policy") c.policy = parse_weight_policy(value);
      else if (full == "mfa.rho") c.rho = parse_number<double>(value, full);
      else if (full == "mfa.tau") c.tau = parse_number<double>(value, full);
      else if (full == "mfa.initial_weight") c.initial_weight = parse_number<double>(value, full);
      else if (full == "mfa.set_reduction") c.set_reduction = parse_set_reduction(value);
      else if (full == "loss.lambda") c.lambda = parse_number<double>(value, full);
      else if (full == "loss.smooth") c.smooth = parse_number<double>(value, full);
      else if (full == "loss.prob_clamp") c.prob_clamp = parse_number<double>(value, full);
      else if (full == "data.dataset") c.dataset = value;
      else if (full == "data.out_dir") c.out_dir = value;
    }
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_train_config(buffer.str());
}

double lr_schedule(int64_t epoch, double base_lr, int64_t max_epochs) {
  if (max_epochs < 1 || epoch < 0 || epoch >= max_epochs) {
    throw std::out_of_range("epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(max_epochs) + ")");
  }
  return 0.5 * base_lr *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(max_epochs)));
}

std::vector<AblationPreset> ablation_presets() {
  return {
      {"SEB", ArchMode::SebOnly, false},
      {"FCB", ArchMode::FcbOnly, false},
      {"SEB+Adaptive-MFA", ArchMode::SebOnly, true},
      {"FCB+Adaptive-MFA", ArchMode::FcbOnly, true},
      {"SEB+FCB", ArchMode::Cascade, false},
      {"SEB+FCB+Adaptive-MFA", ArchMode::Cascade, true},
  };
}

}  // namespace mcfnet::train
