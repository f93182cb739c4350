#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mcfnet/train/trainer.hpp"

namespace mcfnet::train {

namespace {

nlohmann::json history_to_json(const std::vector<EpochRecord>& history) {
  auto out = nlohmann::json::array();
  for (const auto& r : history) {
    out.push_back({{"epoch", r.epoch},
                   {"lr", r.lr},
                   {"loss", r.loss},
                   {"set_losses", r.set_losses},
                   {"weights", r.weights},
                   {"train_dsc", r.train_dsc}});
  }
  return out;
}

std::vector<EpochRecord> history_from_json(const nlohmann::json& j) {
  std::vector<EpochRecord> history;
  for (const auto& item : j) {
    EpochRecord r;
    r.epoch = item.at("epoch").get<int64_t>();
    r.lr = item.at("lr").get<double>();
    r.loss = item.at("loss").get<double>();
    r.set_losses = item.at("set_losses").get<std::vector<double>>();
    r.weights = item.at("weights").get<std::vector<double>>();
    r.train_dsc = item.at("train_dsc").get<double>();
    history.push_back(std::move(r));
  }
  return history;
}

}  // namespace

Checkpoint Checkpoint::initial(const TrainConfig& config) {
  config.validate();
  torch::manual_seed(config.seed);
  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.model = MCFNet(config.model_config());
  ckpt.optimizer = std::make_unique<torch::optim::Adam>(
      ckpt.model->parameters(),
      torch::optim::AdamOptions(config.base_lr).weight_decay(config.weight_decay));
  ckpt.mfa = config.initial_mfa_state();
  ckpt.fingerprint = config.fingerprint();
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  torch::serialize::OutputArchive archive;
  torch::serialize::OutputArchive model_archive;
  ckpt.model->save(model_archive);
  archive.write("model", model_archive);
  torch::serialize::OutputArchive optimizer_archive;
  ckpt.optimizer->save(optimizer_archive);
  archive.write("optimizer", optimizer_archive);

  archive.write("config", c10::IValue(ckpt.config.to_ini()));
  archive.write("fingerprint", c10::IValue(ckpt.fingerprint));
  archive.write("epoch", c10::IValue(ckpt.epoch));
  archive.write("iterations", c10::IValue(ckpt.iterations));
  archive.write("mfa_weights", torch::tensor(ckpt.mfa.weights, torch::kDouble));
  archive.write("history", c10::IValue(history_to_json(ckpt.history).dump()));
  archive.save_to(path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw std::runtime_error("no checkpoint at " + path.string());
  }
  torch::serialize::InputArchive archive;
  archive.load_from(path.string());

  auto read_value = [&](const char* key) {
    c10::IValue value;
    if (!archive.try_read(key, value)) throw std::runtime_error(std::string("checkpoint lacks '") + key + "'");
    return value;
  };
  const auto config = parse_train_config(read_value("config").toStringRef());
  Checkpoint ckpt = Checkpoint::initial(config);
  ckpt.fingerprint = read_value("fingerprint").toStringRef();
  if (ckpt.fingerprint != config.fingerprint()) {
    throw std::runtime_error("checkpoint fingerprint does not match its stored config");
  }

  torch::serialize::InputArchive model_archive;
  archive.read("model", model_archive);
  ckpt.model->load(model_archive);
  torch::serialize::InputArchive optimizer_archive;
  archive.read("optimizer", optimizer_archive);
  ckpt.optimizer->load(optimizer_archive);

  ckpt.epoch = read_value("epoch").toInt();
  ckpt.iterations = read_value("iterations").toInt();
  torch::Tensor weights;
  archive.read("mfa_weights", weights);
  ckpt.mfa.weights.assign(weights.data_ptr<double>(), weights.data_ptr<double>() + weights.numel());
  ckpt.history = history_from_json(nlohmann::json::parse(read_value("history").toStringRef()));
  return ckpt;
}

}  // namespace mcfnet::train
