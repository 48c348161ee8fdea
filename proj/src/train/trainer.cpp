#include "mycloth/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

#include "mycloth/common/error.hpp"
#include "mycloth/nn/adam.hpp"
#include "mycloth/nn/archive.hpp"

namespace mycloth::train {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(initial_lr > 0)) throw ConfigError("initial_lr must be > 0");
  if (!(lr_decay_factor > 0 && lr_decay_factor <= 1)) throw ConfigError("lr_decay_factor must be in (0, 1]");
  if (lr_decay_every_epochs < 1) throw ConfigError("lr_decay_every_epochs must be >= 1");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) throw ConfigError("Adam betas must be in [0, 1)");
  if (max_steps && *max_steps < 1) throw ConfigError("max_steps must be >= 1");
}

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j = {{"batch_size", c.batch_size},
                      {"epochs", c.epochs},
                      {"initial_lr", c.initial_lr},
                      {"lr_decay_factor", c.lr_decay_factor},
                      {"lr_decay_every_epochs", c.lr_decay_every_epochs},
                      {"beta1", c.beta1},
                      {"beta2", c.beta2},
                      {"seed", c.seed},
                      {"ablation_flags", tryon::to_json(c.ablation_flags)}};
  if (c.max_steps) j["max_steps"] = *c.max_steps;
  if (c.output_dir) j["output_dir"] = c.output_dir->string();
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train must be a JSON object");
  static const char* known[] = {"batch_size", "epochs", "initial_lr", "lr_decay_factor", "lr_decay_every_epochs",
                                "beta1",      "beta2",  "seed",       "ablation_flags",  "max_steps",
                                "output_dir"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("unknown key '" + key + "' in train");
    }
  }
  TrainConfig c;
  try {
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("initial_lr")) c.initial_lr = j["initial_lr"].get<double>();
    if (j.contains("lr_decay_factor")) c.lr_decay_factor = j["lr_decay_factor"].get<double>();
    if (j.contains("lr_decay_every_epochs")) c.lr_decay_every_epochs = j["lr_decay_every_epochs"].get<int>();
    if (j.contains("beta1")) c.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) c.beta2 = j["beta2"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("max_steps")) c.max_steps = j["max_steps"].get<long long>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train section: ") + e.what());
  }
  if (j.contains("ablation_flags")) c.ablation_flags = tryon::ablation_flags_from_json(j["ablation_flags"]);
  c.validate();
  return c;
}

double learning_rate(const TrainConfig& config, int epoch) {
  return config.initial_lr * std::pow(config.lr_decay_factor, std::floor(epoch / config.lr_decay_every_epochs));
}

nlohmann::json to_json(const StepRecord& r) {
  return {{"step", r.step},
          {"epoch", r.epoch},
          {"lr", r.lr},
          {"total", r.total},
          {"similarity", r.similarity},
          {"perceptual", r.perceptual},
          {"similarity_per_scale", r.similarity_per_scale},
          {"perceptual_per_scale", r.perceptual_per_scale}};
}

std::vector<std::size_t> shuffled_indices(std::size_t n, nn::Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

namespace {

void dump_batch(const fs::path& dir, const std::vector<std::size_t>& indices, const DatasetSplit& data) {
  fs::create_directories(dir);
  nn::NamedTensors tensors;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    tryon::TryOnSample s = data.load(indices[k]);
    const std::string p = "sample" + std::to_string(k) + ".";
    tensors.emplace(p + "cloth", s.cloth);
    tensors.emplace(p + "person", s.person);
    tensors.emplace(p + "pose", s.pose);
    tensors.emplace(p + "agnostic", s.agnostic);
    if (s.ground_truth) tensors.emplace(p + "ground_truth", *s.ground_truth);
  }
  nn::save_tensors(dir / "batch", tensors);
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i : indices) j.push_back(i);
  std::ofstream(dir / "indices.json") << j.dump() << "\n";
}

}  // namespace

TrainResult train(tryon::TryOnNet& net, const TrainConfig& config, const DatasetSplit& data,
                  const tryon::FeatureExtractor& extractor, const StepCallback& on_step) {
  config.validate();
  if (data.size() == 0) throw ValidationError("training set is empty");
  const tryon::ModelConfig& model = net.config();

  nn::Adam optimizer(net.named_parameters(), {config.initial_lr, config.beta1, config.beta2, 1e-8});
  nn::Rng rng(config.seed);
  std::ofstream metrics;
  if (config.output_dir) {
    fs::create_directories(*config.output_dir);
    metrics.open(*config.output_dir / "metrics.jsonl", std::ios::trunc);
    if (!metrics) throw StorageError("cannot write " + (*config.output_dir / "metrics.jsonl").string());
  }

  TrainResult result;
  result.state.seed = config.seed;
  long long step = 0;
  const std::size_t n = data.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = learning_rate(config, epoch);
    optimizer.set_lr(lr);
    const std::vector<std::size_t> order = shuffled_indices(n, rng);
    for (std::size_t start = 0; start < n; start += batch) {
      if (config.max_steps && step >= *config.max_steps) return result;
      const std::vector<std::size_t> indices(order.begin() + static_cast<long>(start),
                                             order.begin() + static_cast<long>(std::min(n, start + batch)));
      StepRecord rec;
      rec.step = step;
      rec.epoch = epoch;
      rec.lr = lr;
      rec.similarity_per_scale.assign(static_cast<std::size_t>(model.num_scales), 0.0);
      rec.perceptual_per_scale.assign(static_cast<std::size_t>(model.num_scales), 0.0);
      optimizer.zero_grad();
      const double inv = 1.0 / static_cast<double>(indices.size());
      for (std::size_t idx : indices) {
        tryon::TryOnSample sample = data.load(idx);
        tryon::TryOnOutputs out = net.forward(sample);
        tryon::LossBreakdown loss = tryon::loss_total(out, sample, model, extractor);
        const double total = nn::scalar_value(loss.total);
        if (!std::isfinite(total)) {
          std::string where;
          if (config.output_dir) {
            const fs::path dir = *config.output_dir / "nonfinite_batch";
            dump_batch(dir, indices, data);
            where = "; batch written to " + dir.string();
          }
          throw NumericError("non-finite loss at step " + std::to_string(step) + " (epoch " + std::to_string(epoch) +
                             ", sample " + std::to_string(idx) + ")" + where);
        }
        nn::backward(nn::scale(loss.total, inv));
        rec.total += total * inv;
        for (std::size_t s = 0; s < loss.similarity.size(); ++s) {
          rec.similarity_per_scale[s] += loss.similarity[s] * inv;
          rec.perceptual_per_scale[s] += loss.perceptual[s] * inv;
        }
      }
      rec.similarity = rec.similarity_per_scale.back();
      rec.perceptual = rec.perceptual_per_scale.back();
      optimizer.step();
      if (metrics.is_open()) metrics << to_json(rec).dump() << "\n" << std::flush;
      if (on_step) on_step(rec);
      result.history.push_back(std::move(rec));
      ++step;
      result.state.step = step;
    }
    result.state.epoch = epoch + 1;
    if (config.output_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04d", epoch + 1);
      tryon::save_checkpoint(*config.output_dir / name, net, result.state, &optimizer);
    }
  }
  return result;
}

}  // namespace mycloth::train
