#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mycloth/nn/adam.hpp"
#include "mycloth/tryon/predictor.hpp"

namespace mycloth::tryon {

struct TrainState {
  int epoch = 0;          // epochs completed
  long long step = 0;     // optimizer steps completed
  std::uint64_t seed = 0;
  // Optimizer moments file inside the checkpoint directory, if saved.
  std::optional<std::string> optimizer_file;
};

nlohmann::json to_json(const TrainState& state);
TrainState train_state_from_json(const nlohmann::json& j);

// Directory with `weights`, `model_config.json`, `train_state.json` and,
// when an optimizer is given, `optimizer`.
void save_checkpoint(const std::filesystem::path& dir, const TryOnNet& net, const TrainState& state,
                     const nn::Adam* optimizer = nullptr);

struct LoadedCheckpoint {
  std::shared_ptr<TryOnNet> net;
  TrainState state;
  std::string id;  // first 16 hex digits of sha256(weights)
};

// Throws LoadError naming the offending file.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);
void load_optimizer_state(const std::filesystem::path& dir, const TrainState& state, nn::Adam& optimizer);

// "identity" selects IdentityTryOn, "oracle" OracleCheckpoint; anything
// else is a checkpoint directory.
std::shared_ptr<const Predictor> load_predictor(const std::string& spec);

}  // namespace mycloth::tryon
