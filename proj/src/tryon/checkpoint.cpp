#include "mycloth/tryon/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"
#include "mycloth/nn/archive.hpp"

namespace mycloth::tryon {

namespace fs = std::filesystem;

nlohmann::json to_json(const TrainState& s) {
  nlohmann::json j = {{"epoch", s.epoch}, {"step", s.step}, {"seed", s.seed}};
  j["optimizer_moments"] = s.optimizer_file ? nlohmann::json(*s.optimizer_file) : nlohmann::json(nullptr);
  return j;
}

TrainState train_state_from_json(const nlohmann::json& j) {
  TrainState s;
  try {
    s.epoch = j.at("epoch").get<int>();
    s.step = j.at("step").get<long long>();
    s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("optimizer_moments") && !j.at("optimizer_moments").is_null()) {
      s.optimizer_file = j.at("optimizer_moments").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed train_state.json: ") + e.what());
  }
  return s;
}

void save_checkpoint(const fs::path& dir, const TryOnNet& net, const TrainState& state, const nn::Adam* optimizer) {
  fs::create_directories(dir);
  nn::save_tensors(dir / "weights", net.state());
  atomic_write(dir / "model_config.json", to_json(net.config()).dump(2) + "\n");
  TrainState s = state;
  if (optimizer) {
    nn::save_tensors(dir / "optimizer", optimizer->state());
    s.optimizer_file = "optimizer";
  }
  atomic_write(dir / "train_state.json", to_json(s).dump(2) + "\n");
}

namespace {

nlohmann::json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw LoadError("missing " + path.string());
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed " + path.string() + ": " + e.what());
  }
}

}  // namespace

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LoadError("checkpoint directory " + dir.string() + " does not exist");
  ModelConfig config;
  try {
    config = model_config_from_json(read_json(dir / "model_config.json"));
  } catch (const ConfigError& e) {
    throw LoadError((dir / "model_config.json").string() + ": " + e.what());
  }
  LoadedCheckpoint out;
  out.state = train_state_from_json(read_json(dir / "train_state.json"));
  out.net = std::make_shared<TryOnNet>(config);
  const fs::path weights = dir / "weights";
  nn::NamedTensors tensors = nn::load_tensors(weights);
  try {
    out.net->load_state(tensors);
  } catch (const LoadError& e) {
    throw LoadError(weights.string() + ": " + e.what());
  }
  std::ifstream in(weights, std::ios::binary);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  out.id = sha256_hex(bytes).substr(0, 16);
  return out;
}

void load_optimizer_state(const fs::path& dir, const TrainState& state, nn::Adam& optimizer) {
  if (!state.optimizer_file) throw LoadError("checkpoint " + dir.string() + " has no optimizer state");
  optimizer.load_state(nn::load_tensors(dir / *state.optimizer_file));
}

std::shared_ptr<const Predictor> load_predictor(const std::string& spec) {
  if (spec == "identity") return std::make_shared<IdentityTryOn>();
  if (spec == "oracle") return std::make_shared<OracleCheckpoint>();
  LoadedCheckpoint ckpt = load_checkpoint(spec);
  return std::make_shared<NetworkPredictor>(ckpt.net, ckpt.id);
}

}  // namespace mycloth::tryon
