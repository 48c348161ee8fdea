#include "mycloth/train/run_config.hpp"

#include <spdlog/spdlog.h>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"

namespace mycloth::train {

using nlohmann::json;

tryon::ModelConfig toy_model_config() {
  tryon::ModelConfig m;
  m.num_scales = 5;
  m.fpn_dims = {8, 8, 16, 16, 16};
  m.fpn_out_dim = 8;
  m.afe_hidden_dims = {16, 8, 8, 8};
  m.gen_hidden_dims = {8, 8, 8};
  m.frw_hidden_dim = 8;
  m.channel_reduction = 4;
  m.pose_channels = kToyPoseChannels;
  m.init_seed = 1;
  return m;
}

RunConfig run_config_from_json(const json& j, bool toy) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "model" && key != "train" && key != "toy" && key != "perceptual" && key != "service" &&
        key != "cloth_edit" && key != "paint") {
      throw ConfigError("unknown config section '" + key + "'");
    }
  }
  RunConfig c;
  if (toy) c.model = toy_model_config();
  if (j.contains("model")) {
    json merged = tryon::to_json(c.model);
    merged.merge_patch(j["model"]);
    c.model = tryon::model_config_from_json(merged);
  }
  if (j.contains("train")) c.train = train_config_from_json(j["train"]);
  try {
    if (j.contains("toy")) {
      const json& t = j["toy"];
      for (const auto& [key, value] : t.items())
        if (key != "samples" && key != "seed") throw ConfigError("unknown key 'toy." + key + "'");
      c.toy_samples = t.value("samples", c.toy_samples);
      c.toy_seed = t.value("seed", c.toy_seed);
    }
    if (j.contains("perceptual")) {
      const json& p = j["perceptual"];
      for (const auto& [key, value] : p.items())
        if (key != "extractor" && key != "weights") throw ConfigError("unknown key 'perceptual." + key + "'");
      c.extractor = p.value("extractor", c.extractor);
      if (p.contains("weights") && !p["weights"].is_null()) c.vgg_weights = p["weights"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.extractor != "vgg19" && c.extractor != "random-conv") {
    throw ConfigError("perceptual.extractor must be 'vgg19' or 'random-conv'");
  }
  if (c.toy_samples < 1) throw ConfigError("toy.samples must be >= 1");
  // One source of truth for the flags: the train section wins when it sets them.
  if (j.contains("train") && j["train"].contains("ablation_flags")) {
    c.model.flags = c.train.ablation_flags;
  } else {
    c.train.ablation_flags = c.model.flags;
  }
  c.model.validate();
  return c;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path, bool toy) {
  if (!path) return run_config_from_json(json::object(), toy);
  json j;
  try {
    j = json::parse(read_text_file(*path));
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path->string() + ": " + e.what());
  } catch (const LoadError& e) {
    throw ConfigError(e.what());
  }
  return run_config_from_json(j, toy);
}

std::unique_ptr<tryon::FeatureExtractor> make_extractor(const RunConfig& c) {
  if (c.extractor == "random-conv") return std::make_unique<tryon::RandomConvExtractor>(5);
  auto vgg = std::make_unique<tryon::Vgg19Extractor>();
  if (c.vgg_weights) {
    vgg->load(*c.vgg_weights);
  } else {
    spdlog::warn("no VGG19 weights configured; the perceptual loss uses seeded random weights");
  }
  return vgg;
}

}  // namespace mycloth::train
