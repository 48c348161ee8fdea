#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mycloth/train/trainer.hpp"

namespace mycloth::train {

// Narrow model for 64x64 toy data: five scales like the full model, with
// every width cut down so a CPU step takes well under a second.
tryon::ModelConfig toy_model_config();

// Contents of the --config file of train/ablate:
//   {"model": {...}, "train": {...},
//    "toy": {"samples": 4, "seed": 7},
//    "perceptual": {"extractor": "vgg19" | "random-conv", "weights": "<archive>"}}
struct RunConfig {
  tryon::ModelConfig model;
  TrainConfig train;
  int toy_samples = 4;
  std::uint64_t toy_seed = 7;
  std::string extractor = "vgg19";
  std::optional<std::filesystem::path> vgg_weights;
};

// `toy` picks toy_model_config() as the model default.
RunConfig run_config_from_json(const nlohmann::json& j, bool toy);
RunConfig load_run_config(const std::optional<std::filesystem::path>& path, bool toy);

std::unique_ptr<tryon::FeatureExtractor> make_extractor(const RunConfig& config);

}  // namespace mycloth::train
