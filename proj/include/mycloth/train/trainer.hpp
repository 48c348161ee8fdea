#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "mycloth/tryon/checkpoint.hpp"
#include "mycloth/tryon/loss.hpp"
#include "mycloth/train/dataset.hpp"

namespace mycloth::train {

struct TrainConfig {
  int batch_size = 16;
  int epochs = 200;
  double initial_lr = 5e-5;
  double lr_decay_factor = 0.1;
  int lr_decay_every_epochs = 50;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  tryon::AblationFlags ablation_flags;
  // Stop after this many optimizer steps (the epoch in progress is not
  // checkpointed). Unset runs all epochs.
  std::optional<long long> max_steps;
  // Checkpoint per epoch under <dir>/epoch_NNNN and metrics.jsonl.
  std::optional<std::filesystem::path> output_dir;

  // batch_size >= 1, epochs >= 1, lr > 0, decay in (0, 1], every >= 1.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

// initial_lr * decay^floor(epoch / every)
double learning_rate(const TrainConfig& config, int epoch);

struct StepRecord {
  long long step = 0;  // 0-based
  int epoch = 0;
  double lr = 0;
  // Batch means.
  double total = 0;
  double similarity = 0;  // finest scale (y_p vs y_g)
  double perceptual = 0;  // finest scale
  std::vector<double> similarity_per_scale;
  std::vector<double> perceptual_per_scale;
};

nlohmann::json to_json(const StepRecord& record);

struct TrainResult {
  std::vector<StepRecord> history;
  tryon::TrainState state;
};

using StepCallback = std::function<void(const StepRecord&)>;

// Adam over the stepped schedule. Each batch is a deterministic slice of a
// per-epoch Fisher-Yates shuffle; gradients are averaged over the batch.
// A non-finite loss writes the batch to <output_dir>/nonfinite_batch (when
// set) and throws NumericError.
TrainResult train(tryon::TryOnNet& net, const TrainConfig& config, const DatasetSplit& data,
                  const tryon::FeatureExtractor& extractor, const StepCallback& on_step = {});

// Deterministic permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, nn::Rng& rng);

}  // namespace mycloth::train
