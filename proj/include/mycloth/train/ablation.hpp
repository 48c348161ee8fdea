#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mycloth/train/evaluate.hpp"
#include "mycloth/train/trainer.hpp"

namespace mycloth::train {

// Baseline, +AFEW, +FRW(warp), +AFEW+FRW(warp), all.
std::vector<tryon::AblationFlags> ablation_flag_matrix();
std::string ablation_label(const tryon::AblationFlags& flags);

struct AblationOptions {
  tryon::ModelConfig model;  // flags and init_seed are overridden per run
  TrainConfig train;         // likewise
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  // Final loss = mean total loss over this many trailing steps.
  int final_window = 10;
  std::optional<std::filesystem::path> output_dir;  // ablation.csv
};

struct AblationRow {
  tryon::AblationFlags flags;
  std::size_t parameter_count = 0;
  std::vector<double> final_losses;  // per seed
  double median_final_loss = 0;
  // Evaluation of the median-seed model on the evaluation split.
  double ssim = 0;
  double psnr = 0;
  bool psnr_infinite = false;
};

struct AblationTable {
  std::vector<AblationRow> rows;
};

std::string to_csv(const AblationTable& table);

AblationTable run_ablation(const AblationOptions& options, const DatasetSplit& train_data,
                           const DatasetSplit& eval_data, const tryon::FeatureExtractor& extractor);

double median(std::vector<double> values);

}  // namespace mycloth::train
