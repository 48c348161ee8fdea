#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

namespace mycloth::tryon {

// Module switches for the warping/generation ablation. Off means the module
// is replaced by its pass-through substitute.
struct AblationFlags {
  bool afew = true;
  bool frw_warp = true;
  bool frw_gen = true;

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct ModelConfig {
  int num_scales = 5;
  // Output widths of the stride-2 stages, one per scale, fine to coarse.
  std::vector<int> fpn_dims{64, 128, 256, 256, 256};
  // Width of every pyramid level after the lateral/top-down merge.
  int fpn_out_dim = 256;
  std::vector<int> afe_hidden_dims{512, 256, 128, 64};
  std::vector<int> gen_hidden_dims{32, 64, 128};
  int frw_hidden_dim = 64;
  int channel_reduction = 4;
  int pose_channels = 18;
  bool share_branch_params = false;
  bool zero_init_flow_heads = true;
  double lambda_s = 1.0;
  double lambda_per = 1.0;
  AblationFlags flags;
  std::uint64_t init_seed = 0;

  // Throws ConfigError.
  void validate() const;

  // Largest power of two that H and W must be divisible by.
  int spatial_multiple() const { return 1 << num_scales; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::json to_json(const ModelConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AblationFlags& flags);
AblationFlags ablation_flags_from_json(const nlohmann::json& j);

}  // namespace mycloth::tryon
