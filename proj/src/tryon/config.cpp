#include "mycloth/tryon/config.hpp"

#include <set>
#include <string>

#include "mycloth/common/error.hpp"

namespace mycloth::tryon {

namespace {

void require_positive(const std::vector<int>& dims, const char* field) {
  for (int d : dims) {
    if (d <= 0) throw ConfigError(std::string(field) + " entries must be positive");
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const char* section) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(std::string("unknown key '") + key + "' in " + section);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const char* section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(section) + "." + key + " has the wrong type");
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (num_scales < 1 || num_scales > 8) throw ConfigError("num_scales must be in [1, 8]");
  if (static_cast<int>(fpn_dims.size()) != num_scales) {
    throw ConfigError("fpn_dims must have one entry per scale (" + std::to_string(num_scales) + ")");
  }
  require_positive(fpn_dims, "fpn_dims");
  if (fpn_out_dim <= 0) throw ConfigError("fpn_out_dim must be positive");
  if (afe_hidden_dims.size() != 4) throw ConfigError("afe_hidden_dims must list exactly 4 widths");
  require_positive(afe_hidden_dims, "afe_hidden_dims");
  if (gen_hidden_dims.size() != 3) throw ConfigError("gen_hidden_dims must list exactly 3 widths");
  require_positive(gen_hidden_dims, "gen_hidden_dims");
  if (frw_hidden_dim <= 0) throw ConfigError("frw_hidden_dim must be positive");
  if (channel_reduction <= 0) throw ConfigError("channel_reduction must be positive");
  if (pose_channels < 0) throw ConfigError("pose_channels must be >= 0");
  // The branches see different inputs (3 vs pose + 3 channels); sharing is
  // kept as a field for config fidelity but not supported.
  if (share_branch_params) throw ConfigError("share_branch_params = true is not supported");
  if (!(lambda_s > 0) || !(lambda_per > 0)) throw ConfigError("lambda_s and lambda_per must be > 0");
}

nlohmann::json to_json(const AblationFlags& flags) {
  return {{"afew", flags.afew}, {"frw_warp", flags.frw_warp}, {"frw_gen", flags.frw_gen}};
}

AblationFlags ablation_flags_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"afew", "frw_warp", "frw_gen"}, "ablation_flags");
  AblationFlags f;
  read(j, "afew", f.afew, "ablation_flags");
  read(j, "frw_warp", f.frw_warp, "ablation_flags");
  read(j, "frw_gen", f.frw_gen, "ablation_flags");
  return f;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"num_scales", c.num_scales},
          {"fpn_dims", c.fpn_dims},
          {"fpn_out_dim", c.fpn_out_dim},
          {"afe_hidden_dims", c.afe_hidden_dims},
          {"gen_hidden_dims", c.gen_hidden_dims},
          {"frw_hidden_dim", c.frw_hidden_dim},
          {"channel_reduction", c.channel_reduction},
          {"pose_channels", c.pose_channels},
          {"share_branch_params", c.share_branch_params},
          {"zero_init_flow_heads", c.zero_init_flow_heads},
          {"lambda_s", c.lambda_s},
          {"lambda_per", c.lambda_per},
          {"ablation_flags", to_json(c.flags)},
          {"init_seed", c.init_seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  const char* s = "model";
  reject_unknown(j,
                 {"num_scales", "fpn_dims", "fpn_out_dim", "afe_hidden_dims", "gen_hidden_dims", "frw_hidden_dim",
                  "channel_reduction", "pose_channels", "share_branch_params", "zero_init_flow_heads", "lambda_s",
                  "lambda_per", "ablation_flags", "init_seed"},
                 s);
  ModelConfig c;
  read(j, "num_scales", c.num_scales, s);
  read(j, "fpn_dims", c.fpn_dims, s);
  read(j, "fpn_out_dim", c.fpn_out_dim, s);
  read(j, "afe_hidden_dims", c.afe_hidden_dims, s);
  read(j, "gen_hidden_dims", c.gen_hidden_dims, s);
  read(j, "frw_hidden_dim", c.frw_hidden_dim, s);
  read(j, "channel_reduction", c.channel_reduction, s);
  read(j, "pose_channels", c.pose_channels, s);
  read(j, "share_branch_params", c.share_branch_params, s);
  read(j, "zero_init_flow_heads", c.zero_init_flow_heads, s);
  read(j, "lambda_s", c.lambda_s, s);
  read(j, "lambda_per", c.lambda_per, s);
  read(j, "init_seed", c.init_seed, s);
  if (j.contains("ablation_flags")) c.flags = ablation_flags_from_json(j.at("ablation_flags"));
  c.validate();
  return c;
}

}  // namespace mycloth::tryon
