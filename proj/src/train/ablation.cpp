#include "mycloth/train/ablation.hpp"

#include <algorithm>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"

namespace mycloth::train {

std::vector<tryon::AblationFlags> ablation_flag_matrix() {
  return {{false, false, false}, {true, false, false}, {false, true, false}, {true, true, false}, {true, true, true}};
}

std::string ablation_label(const tryon::AblationFlags& f) {
  if (!f.afew && !f.frw_warp && !f.frw_gen) return "baseline";
  std::string s;
  if (f.afew) s += "+afew";
  if (f.frw_warp) s += "+frw_warp";
  if (f.frw_gen) s += "+frw_gen";
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string to_csv(const AblationTable& table) {
  std::string out = "config,afew,frw_warp,frw_gen,parameters,median_final_loss,final_losses,ssim,psnr\n";
  for (const AblationRow& r : table.rows) {
    std::string losses;
    for (std::size_t i = 0; i < r.final_losses.size(); ++i) {
      if (i) losses += ";";
      losses += fmt::format("{:.6f}", r.final_losses[i]);
    }
    out += fmt::format("{},{},{},{},{},{:.6f},{},{:.6f},{}\n", ablation_label(r.flags), int(r.flags.afew),
                       int(r.flags.frw_warp), int(r.flags.frw_gen), r.parameter_count, r.median_final_loss, losses,
                       r.ssim, r.psnr_infinite ? std::string("inf") : fmt::format("{:.4f}", r.psnr));
  }
  return out;
}

AblationTable run_ablation(const AblationOptions& options, const DatasetSplit& train_data,
                           const DatasetSplit& eval_data, const tryon::FeatureExtractor& extractor) {
  if (options.seeds.empty()) throw ConfigError("ablation needs at least one seed");
  if (options.final_window < 1) throw ConfigError("final_window must be >= 1");
  AblationTable table;
  for (const tryon::AblationFlags& flags : ablation_flag_matrix()) {
    AblationRow row;
    row.flags = flags;
    std::vector<std::shared_ptr<tryon::TryOnNet>> nets;
    for (std::uint64_t seed : options.seeds) {
      tryon::ModelConfig model = options.model;
      model.flags = flags;
      model.init_seed = seed;
      auto net = std::make_shared<tryon::TryOnNet>(model);
      row.parameter_count = net->parameter_count();
      TrainConfig tc = options.train;
      tc.seed = seed;
      tc.ablation_flags = flags;
      if (options.output_dir) tc.output_dir = *options.output_dir / fmt::format("{}_seed{}", ablation_label(flags), seed);
      const TrainResult result = train(*net, tc, train_data, extractor);
      const std::size_t window = std::min<std::size_t>(options.final_window, result.history.size());
      double sum = 0;
      for (std::size_t i = result.history.size() - window; i < result.history.size(); ++i) sum += result.history[i].total;
      row.final_losses.push_back(sum / static_cast<double>(window));
      nets.push_back(std::move(net));
      spdlog::info("ablation {} seed {}: final loss {:.5f}", ablation_label(flags), seed, row.final_losses.back());
    }
    row.median_final_loss = median(row.final_losses);
    // Evaluate the seed whose loss is the (lower) median.
    std::size_t pick = 0;
    for (std::size_t i = 0; i < row.final_losses.size(); ++i) {
      if (std::abs(row.final_losses[i] - row.median_final_loss) < std::abs(row.final_losses[pick] - row.median_final_loss))
        pick = i;
    }
    tryon::NetworkPredictor predictor(nets[pick], ablation_label(flags));
    const MetricsReport report = evaluate(predictor, eval_data, RandomProjectionEmbedder(), SoftmaxProjectionClassifier());
    row.ssim = report.ssim;
    row.psnr = report.psnr;
    row.psnr_infinite = report.psnr_infinite;
    table.rows.push_back(std::move(row));
  }
  if (options.output_dir) atomic_write(*options.output_dir / "ablation.csv", to_csv(table));
  return table;
}

}  // namespace mycloth::train
