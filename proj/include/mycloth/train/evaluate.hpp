#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mycloth/train/dataset.hpp"
#include "mycloth/train/metrics.hpp"
#include "mycloth/tryon/predictor.hpp"

namespace mycloth::train {

struct MetricsReport {
  double ssim = 0;
  // Mean per-image PSNR over images that differ from their reference;
  // psnr_infinite is set only when every image is identical.
  double psnr = 0;
  bool psnr_infinite = false;
  int psnr_infinite_count = 0;
  double fid = 0;
  double inception_score = 0;
  int n_samples = 0;
  std::string checkpoint_id;
  std::string embedder;
  std::string classifier;

  // ssim in [-1, 1], psnr >= 0 or infinite, fid >= 0, is >= 1 (within 1e-9).
  bool within_ranges() const;
};

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

struct EvaluateOptions {
  int workers = 1;
  std::optional<std::filesystem::path> report_path;  // writes report.json
};

// Paired evaluation: every sample needs a ground truth. Per-sample results
// are gathered by index and reduced in index order, so the report does not
// depend on the worker count.
MetricsReport evaluate(const tryon::Predictor& predictor, const DatasetSplit& data, const ImageEmbedder& embedder,
                       const ImageClassifier& classifier, const EvaluateOptions& options = {});

}  // namespace mycloth::train
