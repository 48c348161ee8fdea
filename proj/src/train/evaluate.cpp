#include "mycloth/train/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"

namespace mycloth::train {

bool MetricsReport::within_ranges() const {
  const double tol = 1e-9;
  if (!(ssim >= -1 - tol && ssim <= 1 + tol)) return false;
  if (!psnr_infinite && !(psnr >= 0)) return false;
  if (!(fid >= 0)) return false;
  if (!(inception_score >= 1 - tol)) return false;
  return n_samples > 0;
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"ssim", r.ssim},
          {"psnr", r.psnr_infinite ? nlohmann::json(nullptr) : nlohmann::json(r.psnr)},
          {"psnr_infinite", r.psnr_infinite},
          {"psnr_infinite_count", r.psnr_infinite_count},
          {"fid", r.fid},
          {"inception_score", r.inception_score},
          {"n_samples", r.n_samples},
          {"checkpoint_id", r.checkpoint_id},
          {"embedder", r.embedder},
          {"classifier", r.classifier}};
}

MetricsReport metrics_report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    r.ssim = j.at("ssim").get<double>();
    r.psnr_infinite = j.at("psnr_infinite").get<bool>();
    r.psnr = r.psnr_infinite ? 0.0 : j.at("psnr").get<double>();
    r.psnr_infinite_count = j.at("psnr_infinite_count").get<int>();
    r.fid = j.at("fid").get<double>();
    r.inception_score = j.at("inception_score").get<double>();
    r.n_samples = j.at("n_samples").get<int>();
    r.checkpoint_id = j.at("checkpoint_id").get<std::string>();
    r.embedder = j.at("embedder").get<std::string>();
    r.classifier = j.at("classifier").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics report: ") + e.what(), 0);
  }
  return r;
}

namespace {

struct PerSample {
  double ssim = 0;
  Psnr psnr;
  std::vector<double> embed_pred, embed_real, probs;
};

PerSample score(const tryon::Predictor& predictor, const DatasetSplit& data, std::size_t i,
                const ImageEmbedder& embedder, const ImageClassifier& classifier) {
  const tryon::TryOnSample sample = data.load(i);
  if (!sample.ground_truth) throw ValidationError("sample " + std::to_string(i) + " has no ground truth");
  const Tensor pred = to_unit_range(predictor.predict(sample));
  const Tensor real = to_unit_range(*sample.ground_truth);
  PerSample s;
  s.ssim = ssim(pred, real);
  s.psnr = psnr(pred, real);
  s.embed_pred = embedder.embed(pred);
  s.embed_real = embedder.embed(real);
  s.probs = classifier.classify(pred);
  return s;
}

}  // namespace

MetricsReport evaluate(const tryon::Predictor& predictor, const DatasetSplit& data, const ImageEmbedder& embedder,
                       const ImageClassifier& classifier, const EvaluateOptions& options) {
  const std::size_t n = data.size();
  if (n == 0) throw ValidationError("evaluation split is empty");
  if (options.workers < 1) throw ConfigError("workers must be >= 1");
  std::vector<PerSample> results(n);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = score(predictor, data, i, embedder, classifier);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.workers), n));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  MetricsReport r;
  r.n_samples = static_cast<int>(n);
  r.checkpoint_id = predictor.id();
  r.embedder = embedder.name();
  r.classifier = classifier.name();
  FeatureRows fake, real, probs;
  double psnr_sum = 0;
  int finite = 0;
  for (const PerSample& s : results) {
    r.ssim += s.ssim / static_cast<double>(n);
    if (s.psnr.infinite) {
      ++r.psnr_infinite_count;
    } else {
      psnr_sum += s.psnr.db;
      ++finite;
    }
    fake.push_back(s.embed_pred);
    real.push_back(s.embed_real);
    probs.push_back(s.probs);
  }
  r.psnr_infinite = finite == 0;
  r.psnr = finite > 0 ? psnr_sum / finite : 0.0;
  r.fid = n >= 2 ? fid(fake, real) : 0.0;
  if (n < 2) spdlog::warn("fid needs at least 2 samples; reported as 0");
  r.inception_score = inception_score(probs);

  if (options.report_path) {
    atomic_write(*options.report_path, to_json(r).dump(2) + "\n");
  }
  spdlog::info("evaluated {} samples with {}: ssim {:.4f} psnr {} fid {:.4f} is {:.4f}", n, r.checkpoint_id, r.ssim,
               r.psnr_infinite ? std::string("inf") : fmt::format("{:.3f}", r.psnr), r.fid, r.inception_score);
  return r;
}

}  // namespace mycloth::train
