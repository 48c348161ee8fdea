#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mycloth/nn/tensor.hpp"

namespace mycloth::train {

using nn::Tensor;

// All image metrics take (C, H, W) tensors with values in [0, 1]; C is 1 or 3.

// Luminance 0.299 R + 0.587 G + 0.114 B; single-channel input is returned as is.
Tensor to_luminance(const Tensor& image);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

// Mean SSIM over all fully contained 11x11 Gaussian windows (sigma 1.5,
// dynamic range 1) of the luminance images. Throws ShapeError on mismatched
// or smaller-than-window inputs.
double ssim(const Tensor& a, const Tensor& b);

struct Psnr {
  double db = 0;
  bool infinite = false;  // identical inputs
};

// 10 log10(1 / MSE).
Psnr psnr(const Tensor& a, const Tensor& b);

using FeatureRows = std::vector<std::vector<double>>;

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2) with
// unbiased covariances regularized by eps * I. Needs >= 2 rows per set.
// eps = 0 with a singular covariance throws NumericError.
double fid(const FeatureRows& a, const FeatureRows& b, double eps = 1e-6);

// Same distance from moments; covariances as row-major d x d.
double frechet_distance(const std::vector<double>& mu_a, const std::vector<double>& cov_a,
                        const std::vector<double>& mu_b, const std::vector<double>& cov_b, double eps = 1e-6);

// exp(mean_x KL(p(y|x) || p(y))), one split. Rows must be distributions.
double inception_score(const FeatureRows& class_probabilities);

// Image embedding for FID.
class ImageEmbedder {
 public:
  virtual ~ImageEmbedder() = default;
  virtual std::vector<double> embed(const Tensor& image01) const = 0;
  virtual std::string name() const = 0;
};

// Class posterior for IS.
class ImageClassifier {
 public:
  virtual ~ImageClassifier() = default;
  virtual std::vector<double> classify(const Tensor& image01) const = 0;
  virtual std::string name() const = 0;
};

// Adaptive average pooling of each channel onto an 8x8 grid.
std::vector<double> pooled_descriptor(const Tensor& image01);

// Fixed Gaussian random projection of the pooled descriptor.
class RandomProjectionEmbedder final : public ImageEmbedder {
 public:
  explicit RandomProjectionEmbedder(std::uint64_t seed = 2048, int dim = 16);
  std::vector<double> embed(const Tensor& image01) const override;
  std::string name() const override { return "random-projection"; }

 private:
  int dim_;
  std::vector<double> weights_;  // dim x (3 * 64)
};

// Softmax over a fixed random linear map of the pooled descriptor.
class SoftmaxProjectionClassifier final : public ImageClassifier {
 public:
  explicit SoftmaxProjectionClassifier(std::uint64_t seed = 1000, int classes = 10, double temperature = 0.1);
  std::vector<double> classify(const Tensor& image01) const override;
  std::string name() const override { return "softmax-projection"; }

 private:
  int classes_;
  double temperature_;
  std::vector<double> weights_;
};

// [-1, 1] -> [0, 1]
Tensor to_unit_range(const Tensor& image);

}  // namespace mycloth::train
