#include "mycloth/train/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mycloth/common/error.hpp"
#include "mycloth/nn/module.hpp"

namespace mycloth::train {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* metric) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(metric) + ": shape mismatch " + nn::shape_string(a.shape()) + " vs " +
                     nn::shape_string(b.shape()));
  }
  if (a.rank() != 3 || (a.channels() != 1 && a.channels() != 3)) {
    throw ShapeError(std::string(metric) + " expects (1|3, H, W) images, got " + nn::shape_string(a.shape()));
  }
}

std::vector<double> gaussian_window() {
  std::vector<double> w(kSsimWindow * kSsimWindow);
  const int r = kSsimWindow / 2;
  double sum = 0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      double v = std::exp(-(x * x + y * y) / (2 * kSsimSigma * kSsimSigma));
      w[(y + r) * kSsimWindow + (x + r)] = v;
      sum += v;
    }
  for (double& v : w) v /= sum;
  return w;
}

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Matrix rows_to_matrix(const FeatureRows& rows, const char* name) {
  if (rows.size() < 2) throw ValidationError(std::string(name) + " needs at least 2 samples");
  const std::size_t d = rows.front().size();
  if (d == 0) throw ValidationError(std::string(name) + " has empty feature vectors");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw ShapeError(std::string(name) + " rows differ in length");
    for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

// Symmetric PSD square root via eigendecomposition; tiny negative
// eigenvalues from rounding are clipped.
Matrix sqrt_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double frechet(const Vector& mu_a, Matrix cov_a, const Vector& mu_b, Matrix cov_b, double eps) {
  if (eps < 0) throw ValidationError("eps must be >= 0");
  const Eigen::Index d = mu_a.size();
  if (eps > 0) {
    cov_a += eps * Matrix::Identity(d, d);
    cov_b += eps * Matrix::Identity(d, d);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> ea(cov_a), eb(cov_b);
    const double tol = 1e-12 * std::max(1.0, std::max(cov_a.norm(), cov_b.norm()));
    if (ea.eigenvalues().minCoeff() <= tol || eb.eigenvalues().minCoeff() <= tol) {
      throw NumericError("covariance is singular (fewer samples than feature dims or degenerate features); "
                         "use eps > 0 for the regularized distance");
    }
  }
  Matrix sa = sqrt_psd(cov_a);
  Matrix middle = sa * cov_b * sa;
  middle = 0.5 * (middle + middle.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(middle);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double value = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, value);
}

}  // namespace

Tensor to_luminance(const Tensor& image) {
  if (image.rank() != 3) throw ShapeError("expected (C, H, W), got " + nn::shape_string(image.shape()));
  if (image.channels() == 1) return image;
  if (image.channels() != 3) throw ShapeError("expected 1 or 3 channels");
  Tensor out({1, image.height(), image.width()});
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      out.at(0, y, x) = 0.299 * image.at(0, y, x) + 0.587 * image.at(1, y, x) + 0.114 * image.at(2, y, x);
  return out;
}

double ssim(const Tensor& a, const Tensor& b) {
  require_same(a, b, "ssim");
  if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
    throw ShapeError("ssim needs images of at least 11x11");
  }
  const Tensor la = to_luminance(a), lb = to_luminance(b);
  static const std::vector<double> w = gaussian_window();
  const double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
  const double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
  const int oh = a.height() - kSsimWindow + 1, ow = a.width() - kSsimWindow + 1;
  double total = 0;
  for (int y0 = 0; y0 < oh; ++y0) {
    for (int x0 = 0; x0 < ow; ++x0) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int dy = 0; dy < kSsimWindow; ++dy) {
        for (int dx = 0; dx < kSsimWindow; ++dx) {
          const double wt = w[dy * kSsimWindow + dx];
          const double va = la.at(0, y0 + dy, x0 + dx), vb = lb.at(0, y0 + dy, x0 + dx);
          ma += wt * va;
          mb += wt * vb;
          saa += wt * va * va;
          sbb += wt * vb * vb;
          sab += wt * va * vb;
        }
      }
      const double var_a = saa - ma * ma, var_b = sbb - mb * mb, cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
  }
  return total / (static_cast<double>(oh) * ow);
}

Psnr psnr(const Tensor& a, const Tensor& b) {
  require_same(a, b, "psnr");
  double sum = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  if (sum == 0) return {0, true};
  const double mse = sum / static_cast<double>(a.numel());
  return {10.0 * std::log10(1.0 / mse), false};
}

double fid(const FeatureRows& a, const FeatureRows& b, double eps) {
  Matrix ma = rows_to_matrix(a, "fid set A");
  Matrix mb = rows_to_matrix(b, "fid set B");
  if (ma.cols() != mb.cols()) throw ShapeError("fid feature dims differ");
  Vector mu_a = ma.colwise().mean().transpose(), mu_b = mb.colwise().mean().transpose();
  Matrix ca = ma.rowwise() - mu_a.transpose();
  Matrix cb = mb.rowwise() - mu_b.transpose();
  Matrix cov_a = (ca.transpose() * ca) / static_cast<double>(ma.rows() - 1);
  Matrix cov_b = (cb.transpose() * cb) / static_cast<double>(mb.rows() - 1);
  return frechet(mu_a, cov_a, mu_b, cov_b, eps);
}

double frechet_distance(const std::vector<double>& mu_a, const std::vector<double>& cov_a,
                        const std::vector<double>& mu_b, const std::vector<double>& cov_b, double eps) {
  const auto d = static_cast<Eigen::Index>(mu_a.size());
  if (static_cast<Eigen::Index>(mu_b.size()) != d || static_cast<Eigen::Index>(cov_a.size()) != d * d ||
      static_cast<Eigen::Index>(cov_b.size()) != d * d) {
    throw ShapeError("frechet_distance: inconsistent moment sizes");
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix ca = Eigen::Map<const RowMajor>(cov_a.data(), d, d);
  Matrix cb = Eigen::Map<const RowMajor>(cov_b.data(), d, d);
  return frechet(Eigen::Map<const Vector>(mu_a.data(), d), ca, Eigen::Map<const Vector>(mu_b.data(), d), cb, eps);
}

double inception_score(const FeatureRows& p) {
  if (p.empty()) throw ValidationError("inception score needs at least one image");
  const std::size_t k = p.front().size();
  std::vector<double> marginal(k, 0.0);
  for (const auto& row : p) {
    if (row.size() != k) throw ShapeError("class distributions differ in length");
    double s = 0;
    for (double v : row) {
      if (v < 0 || !std::isfinite(v)) throw ValidationError("class probabilities must be finite and >= 0");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-6) throw ValidationError("class probabilities must sum to 1");
    for (std::size_t j = 0; j < k; ++j) marginal[j] += row[j] / static_cast<double>(p.size());
  }
  double kl_sum = 0;
  for (const auto& row : p) {
    for (std::size_t j = 0; j < k; ++j) {
      if (row[j] > 0) kl_sum += row[j] * (std::log(row[j]) - std::log(marginal[j]));
    }
  }
  return std::exp(kl_sum / static_cast<double>(p.size()));
}

std::vector<double> pooled_descriptor(const Tensor& image) {
  if (image.rank() != 3 || image.channels() != 3) throw ShapeError("descriptor expects (3, H, W)");
  const int g = 8;
  std::vector<double> out(3 * g * g, 0.0);
  for (int c = 0; c < 3; ++c) {
    for (int gy = 0; gy < g; ++gy) {
      const int y0 = gy * image.height() / g, y1 = std::max(y0 + 1, (gy + 1) * image.height() / g);
      for (int gx = 0; gx < g; ++gx) {
        const int x0 = gx * image.width() / g, x1 = std::max(x0 + 1, (gx + 1) * image.width() / g);
        double s = 0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) s += image.at(c, std::min(y, image.height() - 1), std::min(x, image.width() - 1));
        out[(c * g + gy) * g + gx] = s / ((y1 - y0) * (x1 - x0));
      }
    }
  }
  return out;
}

namespace {

std::vector<double> gaussian_matrix(std::uint64_t seed, std::size_t n) {
  nn::Rng rng(seed);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; i += 2) {
    // Box-Muller keeps the draw sequence independent of the library.
    const double u1 = std::max(rng.uniform01(), 1e-300), u2 = rng.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    w[i] = r * std::cos(2 * M_PI * u2);
    if (i + 1 < n) w[i + 1] = r * std::sin(2 * M_PI * u2);
  }
  return w;
}

std::vector<double> project(const std::vector<double>& w, const std::vector<double>& x, int rows) {
  const std::size_t cols = x.size();
  std::vector<double> out(static_cast<std::size_t>(rows), 0.0);
  for (int r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r] += w[r * cols + c] * x[c];
  return out;
}

}  // namespace

RandomProjectionEmbedder::RandomProjectionEmbedder(std::uint64_t seed, int dim)
    : dim_(dim), weights_(gaussian_matrix(seed, static_cast<std::size_t>(dim) * 3 * 64)) {
  for (double& v : weights_) v /= std::sqrt(3.0 * 64);
}

std::vector<double> RandomProjectionEmbedder::embed(const Tensor& image) const {
  return project(weights_, pooled_descriptor(image), dim_);
}

SoftmaxProjectionClassifier::SoftmaxProjectionClassifier(std::uint64_t seed, int classes, double temperature)
    : classes_(classes), temperature_(temperature),
      weights_(gaussian_matrix(seed, static_cast<std::size_t>(classes) * 3 * 64)) {
  for (double& v : weights_) v /= std::sqrt(3.0 * 64);
}

std::vector<double> SoftmaxProjectionClassifier::classify(const Tensor& image) const {
  std::vector<double> logits = project(weights_, pooled_descriptor(image), classes_);
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0;
  for (double& v : logits) {
    v = std::exp((v - mx) / temperature_);
    s += v;
  }
  for (double& v : logits) v /= s;
  return logits;
}

Tensor to_unit_range(const Tensor& image) {
  Tensor out = image;
  for (auto& v : out.values()) v = std::clamp((v + 1.0) * 0.5, 0.0, 1.0);
  return out;
}

}  // namespace mycloth::train
