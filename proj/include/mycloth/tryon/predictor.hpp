#pragma once

#include <memory>
#include <string>

#include "mycloth/tryon/network.hpp"

namespace mycloth::tryon {

// Anything that maps a sample to y_p (3, H, W) in [-1, 1]. Implementations
// are safe to call concurrently.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Tensor predict(const TryOnSample& sample) const = 0;
  virtual std::string id() const = 0;
};

class NetworkPredictor final : public Predictor {
 public:
  NetworkPredictor(std::shared_ptr<const TryOnNet> net, std::string id);
  Tensor predict(const TryOnSample& sample) const override;
  std::string id() const override { return id_; }
  const TryOnNet& net() const { return *net_; }

 private:
  std::shared_ptr<const TryOnNet> net_;
  std::string id_;
};

// Returns the sample's ground truth. Fixed point for metric tests.
class OracleCheckpoint final : public Predictor {
 public:
  Tensor predict(const TryOnSample& sample) const override;
  std::string id() const override { return "oracle"; }
};

// Gray value written into the masked garment region of agnostic images.
inline constexpr std::uint8_t kAgnosticFill = 128;

// Zero-flow stand-in for a trained network: the (unwarped) cloth shows
// through wherever the agnostic image holds the gray fill in all three
// channels; everything else is the agnostic image.
class IdentityTryOn final : public Predictor {
 public:
  Tensor predict(const TryOnSample& sample) const override;
  std::string id() const override { return "identity"; }
};

}  // namespace mycloth::tryon
