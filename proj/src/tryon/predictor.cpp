#include "mycloth/tryon/predictor.hpp"

#include "mycloth/common/error.hpp"
#include "mycloth/tryon/convert.hpp"

namespace mycloth::tryon {

NetworkPredictor::NetworkPredictor(std::shared_ptr<const TryOnNet> net, std::string id)
    : net_(std::move(net)), id_(std::move(id)) {}

Tensor NetworkPredictor::predict(const TryOnSample& sample) const {
  nn::NoGradGuard no_grad;
  return net_->forward(sample).y_p.value();
}

Tensor OracleCheckpoint::predict(const TryOnSample& sample) const {
  if (!sample.ground_truth) throw ValidationError("oracle checkpoint needs ground truth", {{"ground_truth", "missing"}});
  return *sample.ground_truth;
}

Tensor IdentityTryOn::predict(const TryOnSample& sample) const {
  const Tensor& a = sample.agnostic;
  const Tensor& c = sample.cloth;
  if (a.rank() != 3 || a.channels() != 3 || !a.same_shape(c)) {
    throw ShapeError("identity try-on needs cloth and agnostic of equal (3, H, W) shape");
  }
  const Real fill = pixel_to_real(kAgnosticFill);
  Tensor out = a;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (a.at(0, y, x) == fill && a.at(1, y, x) == fill && a.at(2, y, x) == fill) {
        for (int ch = 0; ch < 3; ++ch) out.at(ch, y, x) = c.at(ch, y, x);
      }
    }
  }
  return out;
}

}  // namespace mycloth::tryon
