#include "mycloth/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <utility>

#include "mycloth/common/error.hpp"

namespace mycloth::nn {

namespace {

using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

void require_rank3(const Tensor& t, const char* op) {
  if (t.rank() != 3) {
    throw ShapeError(std::string(op) + " expects a (C, H, W) tensor, got " + shape_string(t.shape()));
  }
}

// --- broadcasting -----------------------------------------------------------

struct Broadcast {
  std::array<int, 3> out{1, 1, 1};
  std::array<int, 3> a{1, 1, 1};
  std::array<int, 3> b{1, 1, 1};
  bool same = false;
};

std::array<int, 3> pad3(const Shape& s) {
  if (s.size() > 3) throw ShapeError("broadcasting supports rank <= 3, got " + shape_string(s));
  std::array<int, 3> out{1, 1, 1};
  std::size_t offset = 3 - s.size();
  for (std::size_t i = 0; i < s.size(); ++i) out[offset + i] = s[i];
  return out;
}

Broadcast broadcast_shapes(const Shape& sa, const Shape& sb) {
  Broadcast bc;
  if (sa == sb) {
    bc.same = true;
    return bc;
  }
  bc.a = pad3(sa);
  bc.b = pad3(sb);
  for (int i = 0; i < 3; ++i) {
    if (bc.a[i] != bc.b[i] && bc.a[i] != 1 && bc.b[i] != 1) {
      throw ShapeError("cannot broadcast " + shape_string(sa) + " with " + shape_string(sb));
    }
    bc.out[i] = std::max(bc.a[i], bc.b[i]);
  }
  return bc;
}

Shape output_shape(const Broadcast& bc, const Shape& sa, const Shape& sb) {
  if (bc.same) return sa;
  std::size_t rank = std::max(sa.size(), sb.size());
  Shape out;
  for (std::size_t i = 3 - rank; i < 3; ++i) out.push_back(bc.out[i]);
  return out;
}

std::size_t bindex(const std::array<int, 3>& s, int c, int y, int x) {
  return (static_cast<std::size_t>(c % s[0]) * s[1] + (y % s[1])) * s[2] + (x % s[2]);
}

// Calls f(out_index, a_index, b_index) for every output element.
template <typename F>
void for_each_broadcast(const Broadcast& bc, std::size_t n, F&& f) {
  if (bc.same) {
    for (std::size_t i = 0; i < n; ++i) f(i, i, i);
    return;
  }
  std::size_t i = 0;
  for (int c = 0; c < bc.out[0]; ++c) {
    for (int y = 0; y < bc.out[1]; ++y) {
      for (int x = 0; x < bc.out[2]; ++x, ++i) {
        f(i, bindex(bc.a, c, y, x), bindex(bc.b, c, y, x));
      }
    }
  }
}

enum class BinaryKind { kAdd, kSub, kMul };

Var binary(const Var& a, const Var& b, BinaryKind kind) {
  Broadcast bc = broadcast_shapes(a.shape(), b.shape());
  Tensor out(output_shape(bc, a.shape(), b.shape()));
  const Real* pa = a.value().data();
  const Real* pb = b.value().data();
  Real* po = out.data();
  for_each_broadcast(bc, out.numel(), [&](std::size_t o, std::size_t ia, std::size_t ib) {
    switch (kind) {
      case BinaryKind::kAdd: po[o] = pa[ia] + pb[ib]; break;
      case BinaryKind::kSub: po[o] = pa[ia] - pb[ib]; break;
      case BinaryKind::kMul: po[o] = pa[ia] * pb[ib]; break;
    }
  });
  std::size_t n = out.numel();
  return make_result(std::move(out), {a, b}, [bc, kind, n](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    const Real* g = self.grad.data();
    Real* ga = na.requires_grad ? na.ensure_grad().data() : nullptr;
    Real* gb = nb.requires_grad ? nb.ensure_grad().data() : nullptr;
    const Real* va = na.value.data();
    const Real* vb = nb.value.data();
    for_each_broadcast(bc, n, [&](std::size_t o, std::size_t ia, std::size_t ib) {
      switch (kind) {
        case BinaryKind::kAdd:
          if (ga) ga[ia] += g[o];
          if (gb) gb[ib] += g[o];
          break;
        case BinaryKind::kSub:
          if (ga) ga[ia] += g[o];
          if (gb) gb[ib] -= g[o];
          break;
        case BinaryKind::kMul:
          if (ga) ga[ia] += g[o] * vb[ib];
          if (gb) gb[ib] += g[o] * va[ia];
          break;
      }
    });
  });
}

template <typename Fwd, typename Deriv>
Var unary(const Var& x, Fwd fwd, Deriv deriv) {
  Tensor out(x.shape());
  const Real* px = x.value().data();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = fwd(px[i]);
  return make_result(std::move(out), {x}, [deriv](Node& self) {
    Node& in = *self.inputs[0];
    Real* g = in.ensure_grad().data();
    const Real* xv = in.value.data();
    const Real* yv = self.value.data();
    const Real* go = self.grad.data();
    for (std::size_t i = 0; i < self.value.numel(); ++i) g[i] += go[i] * deriv(xv[i], yv[i]);
  });
}

// Output columns [lo, hi) whose input column ox * stride - pad + k is in range.
std::pair<int, int> valid_range(int out_size, int in_size, int k, int stride, int pad) {
  int lo = 0;
  while (lo < out_size && lo * stride - pad + k < 0) ++lo;
  int hi = out_size;
  while (hi > lo && (hi - 1) * stride - pad + k >= in_size) --hi;
  return {lo, hi};
}

// im2col for a 3-D input: rows (c, ky, kx), columns (oy, ox).
void im2col(const Real* x, int channels, int height, int width, int k, int stride, int pad, int out_h,
            int out_w, Real* cols) {
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        Real* row = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * plane;
        const auto [lo, hi] = valid_range(out_w, width, kx, stride, pad);
        for (int oy = 0; oy < out_h; ++oy) {
          int iy = oy * stride - pad + ky;
          Real* dst = row + static_cast<std::size_t>(oy) * out_w;
          if (iy < 0 || iy >= height || lo >= hi) {
            std::fill(dst, dst + out_w, Real(0));
            continue;
          }
          const Real* src = x + (static_cast<std::size_t>(c) * height + iy) * width - pad + kx;
          std::fill(dst, dst + lo, Real(0));
          if (stride == 1) {
            std::copy(src + lo, src + hi, dst + lo);
          } else {
            for (int ox = lo; ox < hi; ++ox) dst[ox] = src[ox * stride];
          }
          std::fill(dst + hi, dst + out_w, Real(0));
        }
      }
    }
  }
}

void col2im(const Real* cols, int channels, int height, int width, int k, int stride, int pad, int out_h,
            int out_w, Real* x) {
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const Real* row = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * plane;
        const auto [lo, hi] = valid_range(out_w, width, kx, stride, pad);
        for (int oy = 0; oy < out_h; ++oy) {
          int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= height) continue;
          const Real* src = row + static_cast<std::size_t>(oy) * out_w;
          Real* dst = x + (static_cast<std::size_t>(c) * height + iy) * width - pad + kx;
          for (int ox = lo; ox < hi; ++ox) dst[ox * stride] += src[ox];
        }
      }
    }
  }
}

// Bilinear tap for coordinate s in [0, n-1] (already clamped).
struct Tap {
  int i0;
  int i1;
  Real w;  // weight of i1
};

Tap bilinear_tap(Real s, int n) {
  int i0 = static_cast<int>(std::floor(s));
  i0 = std::clamp(i0, 0, n - 1);
  int i1 = std::min(i0 + 1, n - 1);
  return {i0, i1, s - i0};
}

}  // namespace

Var add(const Var& a, const Var& b) { return binary(a, b, BinaryKind::kAdd); }
Var sub(const Var& a, const Var& b) { return binary(a, b, BinaryKind::kSub); }
Var mul(const Var& a, const Var& b) { return binary(a, b, BinaryKind::kMul); }

Var scale(const Var& a, Real factor) {
  return unary(
      a, [factor](Real v) { return v * factor; }, [factor](Real, Real) { return factor; });
}

Var leaky_relu(const Var& x, Real slope) {
  return unary(
      x, [slope](Real v) { return v > 0 ? v : slope * v; },
      [slope](Real v, Real) { return v > 0 ? Real(1) : slope; });
}

Var relu(const Var& x) {
  return unary(
      x, [](Real v) { return v > 0 ? v : Real(0); }, [](Real v, Real) { return v > 0 ? Real(1) : Real(0); });
}

Var sigmoid(const Var& x) {
  return unary(
      x, [](Real v) { return Real(1) / (Real(1) + std::exp(-v)); },
      [](Real, Real y) { return y * (Real(1) - y); });
}

Var tanh(const Var& x) {
  return unary(
      x, [](Real v) { return std::tanh(v); }, [](Real, Real y) { return Real(1) - y * y; });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int padding) {
  require_rank3(x.value(), "conv2d");
  const Tensor& w = weight.value();
  if (w.rank() != 4 || w.dim(2) != w.dim(3)) {
    throw ShapeError("conv2d weight must be (O, C, k, k), got " + shape_string(w.shape()));
  }
  const int channels = x.value().channels();
  const int height = x.value().height();
  const int width = x.value().width();
  const int out_channels = w.dim(0);
  const int k = w.dim(2);
  if (w.dim(1) != channels) {
    throw ShapeError("conv2d input has " + std::to_string(channels) + " channels, weight expects " +
                     std::to_string(w.dim(1)));
  }
  if (bias.value().numel() != static_cast<std::size_t>(out_channels)) {
    throw ShapeError("conv2d bias length does not match output channels");
  }
  const int out_h = (height + 2 * padding - k) / stride + 1;
  const int out_w = (width + 2 * padding - k) / stride + 1;
  if (out_h <= 0 || out_w <= 0) throw ShapeError("conv2d output would be empty");
  const int depth = channels * k * k;
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;

  const bool direct = (k == 1 && stride == 1 && padding == 0);
  std::shared_ptr<RealBuffer> cols;
  const Real* col_data = x.value().data();
  if (!direct) {
    cols = std::make_shared<RealBuffer>(static_cast<std::size_t>(depth) * plane);
    im2col(x.value().data(), channels, height, width, k, stride, padding, out_h, out_w, cols->data());
    col_data = cols->data();
  }
  Tensor out({out_channels, out_h, out_w});
  MatMap out_m(out.data(), out_channels, static_cast<Eigen::Index>(plane));
  ConstMatMap w_m(w.data(), out_channels, depth);
  ConstMatMap c_m(col_data, depth, static_cast<Eigen::Index>(plane));
  out_m.noalias() = w_m * c_m;
  const Real* b = bias.value().data();
  for (int o = 0; o < out_channels; ++o) out_m.row(o).array() += b[o];

  return make_result(std::move(out), {x, weight, bias},
                     [cols, direct, channels, height, width, k, stride, padding, out_h, out_w, depth,
                      plane, out_channels](Node& self) {
                       Node& nx = *self.inputs[0];
                       Node& nw = *self.inputs[1];
                       Node& nb = *self.inputs[2];
                       ConstMatMap g_m(self.grad.data(), out_channels, static_cast<Eigen::Index>(plane));
                       const Real* col_data = direct ? nx.value.data() : cols->data();
                       ConstMatMap c_m(col_data, depth, static_cast<Eigen::Index>(plane));
                       if (nw.requires_grad) {
                         MatMap gw(nw.ensure_grad().data(), out_channels, depth);
                         gw.noalias() += g_m * c_m.transpose();
                       }
                       if (nb.requires_grad) {
                         Real* gb = nb.ensure_grad().data();
                         for (int o = 0; o < out_channels; ++o) gb[o] += g_m.row(o).sum();
                       }
                       if (nx.requires_grad) {
                         ConstMatMap w_m(nw.value.data(), out_channels, depth);
                         if (direct) {
                           MatMap gx(nx.ensure_grad().data(), depth, static_cast<Eigen::Index>(plane));
                           gx.noalias() += w_m.transpose() * g_m;
                         } else {
                           RowMatrix gcols = w_m.transpose() * g_m;
                           col2im(gcols.data(), channels, height, width, k, stride, padding, out_h, out_w,
                                  nx.ensure_grad().data());
                         }
                       }
                     });
}

Var concat_channels(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_channels needs at least one input");
  const Tensor& first = parts.front().value();
  require_rank3(first, "concat_channels");
  int total = 0;
  for (const Var& p : parts) {
    require_rank3(p.value(), "concat_channels");
    if (p.value().height() != first.height() || p.value().width() != first.width()) {
      throw ShapeError("concat_channels spatial mismatch: " + shape_string(p.shape()) + " vs " +
                       shape_string(first.shape()));
    }
    total += p.value().channels();
  }
  Tensor out({total, first.height(), first.width()});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().values().begin(), p.value().values().end(), out.values().begin() + offset);
    offset += p.value().numel();
  }
  return make_result(std::move(out), parts, [](Node& self) {
    std::size_t offset = 0;
    for (auto& input : self.inputs) {
      std::size_t n = input->value.numel();
      if (input->requires_grad) {
        Real* g = input->ensure_grad().data();
        for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[offset + i];
      }
      offset += n;
    }
  });
}

Var channel_mean(const Var& x) {
  require_rank3(x.value(), "channel_mean");
  const Tensor& v = x.value();
  const int c = v.channels();
  const std::size_t plane = static_cast<std::size_t>(v.height()) * v.width();
  Tensor out({1, v.height(), v.width()});
  for (int ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < plane; ++i) out[i] += v[ch * plane + i];
  for (std::size_t i = 0; i < plane; ++i) out[i] /= c;
  return make_result(std::move(out), {x}, [c, plane](Node& self) {
    Real* g = self.inputs[0]->ensure_grad().data();
    for (int ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < plane; ++i) g[ch * plane + i] += self.grad[i] / c;
  });
}

Var channel_max(const Var& x) {
  require_rank3(x.value(), "channel_max");
  const Tensor& v = x.value();
  const int c = v.channels();
  const std::size_t plane = static_cast<std::size_t>(v.height()) * v.width();
  Tensor out({1, v.height(), v.width()});
  auto argmax = std::make_shared<std::vector<int>>(plane, 0);
  for (std::size_t i = 0; i < plane; ++i) {
    Real best = v[i];
    for (int ch = 1; ch < c; ++ch) {
      if (v[ch * plane + i] > best) {
        best = v[ch * plane + i];
        (*argmax)[i] = ch;
      }
    }
    out[i] = best;
  }
  return make_result(std::move(out), {x}, [argmax, plane](Node& self) {
    Real* g = self.inputs[0]->ensure_grad().data();
    for (std::size_t i = 0; i < plane; ++i) g[(*argmax)[i] * plane + i] += self.grad[i];
  });
}

Var global_avg_pool(const Var& x) {
  require_rank3(x.value(), "global_avg_pool");
  const Tensor& v = x.value();
  const int c = v.channels();
  const std::size_t plane = static_cast<std::size_t>(v.height()) * v.width();
  Tensor out({c, 1, 1});
  for (int ch = 0; ch < c; ++ch) {
    Real s = 0;
    for (std::size_t i = 0; i < plane; ++i) s += v[ch * plane + i];
    out[ch] = s / static_cast<Real>(plane);
  }
  return make_result(std::move(out), {x}, [c, plane](Node& self) {
    Real* g = self.inputs[0]->ensure_grad().data();
    for (int ch = 0; ch < c; ++ch) {
      Real share = self.grad[ch] / static_cast<Real>(plane);
      for (std::size_t i = 0; i < plane; ++i) g[ch * plane + i] += share;
    }
  });
}

Tensor upsample2x_bilinear(const Tensor& v) {
  require_rank3(v, "upsample2x_bilinear");
  const int c = v.channels(), h = v.height(), w = v.width();
  Tensor out({c, 2 * h, 2 * w});
  for (int ch = 0; ch < c; ++ch) {
    for (int oy = 0; oy < 2 * h; ++oy) {
      Tap ty = bilinear_tap(std::clamp((oy + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(h - 1)), h);
      for (int ox = 0; ox < 2 * w; ++ox) {
        Tap tx = bilinear_tap(std::clamp((ox + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(w - 1)), w);
        out.at(ch, oy, ox) = v.at(ch, ty.i0, tx.i0) * (1 - tx.w) * (1 - ty.w) +
                             v.at(ch, ty.i0, tx.i1) * tx.w * (1 - ty.w) +
                             v.at(ch, ty.i1, tx.i0) * (1 - tx.w) * ty.w + v.at(ch, ty.i1, tx.i1) * tx.w * ty.w;
      }
    }
  }
  return out;
}

Var upsample2x_bilinear(const Var& x) {
  Tensor out = upsample2x_bilinear(x.value());
  const int c = x.value().channels(), h = x.value().height(), w = x.value().width();
  return make_result(std::move(out), {x}, [c, h, w](Node& self) {
    Tensor& g = self.inputs[0]->ensure_grad();
    for (int ch = 0; ch < c; ++ch) {
      for (int oy = 0; oy < 2 * h; ++oy) {
        Tap ty = bilinear_tap(std::clamp((oy + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(h - 1)), h);
        for (int ox = 0; ox < 2 * w; ++ox) {
          Tap tx = bilinear_tap(std::clamp((ox + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(w - 1)), w);
          Real go = self.grad.at(ch, oy, ox);
          g.at(ch, ty.i0, tx.i0) += go * (1 - tx.w) * (1 - ty.w);
          g.at(ch, ty.i0, tx.i1) += go * tx.w * (1 - ty.w);
          g.at(ch, ty.i1, tx.i0) += go * (1 - tx.w) * ty.w;
          g.at(ch, ty.i1, tx.i1) += go * tx.w * ty.w;
        }
      }
    }
  });
}

Var upsample2x_nearest(const Var& x) {
  require_rank3(x.value(), "upsample2x_nearest");
  const Tensor& v = x.value();
  const int c = v.channels(), h = v.height(), w = v.width();
  Tensor out({c, 2 * h, 2 * w});
  for (int ch = 0; ch < c; ++ch)
    for (int oy = 0; oy < 2 * h; ++oy)
      for (int ox = 0; ox < 2 * w; ++ox) out.at(ch, oy, ox) = v.at(ch, oy / 2, ox / 2);
  return make_result(std::move(out), {x}, [c, h, w](Node& self) {
    Tensor& g = self.inputs[0]->ensure_grad();
    for (int ch = 0; ch < c; ++ch)
      for (int oy = 0; oy < 2 * h; ++oy)
        for (int ox = 0; ox < 2 * w; ++ox) g.at(ch, oy / 2, ox / 2) += self.grad.at(ch, oy, ox);
  });
}

Tensor area_downsample(const Tensor& v, int factor) {
  require_rank3(v, "area_downsample");
  if (factor < 1 || v.height() % factor != 0 || v.width() % factor != 0) {
    throw ShapeError("area_downsample factor " + std::to_string(factor) + " does not divide " +
                     shape_string(v.shape()));
  }
  if (factor == 1) return v;
  const int c = v.channels(), oh = v.height() / factor, ow = v.width() / factor;
  const Real norm = Real(1) / (factor * factor);
  Tensor out({c, oh, ow});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < v.height(); ++y)
      for (int x = 0; x < v.width(); ++x) out.at(ch, y / factor, x / factor) += v.at(ch, y, x) * norm;
  return out;
}

Var area_downsample(const Var& x, int factor) {
  Tensor out = area_downsample(x.value(), factor);
  if (factor == 1) return x;
  const Real norm = Real(1) / (factor * factor);
  return make_result(std::move(out), {x}, [factor, norm](Node& self) {
    Tensor& g = self.inputs[0]->ensure_grad();
    for (int ch = 0; ch < g.channels(); ++ch)
      for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) g.at(ch, y, x) += self.grad.at(ch, y / factor, x / factor) * norm;
  });
}

Var max_pool2(const Var& x) {
  require_rank3(x.value(), "max_pool2");
  const Tensor& v = x.value();
  const int c = v.channels(), oh = v.height() / 2, ow = v.width() / 2;
  if (oh == 0 || ow == 0) throw ShapeError("max_pool2 input too small: " + shape_string(v.shape()));
  Tensor out({c, oh, ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
  std::size_t i = 0;
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < oh; ++y) {
      for (int xx = 0; xx < ow; ++xx, ++i) {
        std::size_t best = (static_cast<std::size_t>(ch) * v.height() + 2 * y) * v.width() + 2 * xx;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            std::size_t idx = (static_cast<std::size_t>(ch) * v.height() + 2 * y + dy) * v.width() + 2 * xx + dx;
            if (v[idx] > v[best]) best = idx;
          }
        out[i] = v[best];
        (*argmax)[i] = best;
      }
    }
  }
  return make_result(std::move(out), {x}, [argmax](Node& self) {
    Real* g = self.inputs[0]->ensure_grad().data();
    for (std::size_t j = 0; j < argmax->size(); ++j) g[(*argmax)[j]] += self.grad[j];
  });
}

Var warp(const Var& source, const Var& flow) {
  require_rank3(source.value(), "warp");
  require_rank3(flow.value(), "warp");
  const Tensor& src = source.value();
  const Tensor& f = flow.value();
  const int c = src.channels(), h = src.height(), w = src.width();
  if (f.channels() != 2 || f.height() != h || f.width() != w) {
    throw ShapeError("warp flow " + shape_string(f.shape()) + " does not match source " +
                     shape_string(src.shape()));
  }
  Tensor out({c, h, w});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Real sx = std::clamp(x + f.at(0, y, x), Real(0), static_cast<Real>(w - 1));
      Real sy = std::clamp(y + f.at(1, y, x), Real(0), static_cast<Real>(h - 1));
      Tap tx = bilinear_tap(sx, w);
      Tap ty = bilinear_tap(sy, h);
      for (int ch = 0; ch < c; ++ch) {
        out.at(ch, y, x) = src.at(ch, ty.i0, tx.i0) * (1 - tx.w) * (1 - ty.w) +
                           src.at(ch, ty.i0, tx.i1) * tx.w * (1 - ty.w) +
                           src.at(ch, ty.i1, tx.i0) * (1 - tx.w) * ty.w +
                           src.at(ch, ty.i1, tx.i1) * tx.w * ty.w;
      }
    }
  }
  return make_result(std::move(out), {source, flow}, [c, h, w](Node& self) {
    Node& ns = *self.inputs[0];
    Node& nf = *self.inputs[1];
    const Tensor& src = ns.value;
    const Tensor& f = nf.value;
    Tensor* gs = ns.requires_grad ? &ns.ensure_grad() : nullptr;
    Tensor* gf = nf.requires_grad ? &nf.ensure_grad() : nullptr;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Real rx = x + f.at(0, y, x);
        Real ry = y + f.at(1, y, x);
        bool inside_x = rx >= 0 && rx <= w - 1;
        bool inside_y = ry >= 0 && ry <= h - 1;
        Tap tx = bilinear_tap(std::clamp(rx, Real(0), static_cast<Real>(w - 1)), w);
        Tap ty = bilinear_tap(std::clamp(ry, Real(0), static_cast<Real>(h - 1)), h);
        Real dgx = 0, dgy = 0;
        for (int ch = 0; ch < c; ++ch) {
          Real go = self.grad.at(ch, y, x);
          if (go == 0) continue;
          Real v00 = src.at(ch, ty.i0, tx.i0), v01 = src.at(ch, ty.i0, tx.i1);
          Real v10 = src.at(ch, ty.i1, tx.i0), v11 = src.at(ch, ty.i1, tx.i1);
          if (gs) {
            gs->at(ch, ty.i0, tx.i0) += go * (1 - tx.w) * (1 - ty.w);
            gs->at(ch, ty.i0, tx.i1) += go * tx.w * (1 - ty.w);
            gs->at(ch, ty.i1, tx.i0) += go * (1 - tx.w) * ty.w;
            gs->at(ch, ty.i1, tx.i1) += go * tx.w * ty.w;
          }
          if (tx.i1 != tx.i0) dgx += go * ((v01 - v00) * (1 - ty.w) + (v11 - v10) * ty.w);
          if (ty.i1 != ty.i0) dgy += go * ((v10 - v00) * (1 - tx.w) + (v11 - v01) * tx.w);
        }
        if (gf) {
          if (inside_x) gf->at(0, y, x) += dgx;
          if (inside_y) gf->at(1, y, x) += dgy;
        }
      }
    }
  });
}

Var mean_abs_diff(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mean_abs_diff shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  const std::size_t n = a.value().numel();
  if (n == 0) throw ShapeError("mean_abs_diff of empty tensors");
  Real s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(a.value()[i] - b.value()[i]);
  Tensor out({1}, s / static_cast<Real>(n));
  return make_result(std::move(out), {a, b}, [n](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    Real g = self.grad[0] / static_cast<Real>(n);
    Real* ga = na.requires_grad ? na.ensure_grad().data() : nullptr;
    Real* gb = nb.requires_grad ? nb.ensure_grad().data() : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      Real d = na.value[i] - nb.value[i];
      Real s = d > 0 ? g : (d < 0 ? -g : Real(0));
      if (ga) ga[i] += s;
      if (gb) gb[i] -= s;
    }
  });
}

Var sum_scalars(const std::vector<Var>& scalars) {
  if (scalars.empty()) return constant(Tensor({1}, 0));
  Real s = 0;
  for (const Var& v : scalars) {
    if (v.value().numel() != 1) throw ShapeError("sum_scalars expects one-element tensors");
    s += v.value()[0];
  }
  return make_result(Tensor({1}, s), scalars, [](Node& self) {
    for (auto& input : self.inputs) {
      if (input->requires_grad) input->ensure_grad()[0] += self.grad[0];
    }
  });
}

Real scalar_value(const Var& v) {
  if (v.value().numel() != 1) throw ShapeError("scalar_value on " + shape_string(v.shape()));
  return v.value()[0];
}

}  // namespace mycloth::nn
