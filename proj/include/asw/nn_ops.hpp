#pragma once

#include "asw/tensor.hpp"

#include <cmath>
#include <variant>
#include <vector>

namespace asw {

// ---------------------------------------------------------------------------
// Layer tape
//
// Records the per-layer forward state needed to backpropagate a cotangent to
// the *input* of the stack. Weights are frozen everywhere in this project, so
// weight gradients are never tracked. Records holding weight pointers require
// the weight tensors to outlive the tape; tapes are single-use.
// ---------------------------------------------------------------------------

template <class Scalar>
struct AvgPoolRecord {
  int stride;
  Eigen::Index C, H, W;
};

template <class Scalar>
struct Conv2dRecord {
  const TensorT<Scalar>* weight;
  int stride, pad;
  Eigen::Index Cin, H, W;
};

template <class Scalar>
struct InstanceNormRecord {
  TensorT<Scalar> normalized;  // the layer output
  TensorT<Scalar> inv_std;     // [C], 1/sqrt(var + eps)
};

template <class Scalar>
struct LeakyReluRecord {
  Scalar slope;
  TensorT<Scalar> input;
};

template <class Scalar>
struct AdaptiveAvgPoolRecord {
  Eigen::Index C, H, W;
};

template <class Scalar>
struct AdaptiveAvgPoolGridRecord {
  Eigen::Index C, H, W;
  int grid;
};

template <class Scalar>
struct FullyConnectedRecord {
  const TensorT<Scalar>* weight;
};

template <class Scalar>
struct SigmoidRecord {
  TensorT<Scalar> output;
};

template <class Scalar>
using LayerRecordT =
    std::variant<AvgPoolRecord<Scalar>, Conv2dRecord<Scalar>, InstanceNormRecord<Scalar>,
                 LeakyReluRecord<Scalar>, AdaptiveAvgPoolRecord<Scalar>,
                 AdaptiveAvgPoolGridRecord<Scalar>, FullyConnectedRecord<Scalar>,
                 SigmoidRecord<Scalar>>;

template <class Scalar>
struct LayerTapeT {
  std::vector<LayerRecordT<Scalar>> records;
};

using LayerTape = LayerTapeT<double>;

namespace detail {

template <class Scalar>
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Scalar>
using ColMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
inline void check_finite(const TensorT<Scalar>& t, const char* op) {
  if (!t.all_finite()) {
    throw std::runtime_error(std::string(op) + ": non-finite values in result");
  }
}

// Gathers zero-padded receptive fields into columns. col is
// (Cin*k*k) x (Ho*Wo), one column per output position, rows ordered
// (ci, kh, kw) to match the row-major kernel layout.
template <class Scalar>
void im2col(const TensorT<Scalar>& x, int k, int stride, int pad, Eigen::Index Ho,
            Eigen::Index Wo, ColMat<Scalar>& col) {
  const Eigen::Index Cin = x.dim(0), H = x.dim(1), W = x.dim(2);
  col.resize(Cin * k * k, Ho * Wo);
  for (Eigen::Index oh = 0; oh < Ho; ++oh) {
    for (Eigen::Index ow = 0; ow < Wo; ++ow) {
      Scalar* dst = col.data() + (oh * Wo + ow) * col.rows();
      const Eigen::Index h0 = oh * stride - pad;
      const Eigen::Index w0 = ow * stride - pad;
      for (Eigen::Index ci = 0; ci < Cin; ++ci) {
        const Scalar* plane = x.data() + ci * H * W;
        for (int kh = 0; kh < k; ++kh) {
          const Eigen::Index h = h0 + kh;
          for (int kw = 0; kw < k; ++kw) {
            const Eigen::Index w = w0 + kw;
            *dst++ = (h >= 0 && h < H && w >= 0 && w < W) ? plane[h * W + w] : Scalar(0);
          }
        }
      }
    }
  }
}

// Scatter-add of column gradients back onto the padded input positions.
template <class Scalar>
void col2im(const ColMat<Scalar>& col, int k, int stride, int pad, Eigen::Index Ho,
            Eigen::Index Wo, TensorT<Scalar>& dx) {
  const Eigen::Index Cin = dx.dim(0), H = dx.dim(1), W = dx.dim(2);
  for (Eigen::Index oh = 0; oh < Ho; ++oh) {
    for (Eigen::Index ow = 0; ow < Wo; ++ow) {
      const Scalar* src = col.data() + (oh * Wo + ow) * col.rows();
      const Eigen::Index h0 = oh * stride - pad;
      const Eigen::Index w0 = ow * stride - pad;
      for (Eigen::Index ci = 0; ci < Cin; ++ci) {
        Scalar* plane = dx.data() + ci * H * W;
        for (int kh = 0; kh < k; ++kh) {
          const Eigen::Index h = h0 + kh;
          for (int kw = 0; kw < k; ++kw, ++src) {
            const Eigen::Index w = w0 + kw;
            if (h >= 0 && h < H && w >= 0 && w < W) plane[h * W + w] += *src;
          }
        }
      }
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Forward ops. Each takes an optional tape; when given, a record sufficient
// for the input-gradient backward pass is appended.
// ---------------------------------------------------------------------------

/// Mean pooling with square non-overlapping windows. stride == 1 is identity.
template <class Scalar>
TensorT<Scalar> avg_pool2d(const TensorT<Scalar>& x, int stride,
                           LayerTapeT<Scalar>* tape = nullptr) {
  detail::check(x.rank() == 3, "avg_pool2d: expected CxHxW input");
  detail::check(stride >= 1, "avg_pool2d: stride must be >= 1");
  const Eigen::Index C = x.dim(0), H = x.dim(1), W = x.dim(2);
  detail::check(H % stride == 0 && W % stride == 0,
                "avg_pool2d: H and W must be divisible by stride");
  if (tape) tape->records.push_back(AvgPoolRecord<Scalar>{stride, C, H, W});
  if (stride == 1) return x;

  const Eigen::Index Ho = H / stride, Wo = W / stride;
  TensorT<Scalar> out({C, Ho, Wo});
  const Scalar inv = Scalar(1) / Scalar(stride * stride);
  for (Eigen::Index c = 0; c < C; ++c) {
    auto in = x.channel(c);
    auto o = out.channel(c);
    for (Eigen::Index i = 0; i < Ho; ++i)
      for (Eigen::Index j = 0; j < Wo; ++j)
        o(i, j) = in.block(i * stride, j * stride, stride, stride).sum() * inv;
  }
  detail::check_finite(out, "avg_pool2d");
  return out;
}

/// Cross-correlation with zero padding and no bias; kernel w is
/// Cout x Cin x k x k with k odd.
template <class Scalar>
TensorT<Scalar> conv2d(const TensorT<Scalar>& x, const TensorT<Scalar>& w, int stride,
                       int pad, LayerTapeT<Scalar>* tape = nullptr) {
  detail::check(x.rank() == 3 && w.rank() == 4, "conv2d: expected CxHxW input, 4-D kernel");
  detail::check(w.dim(1) == x.dim(0), "conv2d: kernel in-channels mismatch");
  detail::check(w.dim(2) == w.dim(3) && w.dim(2) % 2 == 1, "conv2d: kernel must be square and odd");
  const int k = static_cast<int>(w.dim(2));
  const Eigen::Index Cout = w.dim(0), Cin = x.dim(0), H = x.dim(1), W = x.dim(2);
  const Eigen::Index Ho = (H + 2 * pad - k) / stride + 1;
  const Eigen::Index Wo = (W + 2 * pad - k) / stride + 1;
  detail::check(H + 2 * pad >= k && W + 2 * pad >= k && Ho >= 1 && Wo >= 1,
                "conv2d: output would be empty");

  detail::ColMat<Scalar> col;
  detail::im2col(x, k, stride, pad, Ho, Wo, col);
  TensorT<Scalar> out({Cout, Ho, Wo});
  Eigen::Map<const detail::RowMat<Scalar>> wm(w.data(), Cout, Cin * k * k);
  Eigen::Map<detail::RowMat<Scalar>> om(out.data(), Cout, Ho * Wo);
  om.noalias() = wm * col;

  if (tape) tape->records.push_back(Conv2dRecord<Scalar>{&w, stride, pad, Cin, H, W});
  detail::check_finite(out, "conv2d");
  return out;
}

/// Per-channel normalization with population statistics, no affine part.
template <class Scalar>
TensorT<Scalar> instance_norm(const TensorT<Scalar>& x, Scalar eps,
                              LayerTapeT<Scalar>* tape = nullptr) {
  detail::check(x.rank() == 3, "instance_norm: expected CxHxW input");
  const Eigen::Index C = x.dim(0), HW = x.dim(1) * x.dim(2);
  detail::check(HW >= 2, "instance_norm: needs at least 2 spatial positions");
  TensorT<Scalar> out({x.dim(0), x.dim(1), x.dim(2)});
  TensorT<Scalar> inv_std({C});
  for (Eigen::Index c = 0; c < C; ++c) {
    Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> a(x.data() + c * HW, HW);
    Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> o(out.data() + c * HW, HW);
    const Scalar mean = a.mean();
    const Scalar var = (a - mean).square().sum() / Scalar(HW);
    const Scalar inv = Scalar(1) / std::sqrt(var + eps);
    o = (a - mean) * inv;
    inv_std(c) = inv;
  }
  if (tape) tape->records.push_back(InstanceNormRecord<Scalar>{out, inv_std});
  detail::check_finite(out, "instance_norm");
  return out;
}

/// Elementwise max(x, slope*x) with slope in (0, 1).
template <class Scalar>
TensorT<Scalar> leaky_relu(const TensorT<Scalar>& x, Scalar slope,
                           LayerTapeT<Scalar>* tape = nullptr) {
  detail::check(slope > Scalar(0) && slope < Scalar(1), "leaky_relu: slope must be in (0,1)");
  TensorT<Scalar> out = x;
  out.vec() = x.vec().array().max(x.vec().array() * slope).matrix();
  if (tape) tape->records.push_back(LeakyReluRecord<Scalar>{slope, x});
  detail::check_finite(out, "leaky_relu");
  return out;
}

/// Global spatial mean per channel: CxHxW -> C.
template <class Scalar>
TensorT<Scalar> adaptive_avg_pool_to_vector(const TensorT<Scalar>& x,
                                            LayerTapeT<Scalar>* tape = nullptr) {
  detail::check(x.rank() == 3, "adaptive_avg_pool: expected CxHxW input");
  const Eigen::Index C = x.dim(0), HW = x.dim(1) * x.dim(2);
  TensorT<Scalar> out({C});
  for (Eigen::Index c = 0; c < C; ++c) {
    Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> a(x.data() + c * HW, HW);
    out(c) = a.mean();
  }
  if (tape)
    tape->records.push_back(AdaptiveAvgPoolRecord<Scalar>{C, x.dim(1), x.dim(2)});
  detail::check_finite(out, "adaptive_avg_pool_to_vector");
  return out;
}

/// Adaptive mean pooling onto a fixed grid x grid lattice, flattened row-major
/// (c, gh, gw) into a vector of length C*grid*grid. Output cell (i, j)
/// averages the input window rows [floor(i*H/g), ceil((i+1)*H/g)) x cols
/// [floor(j*W/g), ceil((j+1)*W/g)); windows overlap or repeat cells when the
/// grid does not divide the input, so any spatial size maps to the same
/// feature length.
template <class Scalar>
TensorT<Scalar> adaptive_avg_pool_flatten(const TensorT<Scalar>& x, int grid,
                                          LayerTapeT<Scalar>* tape = nullptr) {
  detail::check(x.rank() == 3, "adaptive_avg_pool_flatten: expected CxHxW input");
  detail::check(grid >= 1, "adaptive_avg_pool_flatten: grid must be >= 1");
  const Eigen::Index C = x.dim(0), H = x.dim(1), W = x.dim(2);
  TensorT<Scalar> out({C * grid * grid});
  Eigen::Index idx = 0;
  for (Eigen::Index c = 0; c < C; ++c) {
    auto in = x.channel(c);
    for (int i = 0; i < grid; ++i) {
      const Eigen::Index h0 = (i * H) / grid;
      const Eigen::Index h1 = ((i + 1) * H + grid - 1) / grid;
      for (int j = 0; j < grid; ++j) {
        const Eigen::Index w0 = (j * W) / grid;
        const Eigen::Index w1 = ((j + 1) * W + grid - 1) / grid;
        out(idx++) = in.block(h0, w0, h1 - h0, w1 - w0).mean();
      }
    }
  }
  if (tape) tape->records.push_back(AdaptiveAvgPoolGridRecord<Scalar>{C, H, W, grid});
  detail::check_finite(out, "adaptive_avg_pool_flatten");
  return out;
}

/// logits = w * v + b with w of shape t x C.
template <class Scalar>
TensorT<Scalar> fully_connected(const TensorT<Scalar>& v, const TensorT<Scalar>& w,
                                const TensorT<Scalar>& b,
                                LayerTapeT<Scalar>* tape = nullptr) {
  detail::check(v.rank() == 1 && w.rank() == 2 && b.rank() == 1,
                "fully_connected: expected vector, matrix, vector");
  detail::check(w.dim(1) == v.dim(0) && w.dim(0) == b.dim(0),
                "fully_connected: shape mismatch");
  TensorT<Scalar> out({w.dim(0)});
  Eigen::Map<const detail::RowMat<Scalar>> wm(w.data(), w.dim(0), w.dim(1));
  out.vec().noalias() = wm * v.vec();
  out.vec() += b.vec();
  if (tape) tape->records.push_back(FullyConnectedRecord<Scalar>{&w});
  detail::check_finite(out, "fully_connected");
  return out;
}

/// Numerically stable elementwise logistic function 1/(1+exp(-z)).
template <class Scalar>
TensorT<Scalar> sigmoid(const TensorT<Scalar>& z, LayerTapeT<Scalar>* tape = nullptr) {
  TensorT<Scalar> out = z;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const Scalar v = z(i);
    if (v >= Scalar(0)) {
      out(i) = Scalar(1) / (Scalar(1) + std::exp(-v));
    } else {
      const Scalar e = std::exp(v);
      out(i) = e / (Scalar(1) + e);
    }
  }
  if (tape) tape->records.push_back(SigmoidRecord<Scalar>{out});
  detail::check_finite(out, "sigmoid");
  return out;
}

// ---------------------------------------------------------------------------
// Backward pass
// ---------------------------------------------------------------------------

namespace detail {

template <class Scalar>
TensorT<Scalar> backward_one(const AvgPoolRecord<Scalar>& r, const TensorT<Scalar>& dy) {
  if (r.stride == 1) return dy;
  const Eigen::Index Ho = r.H / r.stride, Wo = r.W / r.stride;
  detail::check(dy.rank() == 3 && dy.dim(0) == r.C && dy.dim(1) == Ho && dy.dim(2) == Wo,
                "avg_pool2d backward: cotangent shape mismatch");
  TensorT<Scalar> dx = TensorT<Scalar>::zeros({r.C, r.H, r.W});
  const Scalar inv = Scalar(1) / Scalar(r.stride * r.stride);
  for (Eigen::Index c = 0; c < r.C; ++c) {
    auto g = dy.channel(c);
    auto o = dx.channel(c);
    for (Eigen::Index i = 0; i < Ho; ++i)
      for (Eigen::Index j = 0; j < Wo; ++j)
        o.block(i * r.stride, j * r.stride, r.stride, r.stride).setConstant(g(i, j) * inv);
  }
  return dx;
}

template <class Scalar>
TensorT<Scalar> backward_one(const Conv2dRecord<Scalar>& r, const TensorT<Scalar>& dy) {
  const TensorT<Scalar>& w = *r.weight;
  const int k = static_cast<int>(w.dim(2));
  const Eigen::Index Cout = w.dim(0);
  const Eigen::Index Ho = (r.H + 2 * r.pad - k) / r.stride + 1;
  const Eigen::Index Wo = (r.W + 2 * r.pad - k) / r.stride + 1;
  detail::check(dy.rank() == 3 && dy.dim(0) == Cout && dy.dim(1) == Ho && dy.dim(2) == Wo,
                "conv2d backward: cotangent shape mismatch");
  Eigen::Map<const RowMat<Scalar>> wm(w.data(), Cout, r.Cin * k * k);
  Eigen::Map<const RowMat<Scalar>> gm(dy.data(), Cout, Ho * Wo);
  ColMat<Scalar> dcol = wm.transpose() * gm;
  TensorT<Scalar> dx = TensorT<Scalar>::zeros({r.Cin, r.H, r.W});
  col2im(dcol, k, r.stride, r.pad, Ho, Wo, dx);
  return dx;
}

template <class Scalar>
TensorT<Scalar> backward_one(const InstanceNormRecord<Scalar>& r, const TensorT<Scalar>& dy) {
  detail::check(dy.same_shape(r.normalized), "instance_norm backward: shape mismatch");
  const Eigen::Index C = r.normalized.dim(0);
  const Eigen::Index HW = r.normalized.dim(1) * r.normalized.dim(2);
  TensorT<Scalar> dx = r.normalized;
  for (Eigen::Index c = 0; c < C; ++c) {
    Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> g(dy.data() + c * HW, HW);
    Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> y(r.normalized.data() + c * HW, HW);
    Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> o(dx.data() + c * HW, HW);
    const Scalar gmean = g.mean();
    const Scalar gymean = (g * y).mean();
    o = r.inv_std(c) * (g - gmean - y * gymean);
  }
  return dx;
}

template <class Scalar>
TensorT<Scalar> backward_one(const LeakyReluRecord<Scalar>& r, const TensorT<Scalar>& dy) {
  detail::check(dy.same_shape(r.input), "leaky_relu backward: shape mismatch");
  TensorT<Scalar> dx = dy;
  for (Eigen::Index i = 0; i < dx.size(); ++i)
    if (r.input(i) <= Scalar(0)) dx(i) *= r.slope;
  return dx;
}

template <class Scalar>
TensorT<Scalar> backward_one(const AdaptiveAvgPoolRecord<Scalar>& r, const TensorT<Scalar>& dy) {
  detail::check(dy.rank() == 1 && dy.dim(0) == r.C,
                "adaptive_avg_pool backward: cotangent shape mismatch");
  TensorT<Scalar> dx({r.C, r.H, r.W});
  const Scalar inv = Scalar(1) / Scalar(r.H * r.W);
  for (Eigen::Index c = 0; c < r.C; ++c) dx.channel(c).setConstant(dy(c) * inv);
  return dx;
}

template <class Scalar>
TensorT<Scalar> backward_one(const AdaptiveAvgPoolGridRecord<Scalar>& r,
                             const TensorT<Scalar>& dy) {
  const Eigen::Index g = r.grid;
  detail::check(dy.rank() == 1 && dy.dim(0) == r.C * g * g,
                "adaptive_avg_pool_flatten backward: cotangent shape mismatch");
  TensorT<Scalar> dx = TensorT<Scalar>::zeros({r.C, r.H, r.W});
  Eigen::Index idx = 0;
  for (Eigen::Index c = 0; c < r.C; ++c) {
    auto o = dx.channel(c);
    for (Eigen::Index i = 0; i < g; ++i) {
      const Eigen::Index h0 = (i * r.H) / g;
      const Eigen::Index h1 = ((i + 1) * r.H + g - 1) / g;
      for (Eigen::Index j = 0; j < g; ++j) {
        const Eigen::Index w0 = (j * r.W) / g;
        const Eigen::Index w1 = ((j + 1) * r.W + g - 1) / g;
        const Scalar v = dy(idx++) / Scalar((h1 - h0) * (w1 - w0));
        o.block(h0, w0, h1 - h0, w1 - w0).array() += v;
      }
    }
  }
  return dx;
}

template <class Scalar>
TensorT<Scalar> backward_one(const FullyConnectedRecord<Scalar>& r, const TensorT<Scalar>& dy) {
  const TensorT<Scalar>& w = *r.weight;
  detail::check(dy.rank() == 1 && dy.dim(0) == w.dim(0),
                "fully_connected backward: cotangent shape mismatch");
  TensorT<Scalar> dx({w.dim(1)});
  Eigen::Map<const RowMat<Scalar>> wm(w.data(), w.dim(0), w.dim(1));
  dx.vec().noalias() = wm.transpose() * dy.vec();
  return dx;
}

template <class Scalar>
TensorT<Scalar> backward_one(const SigmoidRecord<Scalar>& r, const TensorT<Scalar>& dy) {
  detail::check(dy.same_shape(r.output), "sigmoid backward: shape mismatch");
  TensorT<Scalar> dx = dy;
  dx.vec().array() *= r.output.vec().array() * (Scalar(1) - r.output.vec().array());
  return dx;
}

}  // namespace detail

/// Replays the tape backward, mapping dL/d(output) to dL/d(input).
/// The result has exactly the shape of the tensor fed to the first taped op.
template <class Scalar>
TensorT<Scalar> backward_input_grad(const LayerTapeT<Scalar>& tape, const TensorT<Scalar>& dL_dout) {
  detail::check(!tape.records.empty(), "backward_input_grad: empty tape");
  TensorT<Scalar> cur = dL_dout;
  for (auto it = tape.records.rbegin(); it != tape.records.rend(); ++it) {
    cur = std::visit([&cur](const auto& rec) { return detail::backward_one(rec, cur); }, *it);
  }
  detail::check_finite(cur, "backward_input_grad");
  return cur;
}

}  // namespace asw
