// src/nn/ops.cc

// Copyright 2026 The lidwb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "lidwb/nn/ops.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "lidwb/util/error.h"

namespace lidwb::nn {
namespace {

using MatMap = Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void CheckSame(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(std::string(op) + ": shape mismatch " + ShapeString(a.shape()) + " vs " +
                ShapeString(b.shape()));
  }
}

void CheckRank(const Tensor& x, size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw Error(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                ShapeString(x.shape()));
  }
}

template <typename F, typename D>
Tensor Unary(const Tensor& x, F f, D dfdx_from_y) {
  std::vector<Real> v(x.size());
  const Real* xv = x.data();
  for (size_t i = 0; i < v.size(); ++i) v[i] = f(xv[i]);
  return MakeResult(x.shape(), std::move(v), {x}, [x, dfdx_from_y](Node& out) {
    Real* gx = GradOrNull(x);
    if (!gx) return;
    const Real* xv = x.data();
    for (size_t i = 0; i < out.value.size(); ++i) {
      gx[i] += out.grad[i] * dfdx_from_y(xv[i], out.value[i]);
    }
  });
}

// Per-row log-sum-exp for an [N, L] matrix.
std::vector<Real> RowLogSumExp(const Real* x, int64_t n, int64_t l) {
  std::vector<Real> out(n);
  for (int64_t i = 0; i < n; ++i) {
    const Real* r = x + i * l;
    Real m = *std::max_element(r, r + l);
    Real s = 0.0;
    for (int64_t j = 0; j < l; ++j) s += std::exp(r[j] - m);
    out[i] = m + std::log(s);
  }
  return out;
}

// Rank-2 or rank-3 tensor viewed as [outer, channels, inner].
struct ChannelView {
  int64_t outer, channels, inner;
};

ChannelView ViewOf(const Tensor& x, const char* op) {
  if (x.rank() == 2) return {x.dim(0), x.dim(1), 1};
  if (x.rank() == 3) return {x.dim(0), x.dim(1), x.dim(2)};
  throw Error(std::string(op) + ": expected rank 2 or 3, got " + ShapeString(x.shape()));
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckSame(a, b, "add");
  std::vector<Real> v(a.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] + b.data()[i];
  return MakeResult(a.shape(), std::move(v), {a, b}, [a, b](Node& out) {
    for (const Tensor* t : {&a, &b}) {
      if (Real* g = GradOrNull(*t)) {
        for (size_t i = 0; i < out.grad.size(); ++i) g[i] += out.grad[i];
      }
    }
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  CheckSame(a, b, "sub");
  std::vector<Real> v(a.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] - b.data()[i];
  return MakeResult(a.shape(), std::move(v), {a, b}, [a, b](Node& out) {
    if (Real* g = GradOrNull(a)) {
      for (size_t i = 0; i < out.grad.size(); ++i) g[i] += out.grad[i];
    }
    if (Real* g = GradOrNull(b)) {
      for (size_t i = 0; i < out.grad.size(); ++i) g[i] -= out.grad[i];
    }
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  CheckSame(a, b, "mul");
  std::vector<Real> v(a.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * b.data()[i];
  return MakeResult(a.shape(), std::move(v), {a, b}, [a, b](Node& out) {
    if (Real* g = GradOrNull(a)) {
      for (size_t i = 0; i < out.grad.size(); ++i) g[i] += out.grad[i] * b.data()[i];
    }
    if (Real* g = GradOrNull(b)) {
      for (size_t i = 0; i < out.grad.size(); ++i) g[i] += out.grad[i] * a.data()[i];
    }
  });
}

Tensor Scale(const Tensor& x, Real s) {
  return Unary(x, [s](Real v) { return s * v; }, [s](Real, Real) { return s; });
}

Tensor AddScalar(const Tensor& x, Real c) {
  return Unary(x, [c](Real v) { return v + c; }, [](Real, Real) { return 1.0; });
}

Tensor Relu(const Tensor& x) {
  return Unary(
      x, [](Real v) { return v > 0.0 ? v : 0.0; },
      [](Real v, Real) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor Sigmoid(const Tensor& x) {
  return Unary(
      x,
      [](Real v) {
        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      },
      [](Real, Real y) { return y * (1.0 - y); });
}

Tensor Tanh(const Tensor& x) {
  return Unary(x, [](Real v) { return std::tanh(v); }, [](Real, Real y) { return 1.0 - y * y; });
}

Tensor Sum(const Tensor& x) {
  Real s = 0.0;
  for (Real v : x.values()) s += v;
  return MakeResult({}, {s}, {x}, [x](Node& out) {
    if (Real* g = GradOrNull(x)) {
      for (size_t i = 0; i < x.size(); ++i) g[i] += out.grad[0];
    }
  });
}

Tensor Mean(const Tensor& x) {
  if (x.size() == 0) throw Error("mean of an empty tensor");
  return Scale(Sum(x), 1.0 / static_cast<Real>(x.size()));
}

Tensor AddN(const std::vector<Tensor>& terms) {
  if (terms.empty()) return Tensor::Scalar(0.0);
  Real s = 0.0;
  for (const Tensor& t : terms) s += t.item();
  return MakeResult({}, {s}, terms, [terms](Node& out) {
    for (const Tensor& t : terms) {
      if (Real* g = GradOrNull(t)) g[0] += out.grad[0];
    }
  });
}

Tensor Reshape(const Tensor& x, const Shape& shape) {
  if (NumElements(shape) != static_cast<int64_t>(x.size())) {
    throw Error("reshape: " + ShapeString(x.shape()) + " to " + ShapeString(shape));
  }
  return MakeResult(shape, x.values(), {x}, [x](Node& out) {
    if (Real* g = GradOrNull(x)) {
      for (size_t i = 0; i < out.grad.size(); ++i) g[i] += out.grad[i];
    }
  });
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  CheckRank(a, 2, "matmul");
  CheckRank(b, 2, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw Error("matmul: " + ShapeString(a.shape()) + " x " + ShapeString(b.shape()));
  }
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<Real> v(m * n);
  MatMap(v.data(), m, n).noalias() = ConstMatMap(a.data(), m, k) * ConstMatMap(b.data(), k, n);
  return MakeResult({m, n}, std::move(v), {a, b}, [a, b, m, k, n](Node& out) {
    ConstMatMap go(out.grad.data(), m, n);
    if (Real* g = GradOrNull(a)) {
      MatMap(g, m, k).noalias() += go * ConstMatMap(b.data(), k, n).transpose();
    }
    if (Real* g = GradOrNull(b)) {
      MatMap(g, k, n).noalias() += ConstMatMap(a.data(), m, k).transpose() * go;
    }
  });
}

Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  CheckRank(x, 2, "linear");
  CheckRank(w, 2, "linear");
  const int64_t n = x.dim(0), in = x.dim(1), o = w.dim(0);
  if (w.dim(1) != in) {
    throw Error("linear: input " + ShapeString(x.shape()) + " vs weight " +
                ShapeString(w.shape()));
  }
  if (b.defined() && (b.rank() != 1 || b.dim(0) != o)) throw Error("linear: bad bias shape");
  std::vector<Real> v(n * o);
  MatMap y(v.data(), n, o);
  y.noalias() = ConstMatMap(x.data(), n, in) * ConstMatMap(w.data(), o, in).transpose();
  if (b.defined()) {
    y.rowwise() += Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>(b.data(), o);
  }
  return MakeResult({n, o}, std::move(v), {x, w, b}, [x, w, b, n, in, o](Node& out) {
    ConstMatMap go(out.grad.data(), n, o);
    if (Real* g = GradOrNull(x)) {
      MatMap(g, n, in).noalias() += go * ConstMatMap(w.data(), o, in);
    }
    if (Real* g = GradOrNull(w)) {
      MatMap(g, o, in).noalias() += go.transpose() * ConstMatMap(x.data(), n, in);
    }
    if (Real* g = GradOrNull(b)) {
      Eigen::Map<Eigen::Matrix<Real, 1, Eigen::Dynamic>>(g, o) += go.colwise().sum();
    }
  });
}

namespace {

// cols [Cin * k, T] for one batch element; row (ci, j) reads x[ci, t + (j - k/2) d].
void Im2Col(const Real* x, int64_t cin, int64_t t, int64_t k, int64_t d, Real* cols) {
  const int64_t half = k / 2;
  for (int64_t ci = 0; ci < cin; ++ci) {
    const Real* xr = x + ci * t;
    for (int64_t j = 0; j < k; ++j) {
      Real* cr = cols + (ci * k + j) * t;
      const int64_t off = (j - half) * d;
      for (int64_t s = 0; s < t; ++s) {
        int64_t src = s + off;
        cr[s] = (src >= 0 && src < t) ? xr[src] : 0.0;
      }
    }
  }
}

void Col2ImAdd(const Real* cols, int64_t cin, int64_t t, int64_t k, int64_t d, Real* x) {
  const int64_t half = k / 2;
  for (int64_t ci = 0; ci < cin; ++ci) {
    Real* xr = x + ci * t;
    for (int64_t j = 0; j < k; ++j) {
      const Real* cr = cols + (ci * k + j) * t;
      const int64_t off = (j - half) * d;
      int64_t lo = std::max<int64_t>(0, -off), hi = std::min<int64_t>(t, t - off);
      for (int64_t s = lo; s < hi; ++s) xr[s + off] += cr[s];
    }
  }
}

}  // namespace

Tensor Conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int dilation) {
  CheckRank(x, 3, "conv1d");
  CheckRank(w, 3, "conv1d");
  const int64_t bs = x.dim(0), cin = x.dim(1), t = x.dim(2);
  const int64_t cout = w.dim(0), k = w.dim(2);
  if (w.dim(1) != cin) {
    throw Error("conv1d: input " + ShapeString(x.shape()) + " vs kernel " +
                ShapeString(w.shape()));
  }
  if (k % 2 == 0) throw Error("conv1d: kernel width must be odd");
  if (dilation < 1) throw Error("conv1d: dilation must be >= 1");
  if (b.defined() && (b.rank() != 1 || b.dim(0) != cout)) throw Error("conv1d: bad bias shape");
  const int64_t d = dilation;
  std::vector<Real> v(bs * cout * t);
  ConstMatMap wm(w.data(), cout, cin * k);
  std::vector<Real> cols(k == 1 ? 0 : cin * k * t);
  for (int64_t bi = 0; bi < bs; ++bi) {
    const Real* xb = x.data() + bi * cin * t;
    MatMap yb(v.data() + bi * cout * t, cout, t);
    if (k == 1) {
      yb.noalias() = wm * ConstMatMap(xb, cin, t);
    } else {
      Im2Col(xb, cin, t, k, d, cols.data());
      yb.noalias() = wm * ConstMatMap(cols.data(), cin * k, t);
    }
    if (b.defined()) yb.colwise() += Eigen::Map<const Eigen::VectorXd>(b.data(), cout);
  }
  return MakeResult({bs, cout, t}, std::move(v), {x, w, b},
                    [x, w, b, bs, cin, t, cout, k, d](Node& out) {
    Real* gx = GradOrNull(x);
    Real* gw = GradOrNull(w);
    Real* gb = GradOrNull(b);
    ConstMatMap wm(w.data(), cout, cin * k);
    std::vector<Real> cols(k == 1 ? 0 : cin * k * t), dcols(k == 1 ? 0 : cin * k * t);
    for (int64_t bi = 0; bi < bs; ++bi) {
      ConstMatMap go(out.grad.data() + bi * cout * t, cout, t);
      const Real* xb = x.data() + bi * cin * t;
      if (gb) Eigen::Map<Eigen::VectorXd>(gb, cout) += go.rowwise().sum();
      if (k == 1) {
        if (gw) MatMap(gw, cout, cin).noalias() += go * ConstMatMap(xb, cin, t).transpose();
        if (gx) MatMap(gx + bi * cin * t, cin, t).noalias() += wm.transpose() * go;
      } else {
        if (gw) {
          Im2Col(xb, cin, t, k, d, cols.data());
          MatMap(gw, cout, cin * k).noalias() +=
              go * ConstMatMap(cols.data(), cin * k, t).transpose();
        }
        if (gx) {
          MatMap(dcols.data(), cin * k, t).noalias() = wm.transpose() * go;
          Col2ImAdd(dcols.data(), cin, t, k, d, gx + bi * cin * t);
        }
      }
    }
  });
}

Tensor BatchNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, bool training,
                 std::vector<Real>* running_mean, std::vector<Real>* running_var, Real momentum,
                 Real eps) {
  ChannelView cv = ViewOf(x, "batchnorm");
  const int64_t c = cv.channels;
  if (gamma.size() != static_cast<size_t>(c) || beta.size() != static_cast<size_t>(c)) {
    throw Error("batchnorm: affine parameters do not match " + ShapeString(x.shape()));
  }
  const int64_t count = cv.outer * cv.inner;
  auto at = [&](int64_t o, int64_t ch, int64_t i) { return (o * c + ch) * cv.inner + i; };
  std::vector<Real> mean(c, 0.0), var(c, 0.0);
  if (training) {
    if (count < 2) throw Error("batchnorm: training needs more than one value per channel");
    for (int64_t o = 0; o < cv.outer; ++o) {
      for (int64_t ch = 0; ch < c; ++ch) {
        for (int64_t i = 0; i < cv.inner; ++i) mean[ch] += x.data()[at(o, ch, i)];
      }
    }
    for (Real& m : mean) m /= static_cast<Real>(count);
    for (int64_t o = 0; o < cv.outer; ++o) {
      for (int64_t ch = 0; ch < c; ++ch) {
        for (int64_t i = 0; i < cv.inner; ++i) {
          Real dv = x.data()[at(o, ch, i)] - mean[ch];
          var[ch] += dv * dv;
        }
      }
    }
    for (Real& v : var) v /= static_cast<Real>(count);
    if (running_mean && running_var) {
      Real unbias = static_cast<Real>(count) / static_cast<Real>(count - 1);
      for (int64_t ch = 0; ch < c; ++ch) {
        (*running_mean)[ch] = (1 - momentum) * (*running_mean)[ch] + momentum * mean[ch];
        (*running_var)[ch] = (1 - momentum) * (*running_var)[ch] + momentum * var[ch] * unbias;
      }
    }
  } else {
    if (!running_mean || !running_var) throw Error("batchnorm: eval mode needs running stats");
    mean = *running_mean;
    var = *running_var;
  }
  std::vector<Real> inv_std(c), xhat(x.size()), v(x.size());
  for (int64_t ch = 0; ch < c; ++ch) inv_std[ch] = 1.0 / std::sqrt(var[ch] + eps);
  for (int64_t o = 0; o < cv.outer; ++o) {
    for (int64_t ch = 0; ch < c; ++ch) {
      for (int64_t i = 0; i < cv.inner; ++i) {
        int64_t idx = at(o, ch, i);
        xhat[idx] = (x.data()[idx] - mean[ch]) * inv_std[ch];
        v[idx] = gamma.data()[ch] * xhat[idx] + beta.data()[ch];
      }
    }
  }
  return MakeResult(x.shape(), std::move(v), {x, gamma, beta},
                    [x, gamma, beta, cv, c, count, training, inv_std = std::move(inv_std),
                     xhat = std::move(xhat)](Node& out) {
    auto at = [&](int64_t o, int64_t ch, int64_t i) { return (o * c + ch) * cv.inner + i; };
    std::vector<Real> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
    for (int64_t o = 0; o < cv.outer; ++o) {
      for (int64_t ch = 0; ch < c; ++ch) {
        for (int64_t i = 0; i < cv.inner; ++i) {
          int64_t idx = at(o, ch, i);
          sum_dy[ch] += out.grad[idx];
          sum_dy_xhat[ch] += out.grad[idx] * xhat[idx];
        }
      }
    }
    if (Real* g = GradOrNull(gamma)) {
      for (int64_t ch = 0; ch < c; ++ch) g[ch] += sum_dy_xhat[ch];
    }
    if (Real* g = GradOrNull(beta)) {
      for (int64_t ch = 0; ch < c; ++ch) g[ch] += sum_dy[ch];
    }
    if (Real* g = GradOrNull(x)) {
      const Real n = static_cast<Real>(count);
      for (int64_t o = 0; o < cv.outer; ++o) {
        for (int64_t ch = 0; ch < c; ++ch) {
          Real scale = gamma.data()[ch] * inv_std[ch];
          for (int64_t i = 0; i < cv.inner; ++i) {
            int64_t idx = at(o, ch, i);
            if (training) {
              g[idx] += scale / n *
                        (n * out.grad[idx] - sum_dy[ch] - xhat[idx] * sum_dy_xhat[ch]);
            } else {
              g[idx] += scale * out.grad[idx];
            }
          }
        }
      }
    }
  });
}

Tensor Softmax(const Tensor& x) {
  if (x.rank() == 0) throw Error("softmax of a scalar");
  const int64_t l = x.shape().back();
  const int64_t n = static_cast<int64_t>(x.size()) / l;
  std::vector<Real> lse = RowLogSumExp(x.data(), n, l);
  std::vector<Real> v(x.size());
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < l; ++j) v[i * l + j] = std::exp(x.data()[i * l + j] - lse[i]);
  }
  return MakeResult(x.shape(), std::move(v), {x}, [x, n, l](Node& out) {
    Real* g = GradOrNull(x);
    if (!g) return;
    for (int64_t i = 0; i < n; ++i) {
      const Real* y = out.value.data() + i * l;
      const Real* gy = out.grad.data() + i * l;
      Real dot = 0.0;
      for (int64_t j = 0; j < l; ++j) dot += y[j] * gy[j];
      for (int64_t j = 0; j < l; ++j) g[i * l + j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor LogSoftmax(const Tensor& x) {
  if (x.rank() == 0) throw Error("log-softmax of a scalar");
  const int64_t l = x.shape().back();
  const int64_t n = static_cast<int64_t>(x.size()) / l;
  std::vector<Real> lse = RowLogSumExp(x.data(), n, l);
  std::vector<Real> v(x.size());
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < l; ++j) v[i * l + j] = x.data()[i * l + j] - lse[i];
  }
  return MakeResult(x.shape(), std::move(v), {x}, [x, n, l](Node& out) {
    Real* g = GradOrNull(x);
    if (!g) return;
    for (int64_t i = 0; i < n; ++i) {
      Real s = 0.0;
      for (int64_t j = 0; j < l; ++j) s += out.grad[i * l + j];
      for (int64_t j = 0; j < l; ++j) {
        g[i * l + j] += out.grad[i * l + j] - std::exp(out.value[i * l + j]) * s;
      }
    }
  });
}

Tensor MeanStdPool(const Tensor& x) {
  CheckRank(x, 3, "mean_std_pool");
  const int64_t t = x.dim(2);
  Tensor alpha = Tensor::Full(x.shape(), 1.0 / static_cast<Real>(t));
  return AttentiveStatPool(x, alpha);
}

Tensor AttentiveStatPool(const Tensor& x, const Tensor& alpha) {
  CheckRank(x, 3, "attentive_stat_pool");
  CheckSame(x, alpha, "attentive_stat_pool");
  const int64_t bs = x.dim(0), c = x.dim(1), t = x.dim(2);
  std::vector<Real> v(bs * 2 * c);
  std::vector<Real> mu(bs * c), sd(bs * c);
  for (int64_t b = 0; b < bs; ++b) {
    for (int64_t ch = 0; ch < c; ++ch) {
      const Real* xr = x.data() + (b * c + ch) * t;
      const Real* ar = alpha.data() + (b * c + ch) * t;
      Real m = 0.0, m2 = 0.0;
      for (int64_t s = 0; s < t; ++s) {
        m += ar[s] * xr[s];
        m2 += ar[s] * xr[s] * xr[s];
      }
      Real var = std::max(m2 - m * m, 0.0);
      mu[b * c + ch] = m;
      sd[b * c + ch] = std::sqrt(var + kPoolVarianceFloor);
      v[b * 2 * c + ch] = m;
      v[b * 2 * c + c + ch] = sd[b * c + ch];
    }
  }
  return MakeResult({bs, 2 * c}, std::move(v), {x, alpha},
                    [x, alpha, bs, c, t, mu = std::move(mu), sd = std::move(sd)](Node& out) {
    Real* gx = GradOrNull(x);
    Real* ga = GradOrNull(alpha);
    for (int64_t b = 0; b < bs; ++b) {
      for (int64_t ch = 0; ch < c; ++ch) {
        const Real* xr = x.data() + (b * c + ch) * t;
        const Real* ar = alpha.data() + (b * c + ch) * t;
        Real m = mu[b * c + ch];
        Real g_mu = out.grad[b * 2 * c + ch];
        // d sd = (d m2 - 2 m d m) / (2 sd)
        Real g_sd = out.grad[b * 2 * c + c + ch] / (2.0 * sd[b * c + ch]);
        Real g_m2 = g_sd;
        Real g_m = g_mu - 2.0 * m * g_sd;
        for (int64_t s = 0; s < t; ++s) {
          if (gx) gx[(b * c + ch) * t + s] += ar[s] * (g_m + 2.0 * g_m2 * xr[s]);
          if (ga) ga[(b * c + ch) * t + s] += g_m * xr[s] + g_m2 * xr[s] * xr[s];
        }
      }
    }
  });
}

Tensor MeanTime(const Tensor& x) {
  CheckRank(x, 3, "mean_time");
  const int64_t bs = x.dim(0), c = x.dim(1), t = x.dim(2);
  std::vector<Real> v(bs * c, 0.0);
  for (int64_t i = 0; i < bs * c; ++i) {
    const Real* xr = x.data() + i * t;
    Real s = 0.0;
    for (int64_t k = 0; k < t; ++k) s += xr[k];
    v[i] = s / static_cast<Real>(t);
  }
  return MakeResult({bs, c}, std::move(v), {x}, [x, bs, c, t](Node& out) {
    Real* g = GradOrNull(x);
    if (!g) return;
    for (int64_t i = 0; i < bs * c; ++i) {
      Real gi = out.grad[i] / static_cast<Real>(t);
      for (int64_t k = 0; k < t; ++k) g[i * t + k] += gi;
    }
  });
}

Tensor BroadcastTime(const Tensor& x, int64_t t) {
  CheckRank(x, 2, "broadcast_time");
  const int64_t bs = x.dim(0), c = x.dim(1);
  std::vector<Real> v(bs * c * t);
  for (int64_t i = 0; i < bs * c; ++i) std::fill_n(v.begin() + i * t, t, x.data()[i]);
  return MakeResult({bs, c, t}, std::move(v), {x}, [x, bs, c, t](Node& out) {
    Real* g = GradOrNull(x);
    if (!g) return;
    for (int64_t i = 0; i < bs * c; ++i) {
      Real s = 0.0;
      for (int64_t k = 0; k < t; ++k) s += out.grad[i * t + k];
      g[i] += s;
    }
  });
}

Tensor MulBroadcastTime(const Tensor& x, const Tensor& gate) {
  CheckRank(x, 3, "mul_broadcast_time");
  const int64_t bs = x.dim(0), c = x.dim(1), t = x.dim(2);
  if (gate.shape() != Shape{bs, c}) throw Error("mul_broadcast_time: gate shape mismatch");
  std::vector<Real> v(x.size());
  for (int64_t i = 0; i < bs * c; ++i) {
    for (int64_t k = 0; k < t; ++k) v[i * t + k] = x.data()[i * t + k] * gate.data()[i];
  }
  return MakeResult(x.shape(), std::move(v), {x, gate}, [x, gate, bs, c, t](Node& out) {
    Real* gx = GradOrNull(x);
    Real* gg = GradOrNull(gate);
    for (int64_t i = 0; i < bs * c; ++i) {
      Real s = 0.0;
      for (int64_t k = 0; k < t; ++k) {
        if (gx) gx[i * t + k] += out.grad[i * t + k] * gate.data()[i];
        s += out.grad[i * t + k] * x.data()[i * t + k];
      }
      if (gg) gg[i] += s;
    }
  });
}

Tensor Concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw Error("concat: no inputs");
  ChannelView first = ViewOf(parts[0], "concat");
  int64_t total = 0;
  for (const Tensor& p : parts) {
    ChannelView cv = ViewOf(p, "concat");
    if (p.rank() != parts[0].rank() || cv.outer != first.outer || cv.inner != first.inner) {
      throw Error("concat: incompatible shapes");
    }
    total += cv.channels;
  }
  Shape shape = parts[0].shape();
  shape[1] = total;
  const int64_t outer = first.outer, inner = first.inner;
  std::vector<Real> v(outer * total * inner);
  int64_t offset = 0;
  std::vector<int64_t> offsets;
  for (const Tensor& p : parts) {
    int64_t c = p.dim(1);
    offsets.push_back(offset);
    for (int64_t o = 0; o < outer; ++o) {
      std::copy_n(p.data() + o * c * inner, c * inner, v.begin() + (o * total + offset) * inner);
    }
    offset += c;
  }
  return MakeResult(shape, std::move(v), parts, [parts, offsets, outer, total, inner](Node& out) {
    for (size_t pi = 0; pi < parts.size(); ++pi) {
      Real* g = GradOrNull(parts[pi]);
      if (!g) continue;
      int64_t c = parts[pi].dim(1);
      for (int64_t o = 0; o < outer; ++o) {
        const Real* src = out.grad.data() + (o * total + offsets[pi]) * inner;
        Real* dst = g + o * c * inner;
        for (int64_t i = 0; i < c * inner; ++i) dst[i] += src[i];
      }
    }
  });
}

Tensor SliceChannels(const Tensor& x, int64_t start, int64_t len) {
  ChannelView cv = ViewOf(x, "slice");
  if (start < 0 || len < 0 || start + len > cv.channels) throw Error("slice: out of range");
  Shape shape = x.shape();
  shape[1] = len;
  std::vector<Real> v(cv.outer * len * cv.inner);
  for (int64_t o = 0; o < cv.outer; ++o) {
    std::copy_n(x.data() + (o * cv.channels + start) * cv.inner, len * cv.inner,
                v.begin() + o * len * cv.inner);
  }
  return MakeResult(shape, std::move(v), {x}, [x, cv, start, len](Node& out) {
    Real* g = GradOrNull(x);
    if (!g) return;
    for (int64_t o = 0; o < cv.outer; ++o) {
      Real* dst = g + (o * cv.channels + start) * cv.inner;
      const Real* src = out.grad.data() + o * len * cv.inner;
      for (int64_t i = 0; i < len * cv.inner; ++i) dst[i] += src[i];
    }
  });
}

Tensor L2NormalizeRows(const Tensor& x, Real eps) {
  CheckRank(x, 2, "l2_normalize");
  const int64_t n = x.dim(0), d = x.dim(1);
  std::vector<Real> v(x.size()), norms(n);
  for (int64_t i = 0; i < n; ++i) {
    Real s = 0.0;
    for (int64_t j = 0; j < d; ++j) s += x.data()[i * d + j] * x.data()[i * d + j];
    norms[i] = std::max(std::sqrt(s), eps);
    for (int64_t j = 0; j < d; ++j) v[i * d + j] = x.data()[i * d + j] / norms[i];
  }
  return MakeResult(x.shape(), std::move(v), {x}, [x, n, d, norms = std::move(norms)](Node& out) {
    Real* g = GradOrNull(x);
    if (!g) return;
    for (int64_t i = 0; i < n; ++i) {
      const Real* y = out.value.data() + i * d;
      const Real* gy = out.grad.data() + i * d;
      Real dot = 0.0;
      for (int64_t j = 0; j < d; ++j) dot += y[j] * gy[j];
      for (int64_t j = 0; j < d; ++j) g[i * d + j] += (gy[j] - y[j] * dot) / norms[i];
    }
  });
}

Tensor Dropout(const Tensor& x, Real p, Rng& rng, bool training) {
  if (!training || p <= 0.0) return x;
  if (p >= 1.0) throw Error("dropout: p must be < 1");
  std::vector<Real> mask(x.size());
  std::bernoulli_distribution keep(1.0 - p);
  for (Real& m : mask) m = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
  return Mul(x, Tensor::FromData(x.shape(), std::move(mask)));
}

Tensor GradReverse(const Tensor& x, Real scale) {
  return MakeResult(x.shape(), x.values(), {x}, [x, scale](Node& out) {
    if (Real* g = GradOrNull(x)) {
      for (size_t i = 0; i < out.grad.size(); ++i) g[i] -= scale * out.grad[i];
    }
  });
}

Tensor SoftCrossEntropy(const Tensor& logits, const Tensor& targets) {
  CheckRank(logits, 2, "cross_entropy");
  CheckSame(logits, targets, "cross_entropy");
  const int64_t n = logits.dim(0);
  if (n == 0) throw Error("cross_entropy: empty batch");
  Tensor logp = LogSoftmax(logits);
  return Scale(Sum(Mul(logp, targets)), -1.0 / static_cast<Real>(n));
}

Tensor OneHot(const std::vector<int>& labels, int num_classes) {
  std::vector<Real> v(labels.size() * num_classes, 0.0);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw Error("label " + std::to_string(labels[i]) + " out of range [0, " +
                  std::to_string(num_classes) + ")");
    }
    v[i * num_classes + labels[i]] = 1.0;
  }
  return Tensor::FromData({static_cast<int64_t>(labels.size()), num_classes}, std::move(v));
}

Tensor CrossEntropy(const Tensor& logits, const std::vector<int>& labels) {
  CheckRank(logits, 2, "cross_entropy");
  if (static_cast<int64_t>(labels.size()) != logits.dim(0)) {
    throw Error("cross_entropy: label count does not match batch");
  }
  return SoftCrossEntropy(logits, OneHot(labels, static_cast<int>(logits.dim(1))));
}

Tensor CosineLogits(const Tensor& emb, const Tensor& w, Real scale) {
  Tensor e = L2NormalizeRows(emb);
  Tensor wn = L2NormalizeRows(w);
  return Scale(Linear(e, wn), scale);
}

Tensor AmSoftmaxLoss(const Tensor& emb, const Tensor& w, const Tensor& targets,
                     const AmSoftmaxConfig& cfg) {
  if (!(cfg.scale > 0.0) || cfg.margin < 0.0 || cfg.margin >= 1.0) {
    throw Error("am-softmax: need s > 0 and 0 <= m < 1");
  }
  Tensor cos = Linear(L2NormalizeRows(emb), L2NormalizeRows(w));
  Tensor logits = Scale(Sub(cos, Scale(targets, cfg.margin)), cfg.scale);
  return SoftCrossEntropy(logits, targets);
}

std::vector<Real> MmdBandwidths(const Tensor& a, const Tensor& b, int num_kernels, Real eps) {
  const int64_t ns = a.dim(0), nd = b.dim(0), d = a.dim(1);
  Real total = 0.0;
  for (int64_t i = 0; i < ns; ++i) {
    for (int64_t j = 0; j < nd; ++j) {
      for (int64_t k = 0; k < d; ++k) {
        Real diff = a.data()[i * d + k] - b.data()[j * d + k];
        total += diff * diff;
      }
    }
  }
  Real base = total / static_cast<Real>(ns * nd);
  std::vector<Real> sigma2(num_kernels);
  for (int m = 1; m <= num_kernels; ++m) sigma2[m - 1] = std::max(std::ldexp(base, m), eps);
  return sigma2;
}

Tensor MmdHat(const Tensor& a, const Tensor& b, int num_kernels, Real eps) {
  CheckRank(a, 2, "mmd");
  CheckRank(b, 2, "mmd");
  if (a.dim(0) == 0 || b.dim(0) == 0) throw Error("mmd: empty sample set");
  if (a.dim(1) != b.dim(1)) throw Error("mmd: dimension mismatch");
  if (num_kernels < 1) throw Error("mmd: need at least one kernel");
  const int64_t ns = a.dim(0), nd = b.dim(0), d = a.dim(1), n = ns + nd;
  std::vector<Real> x(n * d);
  std::copy_n(a.data(), ns * d, x.begin());
  std::copy_n(b.data(), nd * d, x.begin() + ns * d);
  std::vector<Real> dist(n * n, 0.0);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = i + 1; j < n; ++j) {
      Real s = 0.0;
      for (int64_t k = 0; k < d; ++k) {
        Real diff = x[i * d + k] - x[j * d + k];
        s += diff * diff;
      }
      dist[i * n + j] = dist[j * n + i] = s;
    }
  }
  Real cross_sum = 0.0;
  for (int64_t i = 0; i < ns; ++i) {
    for (int64_t j = ns; j < n; ++j) cross_sum += dist[i * n + j];
  }
  const Real base = cross_sum / static_cast<Real>(ns * nd);
  std::vector<Real> sigma2(num_kernels);
  std::vector<bool> floored(num_kernels);
  for (int m = 1; m <= num_kernels; ++m) {
    Real s = std::ldexp(base, m);
    floored[m - 1] = s < eps;
    sigma2[m - 1] = std::max(s, eps);
  }
  auto coef = [&](int64_t i, int64_t j) {
    bool ia = i < ns, ja = j < ns;
    if (ia && ja) return 1.0 / static_cast<Real>(ns * ns);
    if (!ia && !ja) return 1.0 / static_cast<Real>(nd * nd);
    return -1.0 / static_cast<Real>(ns * nd);
  };
  Real value = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      Real k = 0.0;
      for (int m = 0; m < num_kernels; ++m) k += std::exp(-dist[i * n + j] / sigma2[m]);
      value += coef(i, j) * k;
    }
  }
  return MakeResult(
      {}, {value}, {a, b},
      [a, b, ns, nd, d, n, num_kernels, x = std::move(x), dist = std::move(dist),
       sigma2 = std::move(sigma2), floored = std::move(floored)](Node& out) {
        Real* ga = GradOrNull(a);
        Real* gb = GradOrNull(b);
        auto coef = [&](int64_t i, int64_t j) {
          bool ia = i < ns, ja = j < ns;
          if (ia && ja) return 1.0 / static_cast<Real>(ns * ns);
          if (!ia && !ja) return 1.0 / static_cast<Real>(nd * nd);
          return -1.0 / static_cast<Real>(ns * nd);
        };
        const Real go = out.grad[0];
        // dL/dD_ij through the kernels, plus dL/dsigma2_m.
        std::vector<Real> g(n * n, 0.0);
        std::vector<Real> g_sigma(num_kernels, 0.0);
        for (int64_t i = 0; i < n; ++i) {
          for (int64_t j = 0; j < n; ++j) {
            if (i == j) continue;
            Real c = coef(i, j);
            for (int m = 0; m < num_kernels; ++m) {
              Real e = std::exp(-dist[i * n + j] / sigma2[m]);
              g[i * n + j] += c * (-e / sigma2[m]);
              g_sigma[m] += c * e * dist[i * n + j] / (sigma2[m] * sigma2[m]);
            }
          }
        }
        // sigma2_m = 2^m / (ns nd) * sum over cross pairs (i < ns <= j) of D_ij.
        Real through_sigma = 0.0;
        for (int m = 0; m < num_kernels; ++m) {
          if (!floored[m]) through_sigma += g_sigma[m] * std::ldexp(1.0, m + 1);
        }
        through_sigma /= static_cast<Real>(ns * nd);
        for (int64_t i = 0; i < ns; ++i) {
          for (int64_t j = ns; j < n; ++j) {
            g[i * n + j] += 0.5 * through_sigma;
            g[j * n + i] += 0.5 * through_sigma;
          }
        }
        // D_ij = |x_i - x_j|^2 with g symmetric: dx_i = 4 sum_j g_ij (x_i - x_j).
        for (int64_t i = 0; i < n; ++i) {
          Real* gi = i < ns ? (ga ? ga + i * d : nullptr) : (gb ? gb + (i - ns) * d : nullptr);
          if (!gi) continue;
          for (int64_t j = 0; j < n; ++j) {
            Real w = 4.0 * go * g[i * n + j];
            if (w == 0.0) continue;
            for (int64_t k = 0; k < d; ++k) gi[k] += w * (x[i * d + k] - x[j * d + k]);
          }
        }
      });
}

Tensor GatherRows(const Tensor& x, const std::vector<int>& idx) {
  if (x.rank() < 1) throw Error("gather: scalar input");
  const int64_t rows = x.dim(0);
  const int64_t stride = rows == 0 ? 0 : static_cast<int64_t>(x.size()) / rows;
  Shape shape = x.shape();
  shape[0] = static_cast<int64_t>(idx.size());
  std::vector<Real> v(idx.size() * stride);
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= rows) throw Error("gather: row index out of range");
    std::copy_n(x.data() + idx[i] * stride, stride, v.begin() + i * stride);
  }
  return MakeResult(shape, std::move(v), {x}, [x, idx, stride](Node& out) {
    Real* g = GradOrNull(x);
    if (!g) return;
    for (size_t i = 0; i < idx.size(); ++i) {
      for (int64_t k = 0; k < stride; ++k) g[idx[i] * stride + k] += out.grad[i * stride + k];
    }
  });
}

}  // namespace lidwb::nn
