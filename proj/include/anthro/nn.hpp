// Minimal tensor pipeline for the body-dimension regressor: conv / relu /
// batchnorm / maxpool / fully-connected layers with explicit backward
// passes, SGD with momentum, and a versioned binary checkpoint format.
//
// Everything is templated on the scalar so training runs in float and
// gradient checks run in double. Convolutions are im2col + Eigen GEMM,
// parallel over the batch; gradient accumulation is reduced in fixed index
// order so results do not depend on thread count.
//
// Checkpoint layout (little-endian):
//   "ANCK" | u32 version=1 | u64 json_len | json meta bytes |
//   u32 blob_count | per blob: u16 name_len, name, u8 scalar_size,
//   u8 ndim, i64 dims[ndim], raw values.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "anthro/rng.hpp"
#include "anthro/types.hpp"

namespace anthro::nn {

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using RowMat =
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// ---------------------------------------------------------------------------
// Tensor

template <class S>
struct Tensor {
  std::vector<Eigen::Index> shape;
  VecX<S> data;  // row-major over `shape`

  Tensor() = default;
  explicit Tensor(std::vector<Eigen::Index> sh) { resize(std::move(sh)); }

  void resize(std::vector<Eigen::Index> sh) {
    Eigen::Index n = 1;
    for (auto d : sh) n *= d;
    shape = std::move(sh);
    data.setZero(n);
  }

  Eigen::Index size() const { return data.size(); }
  Eigen::Index dim(int i) const { return shape[static_cast<size_t>(i)]; }
  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }
  bool all_finite() const { return data.allFinite(); }
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DataError(what);
}

template <class S>
void guard_finite(const Tensor<S>& t, const char* what) {
  if (!t.all_finite())
    throw Error(std::string("non-finite values after ") + what);
}

// ---------------------------------------------------------------------------
// conv2d (valid cross-correlation, stride 1)

template <class S>
void im2col(const S* img, Eigen::Index C, Eigen::Index H, Eigen::Index W,
            Eigen::Index k, MatX<S>& cols) {
  const Eigen::Index oh = H - k + 1, ow = W - k + 1;
  cols.resize(C * k * k, oh * ow);
  for (Eigen::Index oy = 0; oy < oh; ++oy)
    for (Eigen::Index ox = 0; ox < ow; ++ox) {
      S* dst = cols.data() + (oy * ow + ox) * cols.rows();
      for (Eigen::Index c = 0; c < C; ++c) {
        const S* plane = img + c * H * W;
        for (Eigen::Index ky = 0; ky < k; ++ky) {
          std::memcpy(dst, plane + (oy + ky) * W + ox,
                      static_cast<size_t>(k) * sizeof(S));
          dst += k;
        }
      }
    }
}

// input B x C x H x W, kernels K x C x k x k, bias K -> B x K x (H-k+1) x (W-k+1)
template <class S>
Tensor<S> conv2d(const Tensor<S>& input, const Tensor<S>& kernels,
                 const Tensor<S>& bias) {
  require(input.shape.size() == 4, "conv2d: input must be B x C x H x W");
  require(kernels.shape.size() == 4, "conv2d: kernels must be K x C x k x k");
  const Eigen::Index B = input.dim(0), C = input.dim(1), H = input.dim(2),
                     W = input.dim(3);
  const Eigen::Index K = kernels.dim(0), k = kernels.dim(2);
  require(kernels.dim(1) == C, "conv2d: kernel channel mismatch");
  require(kernels.dim(3) == k, "conv2d: kernels must be square");
  require(bias.size() == K, "conv2d: bias size mismatch");
  require(H >= k && W >= k, "conv2d: input smaller than kernel");
  const Eigen::Index oh = H - k + 1, ow = W - k + 1;

  Tensor<S> out({B, K, oh, ow});
  Eigen::Map<const RowMat<S>> kerM(kernels.ptr(), K, C * k * k);
  Eigen::Map<const VecX<S>> biasV(bias.ptr(), K);

#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    MatX<S> cols;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (Eigen::Index b = 0; b < B; ++b) {
      im2col(input.ptr() + b * C * H * W, C, H, W, k, cols);
      Eigen::Map<RowMat<S>> outM(out.ptr() + b * K * oh * ow, K, oh * ow);
      outM.noalias() = kerM * cols;
      outM.colwise() += biasV;
    }
  }
  return out;
}

template <class S>
struct ConvGrads {
  Tensor<S> kernels, bias, input;
};

template <class S>
ConvGrads<S> conv2d_backward(const Tensor<S>& input, const Tensor<S>& kernels,
                             const Tensor<S>& dout) {
  const Eigen::Index B = input.dim(0), C = input.dim(1), H = input.dim(2),
                     W = input.dim(3);
  const Eigen::Index K = kernels.dim(0), k = kernels.dim(2);
  const Eigen::Index oh = H - k + 1, ow = W - k + 1;
  require(dout.shape == std::vector<Eigen::Index>({B, K, oh, ow}),
          "conv2d_backward: output-gradient shape mismatch");

  ConvGrads<S> g;
  g.kernels.resize(kernels.shape);
  g.bias.resize({K});
  g.input.resize(input.shape);
  Eigen::Map<const RowMat<S>> kerM(kernels.ptr(), K, C * k * k);

  // per-image partials, reduced in index order for determinism
  std::vector<MatX<S>> dker(static_cast<size_t>(B));
  std::vector<VecX<S>> dbias(static_cast<size_t>(B));

#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    MatX<S> cols, dcols;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (Eigen::Index b = 0; b < B; ++b) {
      im2col(input.ptr() + b * C * H * W, C, H, W, k, cols);
      Eigen::Map<const RowMat<S>> doutM(dout.ptr() + b * K * oh * ow, K,
                                        oh * ow);
      dker[b].noalias() = doutM * cols.transpose();
      dbias[b] = doutM.rowwise().sum();
      dcols.noalias() = kerM.transpose() * doutM;
      // col2im scatter
      S* din = g.input.ptr() + b * C * H * W;
      for (Eigen::Index oy = 0; oy < oh; ++oy)
        for (Eigen::Index ox = 0; ox < ow; ++ox) {
          const S* src = dcols.data() + (oy * ow + ox) * dcols.rows();
          for (Eigen::Index c = 0; c < C; ++c) {
            S* plane = din + c * H * W;
            for (Eigen::Index ky = 0; ky < k; ++ky) {
              S* drow = plane + (oy + ky) * W + ox;
              for (Eigen::Index kx = 0; kx < k; ++kx) drow[kx] += *src++;
            }
          }
        }
    }
  }
  Eigen::Map<RowMat<S>> gkerM(g.kernels.ptr(), K, C * k * k);
  Eigen::Map<VecX<S>> gbiasV(g.bias.ptr(), K);
  for (Eigen::Index b = 0; b < B; ++b) {
    gkerM += dker[b];
    gbiasV += dbias[b];
  }
  return g;
}

// ---------------------------------------------------------------------------
// relu / maxpool

template <class S>
Tensor<S> relu(const Tensor<S>& x) {
  Tensor<S> y;
  y.shape = x.shape;
  y.data = x.data.cwiseMax(S(0));
  return y;
}

// dx = dy where the forward input was positive
template <class S>
Tensor<S> relu_backward(const Tensor<S>& input, const Tensor<S>& dy) {
  Tensor<S> dx;
  dx.shape = input.shape;
  dx.data =
      (input.data.array() > S(0)).template cast<S>() * dy.data.array();
  return dx;
}

// 2x2 max pooling, stride 2; odd trailing row/column dropped.
template <class S>
Tensor<S> maxpool2(const Tensor<S>& x, std::vector<int32_t>* argmax = nullptr) {
  require(x.shape.size() == 4, "maxpool2: input must be B x C x H x W");
  const Eigen::Index B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const Eigen::Index oh = H / 2, ow = W / 2;
  require(oh > 0 && ow > 0, "maxpool2: input too small");
  Tensor<S> y({B, C, oh, ow});
  if (argmax) argmax->assign(static_cast<size_t>(B * C * oh * ow), 0);
  for (Eigen::Index bc = 0; bc < B * C; ++bc) {
    const S* in = x.ptr() + bc * H * W;
    S* out = y.ptr() + bc * oh * ow;
    int32_t* am = argmax ? argmax->data() + bc * oh * ow : nullptr;
    for (Eigen::Index oy = 0; oy < oh; ++oy)
      for (Eigen::Index ox = 0; ox < ow; ++ox) {
        const Eigen::Index base = 2 * oy * W + 2 * ox;
        Eigen::Index best = base;
        S v = in[base];
        for (Eigen::Index idx :
             {base + 1, base + W, base + W + 1})
          if (in[idx] > v) {
            v = in[idx];
            best = idx;
          }
        out[oy * ow + ox] = v;
        if (am) am[oy * ow + ox] = static_cast<int32_t>(best);
      }
  }
  return y;
}

template <class S>
Tensor<S> maxpool2_backward(const Tensor<S>& input,
                            const std::vector<int32_t>& argmax,
                            const Tensor<S>& dy) {
  const Eigen::Index B = input.dim(0), C = input.dim(1), H = input.dim(2),
                     W = input.dim(3);
  const Eigen::Index oh = H / 2, ow = W / 2;
  Tensor<S> dx(input.shape);
  for (Eigen::Index bc = 0; bc < B * C; ++bc) {
    S* dst = dx.ptr() + bc * H * W;
    const S* src = dy.ptr() + bc * oh * ow;
    const int32_t* am = argmax.data() + bc * oh * ow;
    for (Eigen::Index i = 0; i < oh * ow; ++i) dst[am[i]] += src[i];
  }
  return dx;
}

// ---------------------------------------------------------------------------
// batch normalization (per channel over B, H, W)

enum class Mode { kTrain, kEval };

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.1;  // running <- (1-m) running + m batch

template <class S>
struct BatchNormState {
  Tensor<S> gamma, beta;          // learnable
  Tensor<S> running_mean, running_var;
  bool initialized = false;

  void resize(Eigen::Index channels) {
    gamma.resize({channels});
    gamma.data.setOnes();
    beta.resize({channels});
    running_mean.resize({channels});
    running_var.resize({channels});
  }
};

template <class S>
struct BatchNormCache {
  Tensor<S> xhat;
  VecX<S> inv_std;  // per channel
};

template <class S>
Tensor<S> batchnorm(const Tensor<S>& x, BatchNormState<S>& st, Mode mode,
                    BatchNormCache<S>* cache = nullptr) {
  require(x.shape.size() == 4, "batchnorm: input must be B x C x H x W");
  const Eigen::Index B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  require(st.gamma.size() == C, "batchnorm: channel mismatch");
  const Eigen::Index plane = H * W;
  const Eigen::Index count = B * plane;

  VecX<S> mean(C), inv_std(C);
  if (mode == Mode::kTrain) {
    require(count >= 2, "batchnorm: train mode needs at least 2 values per channel");
    for (Eigen::Index c = 0; c < C; ++c) {
      double sum = 0.0, sq = 0.0;
      for (Eigen::Index b = 0; b < B; ++b) {
        Eigen::Map<const VecX<S>> v(x.ptr() + (b * C + c) * plane, plane);
        sum += static_cast<double>(v.template cast<double>().sum());
        sq += static_cast<double>(v.template cast<double>().squaredNorm());
      }
      const double mu = sum / count;
      const double var = sq / count - mu * mu;
      mean[c] = static_cast<S>(mu);
      inv_std[c] = static_cast<S>(1.0 / std::sqrt(var + kBnEps));
      st.running_mean.data[c] = static_cast<S>(
          (1.0 - kBnMomentum) * st.running_mean.data[c] + kBnMomentum * mu);
      st.running_var.data[c] = static_cast<S>(
          (1.0 - kBnMomentum) * st.running_var.data[c] + kBnMomentum * var);
    }
    st.initialized = true;
  } else {
    if (!st.initialized)
      throw DataError("batchnorm: eval before any training update");
    for (Eigen::Index c = 0; c < C; ++c) {
      mean[c] = st.running_mean.data[c];
      inv_std[c] = static_cast<S>(
          1.0 / std::sqrt(static_cast<double>(st.running_var.data[c]) + kBnEps));
    }
  }

  Tensor<S> y(x.shape);
  Tensor<S> xhat;
  if (cache) xhat.resize(x.shape);
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index c = 0; c < C; ++c) {
      Eigen::Map<const VecX<S>> in(x.ptr() + (b * C + c) * plane, plane);
      Eigen::Map<VecX<S>> out(y.ptr() + (b * C + c) * plane, plane);
      auto normalized = (in.array() - mean[c]) * inv_std[c];
      if (cache) {
        Eigen::Map<VecX<S>> xh(xhat.ptr() + (b * C + c) * plane, plane);
        xh = normalized;
        out = xh.array() * st.gamma.data[c] + st.beta.data[c];
      } else {
        out = normalized * st.gamma.data[c] + st.beta.data[c];
      }
    }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <class S>
struct BatchNormGrads {
  Tensor<S> gamma, beta, input;
};

template <class S>
BatchNormGrads<S> batchnorm_backward(const BatchNormState<S>& st,
                                     const BatchNormCache<S>& cache,
                                     const Tensor<S>& dy) {
  const Eigen::Index B = dy.dim(0), C = dy.dim(1), H = dy.dim(2),
                     W = dy.dim(3);
  const Eigen::Index plane = H * W;
  const double count = static_cast<double>(B * plane);
  BatchNormGrads<S> g;
  g.gamma.resize({C});
  g.beta.resize({C});
  g.input.resize(dy.shape);
  for (Eigen::Index c = 0; c < C; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (Eigen::Index b = 0; b < B; ++b) {
      Eigen::Map<const VecX<S>> dyv(dy.ptr() + (b * C + c) * plane, plane);
      Eigen::Map<const VecX<S>> xh(cache.xhat.ptr() + (b * C + c) * plane,
                                   plane);
      sum_dy += static_cast<double>(dyv.template cast<double>().sum());
      sum_dy_xhat += static_cast<double>(
          (dyv.template cast<double>().array() *
           xh.template cast<double>().array())
              .sum());
    }
    g.beta.data[c] = static_cast<S>(sum_dy);
    g.gamma.data[c] = static_cast<S>(sum_dy_xhat);
    const double gamma = static_cast<double>(st.gamma.data[c]);
    const double inv_std = static_cast<double>(cache.inv_std[c]);
    for (Eigen::Index b = 0; b < B; ++b) {
      Eigen::Map<const VecX<S>> dyv(dy.ptr() + (b * C + c) * plane, plane);
      Eigen::Map<const VecX<S>> xh(cache.xhat.ptr() + (b * C + c) * plane,
                                   plane);
      Eigen::Map<VecX<S>> dx(g.input.ptr() + (b * C + c) * plane, plane);
      dx = ((dyv.template cast<double>().array() * count - sum_dy -
             xh.template cast<double>().array() * sum_dy_xhat) *
            (gamma * inv_std / count))
               .template cast<S>();
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// fully connected

template <class S>
struct FcGrads {
  Tensor<S> weights, bias, input;
};

// x: B x in (row-major), weights: out x in, bias: out -> B x out
template <class S>
Tensor<S> fully_connected(const Tensor<S>& x, const Tensor<S>& weights,
                          const Tensor<S>& bias) {
  const Eigen::Index B = x.dim(0), in = x.dim(1);
  const Eigen::Index out = weights.dim(0);
  require(weights.dim(1) == in && bias.size() == out,
          "fully_connected: shape mismatch");
  Tensor<S> y({B, out});
  Eigen::Map<const RowMat<S>> xM(x.ptr(), B, in);
  Eigen::Map<const RowMat<S>> wM(weights.ptr(), out, in);
  Eigen::Map<RowMat<S>> yM(y.ptr(), B, out);
  yM.noalias() = xM * wM.transpose();
  yM.rowwise() += Eigen::Map<const VecX<S>>(bias.ptr(), out).transpose();
  return y;
}

template <class S>
FcGrads<S> fully_connected_backward(const Tensor<S>& x,
                                    const Tensor<S>& weights,
                                    const Tensor<S>& dy) {
  const Eigen::Index B = x.dim(0), in = x.dim(1), out = weights.dim(0);
  FcGrads<S> g;
  g.weights.resize(weights.shape);
  g.bias.resize({out});
  g.input.resize(x.shape);
  Eigen::Map<const RowMat<S>> xM(x.ptr(), B, in);
  Eigen::Map<const RowMat<S>> wM(weights.ptr(), out, in);
  Eigen::Map<const RowMat<S>> dyM(dy.ptr(), B, out);
  Eigen::Map<RowMat<S>> gwM(g.weights.ptr(), out, in);
  Eigen::Map<RowMat<S>> gxM(g.input.ptr(), B, in);
  gwM.noalias() = dyM.transpose() * xM;
  Eigen::Map<VecX<S>>(g.bias.ptr(), out) = dyM.colwise().sum().transpose();
  gxM.noalias() = dyM * wM;
  return g;
}

// ---------------------------------------------------------------------------
// loss

// Mean over all B*D entries of squared difference; gradient w.r.t. pred.
template <class S>
std::pair<double, Tensor<S>> mse_loss(const Tensor<S>& pred,
                                      const Tensor<S>& target) {
  require(pred.shape == target.shape, "mse_loss: shape mismatch");
  const double n = static_cast<double>(pred.size());
  const auto diff =
      (pred.data.template cast<double>() - target.data.template cast<double>())
          .eval();
  const double loss = diff.squaredNorm() / n;
  Tensor<S> grad;
  grad.shape = pred.shape;
  grad.data = (diff * (2.0 / n)).template cast<S>();
  return {loss, std::move(grad)};
}

// ---------------------------------------------------------------------------
// the regressor network

struct NetConfig {
  int in_h = 200, in_w = 200;
  int kernel = 5;
  int conv1_channels = 8;
  int conv2_channels = 16;
  int hidden = 128;
  int outputs = kNumDims;
  // The described pipeline applies relu+batchnorm after conv1 only; this
  // flag inserts the same pair after conv2 for ablations.
  bool relu_bn_after_conv2 = false;
  bool nan_guard = true;

  struct Chain {
    int h1, w1, hp1, wp1, h2, w2, hp2, wp2, flat;
  };
  Chain chain() const {
    Chain c;
    c.h1 = in_h - kernel + 1;
    c.w1 = in_w - kernel + 1;
    c.hp1 = c.h1 / 2;
    c.wp1 = c.w1 / 2;
    c.h2 = c.hp1 - kernel + 1;
    c.w2 = c.wp1 - kernel + 1;
    c.hp2 = c.h2 / 2;
    c.wp2 = c.w2 / 2;
    c.flat = conv2_channels * c.hp2 * c.wp2;
    return c;
  }
};

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  int batch_size = 100;
  int epochs = 20;
  int hidden = 128;
  uint64_t seed = 0;

  void validate() const {
    if (!(lr > 0)) throw DataError("learning rate must be positive");
    if (!(momentum >= 0 && momentum < 1))
      throw DataError("momentum must be in [0, 1)");
    if (batch_size < 1) throw DataError("batch size must be >= 1");
    if (epochs < 1) throw DataError("epochs must be >= 1");
    if (hidden < 1) throw DataError("hidden width must be >= 1");
  }
};

// Learnable parameters / their gradients / SGD velocity all share this shape.
template <class S>
struct ParamSet {
  Tensor<S> conv1_k, conv1_b;
  Tensor<S> bn1_gamma, bn1_beta;
  Tensor<S> conv2_k, conv2_b;
  Tensor<S> bn2_gamma, bn2_beta;  // empty unless relu_bn_after_conv2
  Tensor<S> fc1_w, fc1_b;
  Tensor<S> fc2_w, fc2_b;

  template <class F>
  void for_each(F&& f) {
    f("conv1.kernels", conv1_k);
    f("conv1.bias", conv1_b);
    f("bn1.gamma", bn1_gamma);
    f("bn1.beta", bn1_beta);
    f("conv2.kernels", conv2_k);
    f("conv2.bias", conv2_b);
    if (bn2_gamma.size() > 0) {
      f("bn2.gamma", bn2_gamma);
      f("bn2.beta", bn2_beta);
    }
    f("fc1.weights", fc1_w);
    f("fc1.bias", fc1_b);
    f("fc2.weights", fc2_w);
    f("fc2.bias", fc2_b);
  }
};

template <class S>
struct Network {
  NetConfig cfg;
  ParamSet<S> params;
  BatchNormState<S> bn1, bn2;

  explicit Network(const NetConfig& config = {}) : cfg(config) {
    const auto c = cfg.chain();
    if (c.h2 < 1 || c.w2 < 1 || c.hp2 < 1 || c.wp2 < 1)
      throw DataError("network input too small for the conv/pool chain");
    // canonical 200x200 shape invariant
    if (cfg.in_h == 200 && cfg.in_w == 200 && cfg.kernel == 5 &&
        cfg.conv2_channels == 16) {
      if (!(c.h1 == 196 && c.hp1 == 98 && c.h2 == 94 && c.hp2 == 47 &&
            c.flat == 35344))
        throw Error("shape chain violated: expected 200->196->98->94->47, flatten 35344");
    }
    params.conv1_k.resize({cfg.conv1_channels, 1, cfg.kernel, cfg.kernel});
    params.conv1_b.resize({cfg.conv1_channels});
    bn1.resize(cfg.conv1_channels);
    params.bn1_gamma = bn1.gamma;
    params.bn1_beta = bn1.beta;
    params.conv2_k.resize(
        {cfg.conv2_channels, cfg.conv1_channels, cfg.kernel, cfg.kernel});
    params.conv2_b.resize({cfg.conv2_channels});
    if (cfg.relu_bn_after_conv2) {
      bn2.resize(cfg.conv2_channels);
      params.bn2_gamma = bn2.gamma;
      params.bn2_beta = bn2.beta;
    }
    params.fc1_w.resize({cfg.hidden, c.flat});
    params.fc1_b.resize({cfg.hidden});
    params.fc2_w.resize({cfg.outputs, cfg.hidden});
    params.fc2_b.resize({cfg.outputs});
  }

  // Uniform +-1/sqrt(fan_in), a single seeded stream in fixed order.
  void init(uint64_t seed) {
    std::mt19937_64 rng = seeded_stream(seed, 0x6e657477, 0);
    auto fill = [&rng](Tensor<S>& t, Eigen::Index fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (Eigen::Index i = 0; i < t.size(); ++i)
        t.data[i] = static_cast<S>(uniform_range(rng, -bound, bound));
    };
    const Eigen::Index f1 = cfg.kernel * cfg.kernel;
    fill(params.conv1_k, f1);
    fill(params.conv1_b, f1);
    const Eigen::Index f2 = cfg.conv1_channels * cfg.kernel * cfg.kernel;
    fill(params.conv2_k, f2);
    fill(params.conv2_b, f2);
    const auto c = cfg.chain();
    fill(params.fc1_w, c.flat);
    fill(params.fc1_b, c.flat);
    fill(params.fc2_w, cfg.hidden);
    fill(params.fc2_b, cfg.hidden);
  }

  struct Cache {
    Tensor<S> input;
    Tensor<S> c1_pre;  // conv1 output, pre-relu
    BatchNormCache<S> bn1_cache;
    Tensor<S> p1_in;   // batchnorm output (pool1 input)
    std::vector<int32_t> p1_argmax;
    Tensor<S> p1;      // pool1 output = conv2 input
    Tensor<S> c2_pre;  // conv2 output
    BatchNormCache<S> bn2_cache;
    Tensor<S> p2_in;   // pool2 input
    std::vector<int32_t> p2_argmax;
    Tensor<S> flat;    // B x flat
    Tensor<S> f1_pre;  // fc1 output, pre-relu
    Tensor<S> f1_act;  // fc1 output after relu
  };

  Tensor<S> forward(const Tensor<S>& images, Mode mode,
                    Cache* cache = nullptr) {
    require(images.shape.size() == 4 && images.dim(1) == 1 &&
                images.dim(2) == cfg.in_h && images.dim(3) == cfg.in_w,
            "forward: input must be B x 1 x H x W matching the config");
    const bool g = cfg.nan_guard;
    Cache local;
    Cache& c = cache ? *cache : local;
    if (cache) c.input = images;

    c.c1_pre = conv2d(images, params.conv1_k, params.conv1_b);
    if (g) guard_finite(c.c1_pre, "conv1");
    Tensor<S> act = relu(c.c1_pre);
    bn1.gamma = params.bn1_gamma;
    bn1.beta = params.bn1_beta;
    c.p1_in = batchnorm(act, bn1, mode, cache ? &c.bn1_cache : nullptr);
    if (g) guard_finite(c.p1_in, "batchnorm1");
    c.p1 = maxpool2(c.p1_in, cache ? &c.p1_argmax : nullptr);

    c.c2_pre = conv2d(c.p1, params.conv2_k, params.conv2_b);
    if (g) guard_finite(c.c2_pre, "conv2");
    if (cfg.relu_bn_after_conv2) {
      Tensor<S> act2 = relu(c.c2_pre);
      bn2.gamma = params.bn2_gamma;
      bn2.beta = params.bn2_beta;
      c.p2_in = batchnorm(act2, bn2, mode, cache ? &c.bn2_cache : nullptr);
      if (g) guard_finite(c.p2_in, "batchnorm2");
    } else {
      c.p2_in = c.c2_pre;
    }
    Tensor<S> p2 = maxpool2(c.p2_in, cache ? &c.p2_argmax : nullptr);

    const auto ch = cfg.chain();
    c.flat.shape = {p2.dim(0), ch.flat};
    c.flat.data = std::move(p2.data);

    c.f1_pre = fully_connected(c.flat, params.fc1_w, params.fc1_b);
    if (g) guard_finite(c.f1_pre, "fc1");
    c.f1_act = relu(c.f1_pre);
    Tensor<S> out = fully_connected(c.f1_act, params.fc2_w, params.fc2_b);
    if (g) guard_finite(out, "fc2");
    return out;
  }

  ParamSet<S> zero_grads() const {
    ParamSet<S> g;
    g.conv1_k.resize(params.conv1_k.shape);
    g.conv1_b.resize(params.conv1_b.shape);
    g.bn1_gamma.resize(params.bn1_gamma.shape);
    g.bn1_beta.resize(params.bn1_beta.shape);
    g.conv2_k.resize(params.conv2_k.shape);
    g.conv2_b.resize(params.conv2_b.shape);
    if (cfg.relu_bn_after_conv2) {
      g.bn2_gamma.resize(params.bn2_gamma.shape);
      g.bn2_beta.resize(params.bn2_beta.shape);
    }
    g.fc1_w.resize(params.fc1_w.shape);
    g.fc1_b.resize(params.fc1_b.shape);
    g.fc2_w.resize(params.fc2_w.shape);
    g.fc2_b.resize(params.fc2_b.shape);
    return g;
  }

  // dpred: gradient of the loss w.r.t. the network output (B x outputs).
  ParamSet<S> backward(const Cache& c, const Tensor<S>& dpred) {
    ParamSet<S> g = zero_grads();

    FcGrads<S> g2 = fully_connected_backward(c.f1_act, params.fc2_w, dpred);
    g.fc2_w = std::move(g2.weights);
    g.fc2_b = std::move(g2.bias);
    Tensor<S> d_f1 = relu_backward(c.f1_pre, g2.input);
    FcGrads<S> g1 = fully_connected_backward(c.flat, params.fc1_w, d_f1);
    g.fc1_w = std::move(g1.weights);
    g.fc1_b = std::move(g1.bias);

    Tensor<S> d_p2 = std::move(g1.input);
    d_p2.shape = c.p2_in.shape;
    d_p2.shape[2] /= 2;
    d_p2.shape[3] /= 2;
    Tensor<S> d_p2in = maxpool2_backward(c.p2_in, c.p2_argmax, d_p2);

    Tensor<S> d_c2;
    if (cfg.relu_bn_after_conv2) {
      BatchNormGrads<S> bg = batchnorm_backward(bn2, c.bn2_cache, d_p2in);
      g.bn2_gamma = std::move(bg.gamma);
      g.bn2_beta = std::move(bg.beta);
      d_c2 = relu_backward(c.c2_pre, bg.input);
    } else {
      d_c2 = std::move(d_p2in);
    }
    ConvGrads<S> cg2 = conv2d_backward(c.p1, params.conv2_k, d_c2);
    g.conv2_k = std::move(cg2.kernels);
    g.conv2_b = std::move(cg2.bias);

    Tensor<S> d_p1 = std::move(cg2.input);
    Tensor<S> d_bn1 = maxpool2_backward(c.p1_in, c.p1_argmax, d_p1);
    BatchNormGrads<S> bg1 = batchnorm_backward(bn1, c.bn1_cache, d_bn1);
    g.bn1_gamma = std::move(bg1.gamma);
    g.bn1_beta = std::move(bg1.beta);
    Tensor<S> d_c1 = relu_backward(c.c1_pre, bg1.input);
    ConvGrads<S> cg1 = conv2d_backward(c.input, params.conv1_k, d_c1);
    g.conv1_k = std::move(cg1.kernels);
    g.conv1_b = std::move(cg1.bias);

    if (cfg.nan_guard)
      g.for_each([](const char*, const Tensor<S>& t) {
        if (!t.all_finite()) throw Error("non-finite gradient");
      });
    return g;
  }
};

// v <- momentum * v + g;  p <- p - lr * v
template <class S>
void sgd_momentum_step(ParamSet<S>& params, ParamSet<S>& grads,
                       ParamSet<S>& velocity, double lr, double momentum) {
  auto step = [&](Tensor<S>& p, const Tensor<S>& g, Tensor<S>& v) {
    require(p.shape == g.shape && p.shape == v.shape,
            "sgd: parameter/gradient/velocity shape mismatch");
    v.data = static_cast<S>(momentum) * v.data + g.data;
    p.data -= static_cast<S>(lr) * v.data;
  };
  step(params.conv1_k, grads.conv1_k, velocity.conv1_k);
  step(params.conv1_b, grads.conv1_b, velocity.conv1_b);
  step(params.bn1_gamma, grads.bn1_gamma, velocity.bn1_gamma);
  step(params.bn1_beta, grads.bn1_beta, velocity.bn1_beta);
  step(params.conv2_k, grads.conv2_k, velocity.conv2_k);
  step(params.conv2_b, grads.conv2_b, velocity.conv2_b);
  if (params.bn2_gamma.size() > 0) {
    step(params.bn2_gamma, grads.bn2_gamma, velocity.bn2_gamma);
    step(params.bn2_beta, grads.bn2_beta, velocity.bn2_beta);
  }
  step(params.fc1_w, grads.fc1_w, velocity.fc1_w);
  step(params.fc1_b, grads.fc1_b, velocity.fc1_b);
  step(params.fc2_w, grads.fc2_w, velocity.fc2_w);
  step(params.fc2_b, grads.fc2_b, velocity.fc2_b);
}

// ---------------------------------------------------------------------------
// checkpoints

namespace detail {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ParseError("checkpoint: truncated read");
  return v;
}

}  // namespace detail

template <class S>
void save_checkpoint(const Network<S>& net, const std::string& path,
                     const std::string& meta_json) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write checkpoint: " + path);
  os.write("ANCK", 4);
  detail::put<uint32_t>(os, 1);

  nlohmann::json meta = meta_json.empty()
                            ? nlohmann::json::object()
                            : nlohmann::json::parse(meta_json);
  meta["scalar_bytes"] = sizeof(S);
  meta["bn1_initialized"] = net.bn1.initialized;
  meta["config"] = {{"in_h", net.cfg.in_h},
                    {"in_w", net.cfg.in_w},
                    {"kernel", net.cfg.kernel},
                    {"conv1_channels", net.cfg.conv1_channels},
                    {"conv2_channels", net.cfg.conv2_channels},
                    {"hidden", net.cfg.hidden},
                    {"outputs", net.cfg.outputs},
                    {"relu_bn_after_conv2", net.cfg.relu_bn_after_conv2}};
  const std::string m = meta.dump();
  detail::put<uint64_t>(os, m.size());
  os.write(m.data(), static_cast<std::streamsize>(m.size()));

  std::vector<std::pair<std::string, const Tensor<S>*>> blobs;
  const_cast<Network<S>&>(net).params.for_each(
      [&](const char* name, Tensor<S>& t) { blobs.emplace_back(name, &t); });
  blobs.emplace_back("bn1.running_mean", &net.bn1.running_mean);
  blobs.emplace_back("bn1.running_var", &net.bn1.running_var);
  if (net.cfg.relu_bn_after_conv2) {
    blobs.emplace_back("bn2.running_mean", &net.bn2.running_mean);
    blobs.emplace_back("bn2.running_var", &net.bn2.running_var);
  }
  detail::put<uint32_t>(os, static_cast<uint32_t>(blobs.size()));
  for (const auto& [name, t] : blobs) {
    detail::put<uint16_t>(os, static_cast<uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put<uint8_t>(os, static_cast<uint8_t>(sizeof(S)));
    detail::put<uint8_t>(os, static_cast<uint8_t>(t->shape.size()));
    for (auto d : t->shape) detail::put<int64_t>(os, d);
    os.write(reinterpret_cast<const char*>(t->ptr()),
             static_cast<std::streamsize>(t->size() * sizeof(S)));
  }
  if (!os) throw Error("short write: " + path);
}

template <class S>
Network<S> load_checkpoint(const std::string& path,
                           std::string* meta_json = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "ANCK", 4) != 0)
    throw ParseError(path + ": not a checkpoint file");
  const auto version = detail::get<uint32_t>(is);
  if (version != 1) throw ParseError(path + ": unsupported checkpoint version");
  const auto mlen = detail::get<uint64_t>(is);
  std::string m(mlen, '\0');
  is.read(m.data(), static_cast<std::streamsize>(mlen));
  if (!is) throw ParseError(path + ": truncated metadata");
  nlohmann::json meta = nlohmann::json::parse(m);
  if (meta_json) *meta_json = m;
  if (meta.at("scalar_bytes").get<size_t>() != sizeof(S))
    throw DataError(path + ": checkpoint scalar width differs from this build");

  NetConfig cfg;
  const auto& jc = meta.at("config");
  cfg.in_h = jc.at("in_h").get<int>();
  cfg.in_w = jc.at("in_w").get<int>();
  cfg.kernel = jc.at("kernel").get<int>();
  cfg.conv1_channels = jc.at("conv1_channels").get<int>();
  cfg.conv2_channels = jc.at("conv2_channels").get<int>();
  cfg.hidden = jc.at("hidden").get<int>();
  cfg.outputs = jc.at("outputs").get<int>();
  cfg.relu_bn_after_conv2 = jc.at("relu_bn_after_conv2").get<bool>();
  Network<S> net(cfg);
  net.bn1.initialized = meta.value("bn1_initialized", false);
  net.bn2.initialized = net.bn1.initialized;

  std::map<std::string, Tensor<S>*> slots;
  net.params.for_each(
      [&](const char* name, Tensor<S>& t) { slots[name] = &t; });
  slots["bn1.running_mean"] = &net.bn1.running_mean;
  slots["bn1.running_var"] = &net.bn1.running_var;
  if (cfg.relu_bn_after_conv2) {
    slots["bn2.running_mean"] = &net.bn2.running_mean;
    slots["bn2.running_var"] = &net.bn2.running_var;
  }

  const auto count = detail::get<uint32_t>(is);
  for (uint32_t i = 0; i < count; ++i) {
    const auto nlen = detail::get<uint16_t>(is);
    std::string name(nlen, '\0');
    is.read(name.data(), nlen);
    const auto sbytes = detail::get<uint8_t>(is);
    if (sbytes != sizeof(S)) throw ParseError(path + ": blob scalar mismatch");
    const auto ndim = detail::get<uint8_t>(is);
    std::vector<Eigen::Index> dims(ndim);
    for (auto& d : dims) d = detail::get<int64_t>(is);
    auto it = slots.find(name);
    if (it == slots.end()) throw ParseError(path + ": unknown blob " + name);
    if (it->second->shape != dims)
      throw ParseError(path + ": blob shape mismatch for " + name);
    is.read(reinterpret_cast<char*>(it->second->ptr()),
            static_cast<std::streamsize>(it->second->size() * sizeof(S)));
    if (!is) throw ParseError(path + ": truncated blob " + name);
  }
  // keep the batchnorm views consistent with the loaded parameters
  net.bn1.gamma = net.params.bn1_gamma;
  net.bn1.beta = net.params.bn1_beta;
  if (cfg.relu_bn_after_conv2) {
    net.bn2.gamma = net.params.bn2_gamma;
    net.bn2.beta = net.params.bn2_beta;
  }
  return net;
}

}  // namespace anthro::nn
