#include "rolle/learning/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "rolle/errors.hpp"

namespace rolle::learning {

ModelSpec ModelSpec::pilotnet() {
  ModelSpec s;
  s.in_channels = 3;
  s.in_height = 66;
  s.in_width = 200;
  s.convs = {{24, 5, 2}, {36, 5, 2}, {48, 5, 2}, {64, 3, 1}, {64, 3, 1}};
  s.dense = {100, 50, 10, 1};
  return s;
}

ModelSpec ModelSpec::reduced() {
  ModelSpec s;
  s.in_channels = 3;
  s.in_height = 10;
  s.in_width = 20;
  s.convs = {{2, 3, 1}, {3, 3, 2}, {3, 2, 1}, {4, 2, 1}, {4, 1, 1}};
  s.dense = {8, 4, 2, 1};
  return s;
}

std::vector<LayerShape> shape_chain(const ModelSpec& spec) {
  if (spec.in_channels <= 0 || spec.in_height <= 0 || spec.in_width <= 0)
    throw ShapeError("model input must have positive extents");
  if (spec.dense.empty() || spec.dense.back() != 1)
    throw ShapeError("model must end in a single-output dense layer");
  std::vector<LayerShape> chain;
  int c = spec.in_channels, h = spec.in_height, w = spec.in_width;
  for (std::size_t i = 0; i < spec.convs.size(); ++i) {
    const auto& cs = spec.convs[i];
    const std::string name = "conv" + std::to_string(i + 1);
    if (cs.out_channels <= 0 || cs.kernel <= 0 || cs.stride <= 0)
      throw ShapeError(name + ": non-positive channel, kernel or stride");
    if (cs.kernel > h || cs.kernel > w)
      throw ShapeError(name + ": kernel " + std::to_string(cs.kernel) + " does not fit input " +
                       std::to_string(c) + "@" + std::to_string(h) + "x" + std::to_string(w));
    c = cs.out_channels;
    h = (h - cs.kernel) / cs.stride + 1;
    w = (w - cs.kernel) / cs.stride + 1;
    chain.push_back({name, c, h, w});
  }
  chain.push_back({"flatten", c * h * w, 1, 1});
  for (std::size_t i = 0; i < spec.dense.size(); ++i) {
    if (spec.dense[i] <= 0) throw ShapeError("dense" + std::to_string(i + 1) + ": non-positive width");
    chain.push_back({"dense" + std::to_string(i + 1), spec.dense[i], 1, 1});
  }
  return chain;
}

template <class T>
Model<T>::Model(const ModelSpec& spec) : spec_(spec) {
  const auto chain = shape_chain(spec);
  int c = spec.in_channels, h = spec.in_height, w = spec.in_width;
  for (std::size_t i = 0; i < spec.convs.size(); ++i) {
    Layer<T> l;
    l.kind = Layer<T>::Kind::conv;
    l.in_channels = c;
    l.in_height = h;
    l.in_width = w;
    l.out_channels = chain[i].channels;
    l.out_height = chain[i].height;
    l.out_width = chain[i].width;
    l.kernel = spec.convs[i].kernel;
    l.stride = spec.convs[i].stride;
    l.relu = true;
    l.weights.assign(static_cast<std::size_t>(l.out_channels) * l.patch_size(), T(0));
    l.bias.assign(static_cast<std::size_t>(l.out_channels), T(0));
    layers_.push_back(std::move(l));
    c = chain[i].channels;
    h = chain[i].height;
    w = chain[i].width;
  }
  int in = c * h * w;
  for (std::size_t i = 0; i < spec.dense.size(); ++i) {
    Layer<T> l;
    l.kind = Layer<T>::Kind::dense;
    l.in_channels = in;
    l.out_channels = spec.dense[i];
    l.relu = i + 1 < spec.dense.size();
    l.weights.assign(static_cast<std::size_t>(l.out_channels) * static_cast<std::size_t>(in), T(0));
    l.bias.assign(static_cast<std::size_t>(l.out_channels), T(0));
    layers_.push_back(std::move(l));
    in = spec.dense[i];
  }
}

template <class T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

template <class T>
std::vector<std::span<T>> Model<T>::parameters() {
  std::vector<std::span<T>> out;
  for (auto& l : layers_) {
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
  }
  return out;
}

template <class T>
std::vector<std::span<const T>> Model<T>::parameters() const {
  std::vector<std::span<const T>> out;
  for (const auto& l : layers_) {
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
  }
  return out;
}

template <class T>
Model<T> init_model(const ModelSpec& spec, std::uint64_t seed) {
  Model<T> m(spec);
  std::mt19937_64 rng(seed);
  for (auto& l : m.layers()) {
    const std::size_t fan_in = l.kind == Layer<T>::Kind::conv ? l.patch_size() : l.in_size();
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& w : l.weights) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      w = static_cast<T>((2.0 * u - 1.0) * bound);
    }
  }
  return m;
}

namespace {

constexpr std::size_t kBlock = 512;
constexpr std::size_t kLanes = 16;

// Dot product with fixed lane-wise partial sums: vectorizes without
// reassociation flags and gives the same result on every run.
template <class T>
T dot(const T* __restrict a, const T* __restrict b, std::size_t n) {
  T acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (std::size_t j = 0; j < kLanes; ++j) acc[j] += a[i + j] * b[i + j];
  T tail = T(0);
  for (; i < n; ++i) tail += a[i] * b[i];
  for (std::size_t w = kLanes / 2; w > 0; w /= 2)
    for (std::size_t j = 0; j < w; ++j) acc[j] += acc[j + w];
  return acc[0] + tail;
}

template <class T>
void im2col(const Layer<T>& l, const T* __restrict in, T* __restrict cols) {
  const int k = l.kernel, s = l.stride, oh = l.out_height, ow = l.out_width;
  const std::size_t P = static_cast<std::size_t>(oh) * ow;
  std::size_t row = 0;
  for (int ic = 0; ic < l.in_channels; ++ic) {
    const T* plane = in + static_cast<std::size_t>(ic) * l.in_height * l.in_width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx, ++row) {
        T* dst = cols + row * P;
        for (int oy = 0; oy < oh; ++oy) {
          const T* src = plane + static_cast<std::size_t>(oy * s + ky) * l.in_width + kx;
          T* d = dst + static_cast<std::size_t>(oy) * ow;
          if (s == 1) {
            std::copy(src, src + ow, d);
          } else {
            for (int ox = 0; ox < ow; ++ox) d[ox] = src[static_cast<std::size_t>(ox) * s];
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const Layer<T>& l, const T* __restrict dcols, T* __restrict din) {
  const int k = l.kernel, s = l.stride, oh = l.out_height, ow = l.out_width;
  const std::size_t P = static_cast<std::size_t>(oh) * ow;
  std::size_t row = 0;
  for (int ic = 0; ic < l.in_channels; ++ic) {
    T* plane = din + static_cast<std::size_t>(ic) * l.in_height * l.in_width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx, ++row) {
        const T* src = dcols + row * P;
        for (int oy = 0; oy < oh; ++oy) {
          T* d = plane + static_cast<std::size_t>(oy * s + ky) * l.in_width + kx;
          const T* g = src + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) d[static_cast<std::size_t>(ox) * s] += g[ox];
        }
      }
    }
  }
}

template <class T>
struct VecOf;
template <>
struct VecOf<float> {
  typedef float type __attribute__((vector_size(64)));
};
template <>
struct VecOf<double> {
  typedef double type __attribute__((vector_size(64)));
};
template <class T>
using Vec = typename VecOf<T>::type;
template <class T>
constexpr std::size_t kVecLanes = 64 / sizeof(T);

template <class T>
inline Vec<T> vload(const T* p) {
  Vec<T> v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

template <class T>
inline void vstore(T* p, Vec<T> v) {
  std::memcpy(p, &v, sizeof v);
}

constexpr std::size_t kMr = 4;

// C[M][N] += A(M x Kc) * B[Kc][N], where A(i, k) = a[i * ars + k * acs] and
// rows of B and C are n_stride apart. Register tiles of kMr rows by two vectors.
template <class T>
void gemm_acc(std::size_t M, std::size_t N, std::size_t Kc, const T* __restrict a, std::size_t ars,
              std::size_t acs, const T* __restrict b, T* __restrict c, std::size_t n_stride) {
  constexpr std::size_t L = kVecLanes<T>;
  constexpr std::size_t Nr = 2 * L;
  std::size_t i = 0;
  for (; i + kMr <= M; i += kMr) {
    std::size_t j = 0;
    for (; j + Nr <= N; j += Nr) {
      Vec<T> acc[kMr][2];
#pragma GCC unroll 4
      for (std::size_t r = 0; r < kMr; ++r) {
        acc[r][0] = vload(c + (i + r) * n_stride + j);
        acc[r][1] = vload(c + (i + r) * n_stride + j + L);
      }
      for (std::size_t k = 0; k < Kc; ++k) {
        const T* brow = b + k * n_stride + j;
        const Vec<T> b0 = vload(brow);
        const Vec<T> b1 = vload(brow + L);
#pragma GCC unroll 4
        for (std::size_t r = 0; r < kMr; ++r) {
          const T av = a[(i + r) * ars + k * acs];
          acc[r][0] += av * b0;
          acc[r][1] += av * b1;
        }
      }
#pragma GCC unroll 4
      for (std::size_t r = 0; r < kMr; ++r) {
        vstore(c + (i + r) * n_stride + j, acc[r][0]);
        vstore(c + (i + r) * n_stride + j + L, acc[r][1]);
      }
    }
    if (j < N) {
      for (std::size_t k = 0; k < Kc; ++k) {
        const T* __restrict brow = b + k * n_stride;
        for (std::size_t r = 0; r < kMr; ++r) {
          const T av = a[(i + r) * ars + k * acs];
          T* __restrict crow = c + (i + r) * n_stride;
          for (std::size_t q = j; q < N; ++q) crow[q] += av * brow[q];
        }
      }
    }
  }
  for (; i < M; ++i) {
    T* __restrict crow = c + i * n_stride;
    for (std::size_t k = 0; k < Kc; ++k) {
      const T av = a[i * ars + k * acs];
      const T* __restrict brow = b + k * n_stride;
      for (std::size_t q = 0; q < N; ++q) crow[q] += av * brow[q];
    }
  }
}

template <class T>
T hsum(Vec<T> v) {
  T lanes[kVecLanes<T>];
  std::memcpy(lanes, &v, sizeof v);
  for (std::size_t w = kVecLanes<T> / 2; w > 0; w /= 2)
    for (std::size_t q = 0; q < w; ++q) lanes[q] += lanes[q + w];
  return lanes[0];
}

// C[M][K] += A[M][N] * B[K][N]^T, 4x4 tiles of vector dot products.
template <class T>
void gemm_nt_acc(std::size_t M, std::size_t K, std::size_t N, const T* __restrict a, const T* __restrict b,
                 T* __restrict c) {
  constexpr std::size_t R = 4;
  constexpr std::size_t L = kVecLanes<T>;
  std::size_t i = 0;
  for (; i + R <= M; i += R) {
    std::size_t k = 0;
    for (; k + R <= K; k += R) {
      Vec<T> acc[R][R] = {};
      std::size_t p = 0;
      for (; p + L <= N; p += L) {
        Vec<T> av[R], bv[R];
#pragma GCC unroll 4
        for (std::size_t r = 0; r < R; ++r) {
          av[r] = vload(a + (i + r) * N + p);
          bv[r] = vload(b + (k + r) * N + p);
        }
#pragma GCC unroll 4
        for (std::size_t r = 0; r < R; ++r)
#pragma GCC unroll 4
          for (std::size_t s2 = 0; s2 < R; ++s2) acc[r][s2] += av[r] * bv[s2];
      }
      for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t s2 = 0; s2 < R; ++s2) {
          T tail = T(0);
          for (std::size_t pp = p; pp < N; ++pp) tail += a[(i + r) * N + pp] * b[(k + s2) * N + pp];
          c[(i + r) * K + k + s2] += hsum<T>(acc[r][s2]) + tail;
        }
      }
    }
    for (; k < K; ++k)
      for (std::size_t r = 0; r < R; ++r) c[(i + r) * K + k] += dot(a + (i + r) * N, b + k * N, N);
  }
  for (; i < M; ++i)
    for (std::size_t k = 0; k < K; ++k) c[i * K + k] += dot(a + i * N, b + k * N, N);
}

// out[oc][p] = b[oc] + sum_k W[oc][k] * cols[k][p]
template <class T>
void conv_gemm(const Layer<T>& l, const T* __restrict cols, T* __restrict out) {
  const std::size_t K = l.patch_size();
  const std::size_t P = static_cast<std::size_t>(l.out_height) * l.out_width;
  const std::size_t OC = static_cast<std::size_t>(l.out_channels);
  for (std::size_t oc = 0; oc < OC; ++oc) std::fill(out + oc * P, out + (oc + 1) * P, l.bias[oc]);
  gemm_acc(OC, P, K, l.weights.data(), K, 1, cols, out, P);
}

template <class T>
void dense_forward(const Layer<T>& l, const T* __restrict in, T* __restrict out) {
  const std::size_t I = l.in_size();
  for (int o = 0; o < l.out_channels; ++o) {
    const T* w = l.weights.data() + static_cast<std::size_t>(o) * I;
    out[o] = l.bias[static_cast<std::size_t>(o)] + dot(w, in, I);
  }
}

template <class T>
void relu_inplace(std::vector<T>& v) {
  for (auto& x : v) x = x > T(0) ? x : T(0);
}

// Activations and im2col buffers of one example, kept for the backward pass.
template <class T>
struct Trace {
  std::vector<std::vector<T>> acts;  // acts[0] = input, acts[i+1] = output of layer i
  std::vector<std::vector<T>> cols;  // per conv layer
};

template <class T>
void check_batch(const Model<T>& m, const Batch<T>& batch) {
  const auto& spec = m.spec();
  if (batch.count < 0 || batch.data.size() != static_cast<std::size_t>(batch.count) * spec.input_size())
    throw ShapeError("conv1: batch holds " + std::to_string(batch.data.size()) + " values, expected " +
                     std::to_string(batch.count) + " x " + std::to_string(spec.in_channels) + "@" +
                     std::to_string(spec.in_height) + "x" + std::to_string(spec.in_width));
}

template <class T>
T run_example(const Model<T>& m, std::span<const T> example, Trace<T>& trace) {
  const auto& layers = m.layers();
  trace.acts.resize(layers.size() + 1);
  trace.cols.resize(layers.size());
  trace.acts[0].assign(example.begin(), example.end());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    auto& out = trace.acts[i + 1];
    out.resize(l.out_size());
    if (l.kind == Layer<T>::Kind::conv) {
      auto& cols = trace.cols[i];
      cols.resize(l.patch_size() * static_cast<std::size_t>(l.out_height) * l.out_width);
      im2col(l, trace.acts[i].data(), cols.data());
      conv_gemm(l, cols.data(), out.data());
    } else {
      dense_forward(l, trace.acts[i].data(), out.data());
    }
    if (l.relu) relu_inplace(out);
  }
  return trace.acts.back()[0];
}

template <class T>
void backward_example(const Model<T>& m, const Trace<T>& trace, T dpred, Gradients<T>& g,
                      const GradOptions& options, std::vector<T>& dcur, std::vector<T>& dprev,
                      std::vector<T>& dcols) {
  const auto& layers = m.layers();
  dcur.assign(1, dpred);
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& l = layers[li];
    const auto& out = trace.acts[li + 1];
    const auto& in = trace.acts[li];
    if (l.relu && options.relu_backward == ReluBackward::standard) {
      for (std::size_t j = 0; j < dcur.size(); ++j)
        if (!(out[j] > T(0))) dcur[j] = T(0);
    }
    auto& gw = g.weights[li];
    auto& gb = g.bias[li];
    const bool need_input_grad = li > 0;
    if (l.kind == Layer<T>::Kind::dense) {
      const std::size_t I = l.in_size();
      if (need_input_grad) dprev.assign(I, T(0));
      for (int o = 0; o < l.out_channels; ++o) {
        const T d = dcur[static_cast<std::size_t>(o)];
        gb[static_cast<std::size_t>(o)] += d;
        if (d == T(0)) continue;
        T* __restrict gwr = gw.data() + static_cast<std::size_t>(o) * I;
        const T* __restrict w = l.weights.data() + static_cast<std::size_t>(o) * I;
        for (std::size_t i = 0; i < I; ++i) gwr[i] += d * in[i];
        if (need_input_grad)
          for (std::size_t i = 0; i < I; ++i) dprev[i] += d * w[i];
      }
    } else {
      const std::size_t K = l.patch_size();
      const std::size_t P = static_cast<std::size_t>(l.out_height) * l.out_width;
      const std::size_t OC = static_cast<std::size_t>(l.out_channels);
      const T* cols = trace.cols[li].data();
      for (std::size_t oc = 0; oc < OC; ++oc) {
        const T* __restrict d = dcur.data() + oc * P;
        T sum = T(0);
        for (std::size_t p = 0; p < P; ++p) sum += d[p];
        gb[oc] += sum;
      }
      gemm_nt_acc(OC, K, P, dcur.data(), cols, gw.data());
      if (need_input_grad) {
        dcols.assign(K * P, T(0));
        gemm_acc(K, P, OC, l.weights.data(), 1, K, dcur.data(), dcols.data(), P);
        dprev.assign(l.in_size(), T(0));
        col2im_add(l, dcols.data(), dprev.data());
      }
    }
    if (need_input_grad) std::swap(dcur, dprev);
  }
}

}  // namespace

template <class T>
std::vector<T> forward(const Model<T>& m, const Batch<T>& batch) {
  check_batch(m, batch);
  const std::size_t in = m.spec().input_size();
  std::vector<T> preds(static_cast<std::size_t>(batch.count));
  Trace<T> trace;
  for (std::size_t n = 0; n < preds.size(); ++n)
    preds[n] = run_example(m, std::span<const T>(batch.data.data() + n * in, in), trace);
  return preds;
}

template <class T>
std::vector<LayerShape> forward_shapes(const Model<T>& m, std::span<const T> example) {
  if (example.size() != m.spec().input_size()) throw ShapeError("conv1: example has the wrong size");
  Trace<T> trace;
  run_example(m, example, trace);
  const auto names = shape_chain(m.spec());
  std::vector<LayerShape> shapes;
  std::size_t name_idx = 0;
  for (std::size_t i = 0; i < m.layers().size(); ++i) {
    const auto& l = m.layers()[i];
    if (l.kind == Layer<T>::Kind::dense && i == m.spec().convs.size()) {
      // The flatten step is implicit in memory layout; report the size the
      // first dense layer actually consumed.
      shapes.push_back({names[name_idx++].name, static_cast<int>(trace.acts[i].size()), 1, 1});
    }
    LayerShape s{names[name_idx++].name, l.out_channels, l.out_height, l.out_width};
    if (s.size() != trace.acts[i + 1].size()) throw ShapeError(s.name + ": produced unexpected size");
    shapes.push_back(s);
  }
  return shapes;
}

template <class T>
std::vector<std::span<const T>> Gradients<T>::views() const {
  std::vector<std::span<const T>> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.emplace_back(weights[i]);
    out.emplace_back(bias[i]);
  }
  return out;
}

template <class T>
LossAndGrad<T> loss_and_grad(const Model<T>& m, const Batch<T>& batch, std::span<const T> labels,
                             const GradOptions& options) {
  check_batch(m, batch);
  if (labels.size() != static_cast<std::size_t>(batch.count))
    throw ShapeError("label count " + std::to_string(labels.size()) + " differs from batch size " +
                     std::to_string(batch.count));
  LossAndGrad<T> result;
  if (batch.count == 0) throw ShapeError("empty batch");
  for (const auto& l : m.layers()) {
    result.grads.weights.emplace_back(l.weights.size(), T(0));
    result.grads.bias.emplace_back(l.bias.size(), T(0));
  }
  const std::size_t in = m.spec().input_size();
  const T scale = T(2) / static_cast<T>(batch.count);
  Trace<T> trace;
  std::vector<T> dcur, dprev, dcols;
  double sse = 0.0;
  result.predictions.resize(static_cast<std::size_t>(batch.count));
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const T pred = run_example(m, std::span<const T>(batch.data.data() + n * in, in), trace);
    result.predictions[n] = pred;
    const double err = static_cast<double>(pred) - static_cast<double>(labels[n]);
    sse += err * err;
    backward_example(m, trace, scale * (pred - labels[n]), result.grads, options, dcur, dprev, dcols);
  }
  result.mse = sse / static_cast<double>(batch.count);
  if (!std::isfinite(result.mse)) throw NumericDivergenceError("loss is not finite", -1, -1);
  return result;
}

template <class T>
double mse_loss(const Model<T>& m, const Batch<T>& batch, std::span<const T> labels) {
  const auto preds = forward(m, batch);
  if (labels.size() != preds.size()) throw ShapeError("label count differs from batch size");
  double sse = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = static_cast<double>(preds[i]) - static_cast<double>(labels[i]);
    sse += e * e;
  }
  return preds.empty() ? 0.0 : sse / static_cast<double>(preds.size());
}

template <class T>
AdamOptimizer<T>::AdamOptimizer(const Model<T>& m, double learning_rate, double beta1, double beta2,
                                double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (const auto& p : m.parameters()) {
    m_.emplace_back(p.size(), T(0));
    v_.emplace_back(p.size(), T(0));
  }
}

template <class T>
void AdamOptimizer<T>::step(Model<T>& m, const Gradients<T>& g) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const T step = static_cast<T>(lr_ / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_), eps = static_cast<T>(eps_);
  auto params = m.parameters();
  const auto grads = g.views();
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& mt = m_[t];
    auto& vt = v_[t];
    auto p = params[t];
    const auto gt = grads[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      mt[i] = b1 * mt[i] + (T(1) - b1) * gt[i];
      vt[i] = b2 * vt[i] + (T(1) - b2) * gt[i] * gt[i];
      p[i] -= step * mt[i] / (std::sqrt(vt[i] * inv_c2) + eps);
    }
  }
}

#define ROLLE_INSTANTIATE(T)                                                                       \
  template class Model<T>;                                                                         \
  template struct Gradients<T>;                                                                    \
  template class AdamOptimizer<T>;                                                                 \
  template Model<T> init_model<T>(const ModelSpec&, std::uint64_t);                               \
  template std::vector<T> forward<T>(const Model<T>&, const Batch<T>&);                            \
  template std::vector<LayerShape> forward_shapes<T>(const Model<T>&, std::span<const T>);        \
  template LossAndGrad<T> loss_and_grad<T>(const Model<T>&, const Batch<T>&, std::span<const T>,  \
                                           const GradOptions&);                                    \
  template double mse_loss<T>(const Model<T>&, const Batch<T>&, std::span<const T>);

ROLLE_INSTANTIATE(float)
ROLLE_INSTANTIATE(double)

#undef ROLLE_INSTANTIATE

}  // namespace rolle::learning
