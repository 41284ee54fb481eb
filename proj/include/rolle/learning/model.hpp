#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rolle::learning {

struct ConvSpec {
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

// Stack of valid convolutions followed by dense layers. ReLU follows every
// layer except the last dense layer, which is linear.
struct ModelSpec {
  int in_channels = 3;
  int in_height = 66;
  int in_width = 200;
  std::vector<ConvSpec> convs;
  std::vector<int> dense;

  // 24/36/48 5x5 stride 2, 64/64 3x3 stride 1, flatten 1152, 100/50/10/1.
  static ModelSpec pilotnet();
  // Small variant on 3@10x20 input used for finite-difference checks.
  static ModelSpec reduced();

  std::size_t input_size() const {
    return static_cast<std::size_t>(in_channels) * in_height * in_width;
  }
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct LayerShape {
  std::string name;  // conv1..convN, flatten, dense1..denseM
  int channels = 0;
  int height = 1;
  int width = 1;
  std::size_t size() const { return static_cast<std::size_t>(channels) * height * width; }
  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

// Output shape of every layer for the spec's input. Throws ShapeError naming
// the first layer whose kernel does not fit.
std::vector<LayerShape> shape_chain(const ModelSpec& spec);

template <class T>
struct Layer {
  enum class Kind { conv, dense };
  Kind kind = Kind::conv;
  int in_channels = 0, in_height = 1, in_width = 1;
  int out_channels = 0, out_height = 1, out_width = 1;
  int kernel = 1, stride = 1;
  bool relu = true;
  // conv: [out][in][k][k]; dense: [out][in]
  std::vector<T> weights;
  std::vector<T> bias;

  std::size_t in_size() const { return static_cast<std::size_t>(in_channels) * in_height * in_width; }
  std::size_t out_size() const { return static_cast<std::size_t>(out_channels) * out_height * out_width; }
  std::size_t patch_size() const { return static_cast<std::size_t>(in_channels) * kernel * kernel; }
};

template <class T>
class Model {
 public:
  Model() = default;
  explicit Model(const ModelSpec& spec);  // zero parameters

  const ModelSpec& spec() const { return spec_; }
  std::vector<Layer<T>>& layers() { return layers_; }
  const std::vector<Layer<T>>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  // Flat views over every parameter tensor, weights then bias, layer order.
  std::vector<std::span<T>> parameters();
  std::vector<std::span<const T>> parameters() const;

  template <class U>
  Model<U> cast() const {
    Model<U> out(spec_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      auto& dst = out.layers()[i];
      dst.weights.assign(layers_[i].weights.begin(), layers_[i].weights.end());
      dst.bias.assign(layers_[i].bias.begin(), layers_[i].bias.end());
    }
    return out;
  }

 private:
  ModelSpec spec_;
  std::vector<Layer<T>> layers_;
};

// He-uniform weights (bound sqrt(6 / fan_in)), zero biases. Values are drawn
// in double so float and double models from one seed agree.
template <class T>
Model<T> init_model(const ModelSpec& spec, std::uint64_t seed);

// Row-major [N, C, H, W] batch.
template <class T>
struct Batch {
  int count = 0;
  std::vector<T> data;
};

// One prediction per example. Throws ShapeError when the batch does not
// match the model input.
template <class T>
std::vector<T> forward(const Model<T>& m, const Batch<T>& batch);

// Per-layer output shapes actually produced by running one example.
template <class T>
std::vector<LayerShape> forward_shapes(const Model<T>& m, std::span<const T> example);

template <class T>
struct Gradients {
  std::vector<std::vector<T>> weights;
  std::vector<std::vector<T>> bias;
  std::vector<std::span<const T>> views() const;
};

enum class ReluBackward {
  standard,
  // Test fixture: ignores the activation mask, i.e. a wrong derivative.
  broken_passthrough,
};

struct GradOptions {
  ReluBackward relu_backward = ReluBackward::standard;
};

template <class T>
struct LossAndGrad {
  double mse = 0.0;
  std::vector<T> predictions;
  Gradients<T> grads;
};

// MSE against labels and its gradient by reverse-mode differentiation.
// Throws NumericDivergenceError when the loss is not finite.
template <class T>
LossAndGrad<T> loss_and_grad(const Model<T>& m, const Batch<T>& batch, std::span<const T> labels,
                             const GradOptions& options = {});

template <class T>
double mse_loss(const Model<T>& m, const Batch<T>& batch, std::span<const T> labels);

// Adam with bias correction.
template <class T>
class AdamOptimizer {
 public:
  AdamOptimizer(const Model<T>& m, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);
  void step(Model<T>& m, const Gradients<T>& g);
  std::uint64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;  // per parameter tensor
};

}  // namespace rolle::learning
