#include "rolle/learning/batch_generator.hpp"

#include <algorithm>
#include <cmath>

#include "rolle/errors.hpp"

namespace rolle::learning {

void Hyperparams::validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be a finite non-negative number");
  if (samples_per_epoch <= 0) throw ConfigError("samples_per_epoch must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw ConfigError("flip_prob must be in [0, 1]");
  if (!(shadow_prob >= 0.0 && shadow_prob <= 1.0)) throw ConfigError("shadow_prob must be in [0, 1]");
}

SamplePlanner::SamplePlanner(std::size_t record_count, const Hyperparams& h, std::uint64_t seed)
    : count_(record_count), flip_prob_(h.flip_prob), shadow_prob_(h.shadow_prob), rng_(seed) {
  if (count_ == 0) throw EmptyDatasetError("training set is empty");
}

SamplePlan SamplePlanner::next() {
  SamplePlan p;
  p.index = std::min(count_ - 1, static_cast<std::size_t>(unit_uniform(rng_) * static_cast<double>(count_)));
  p.flip = unit_uniform(rng_) < flip_prob_;
  p.shadow = unit_uniform(rng_) < shadow_prob_;
  p.shadow_params = draw_shadow(rng_);
  return p;
}

int batches_per_epoch(const Hyperparams& h) {
  return (h.samples_per_epoch + h.batch_size - 1) / h.batch_size;
}

std::vector<float> label_stream(std::span<const float> steering, const Hyperparams& h,
                                std::uint64_t seed, int epochs) {
  SamplePlanner planner(steering.size(), h, seed);
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(h.samples_per_epoch) * static_cast<std::size_t>(epochs));
  for (int e = 0; e < epochs; ++e) {
    for (int i = 0; i < h.samples_per_epoch; ++i) {
      const auto p = planner.next();
      const float s = steering[p.index];
      out.push_back(p.flip ? negate_steering(s) : s);
    }
  }
  return out;
}

Example realize(const Example& e, const SamplePlan& plan) {
  Example out = plan.flip ? augment_flip(e) : e;
  if (plan.shadow) out.frame = apply_shadow(out.frame, plan.shadow_params);
  return out;
}

BatchGenerator::BatchGenerator(std::span<const Example> examples, const Hyperparams& h,
                               std::uint64_t seed, perception::PreprocessConfig cfg)
    : examples_(examples), h_(h), cfg_(cfg), planner_(examples.size(), h, seed),
      per_epoch_(learning::batches_per_epoch(h)) {
  subset_.resize(examples.size());
  for (std::size_t i = 0; i < subset_.size(); ++i) subset_[i] = i;
}

BatchGenerator::BatchGenerator(std::span<const Example> examples, std::vector<std::size_t> subset,
                               const Hyperparams& h, std::uint64_t seed, perception::PreprocessConfig cfg)
    : examples_(examples), subset_(std::move(subset)), h_(h), cfg_(cfg), planner_(subset_.size(), h, seed),
      per_epoch_(learning::batches_per_epoch(h)) {
  for (auto i : subset_)
    if (i >= examples_.size()) throw ShapeError("batch generator subset index out of range");
}

GeneratedBatch BatchGenerator::next() {
  GeneratedBatch out;
  out.epoch = epoch_;
  out.index = batch_;
  const int already = batch_ * h_.batch_size;
  const int n = std::min(h_.batch_size, h_.samples_per_epoch - already);
  out.inputs.count = n;
  out.inputs.data.resize(static_cast<std::size_t>(n) * perception::InputTensor::kSize);
  out.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto plan = planner_.next();
    const Example& src = examples_[subset_[plan.index]];
    float label = src.steering;
    perception::InputTensor t;
    if (!plan.flip && !plan.shadow) {
      t = perception::preprocess(src.frame, cfg_);
    } else {
      const Example aug = realize(src, plan);
      label = aug.steering;
      t = perception::preprocess(aug.frame, cfg_);
    }
    std::copy(t.values.begin(), t.values.end(),
              out.inputs.data.begin() + static_cast<std::ptrdiff_t>(i) * perception::InputTensor::kSize);
    out.labels[static_cast<std::size_t>(i)] = label;
  }
  if (++batch_ == per_epoch_) {
    batch_ = 0;
    ++epoch_;
  }
  return out;
}

}  // namespace rolle::learning
