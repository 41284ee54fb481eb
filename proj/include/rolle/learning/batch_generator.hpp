#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rolle/learning/augment.hpp"
#include "rolle/learning/model.hpp"
#include "rolle/perception.hpp"

namespace rolle::learning {

struct Hyperparams {
  int epochs = 10;
  double learning_rate = 1e-4;
  int samples_per_epoch = 20000;
  int batch_size = 64;
  double train_fraction = 0.8;
  double flip_prob = 0.5;
  double shadow_prob = 0.5;
  std::uint64_t seed = 0;

  // Throws ConfigError. learning_rate may be 0 (frozen parameters).
  void validate() const;
};

struct SamplePlan {
  std::size_t index = 0;
  bool flip = false;
  bool shadow = false;
  ShadowParams shadow_params;
};

// Draws the per-sample augmentation plan. The same planner drives the image
// batches and the label-only stream, so both see identical decisions.
class SamplePlanner {
 public:
  SamplePlanner(std::size_t record_count, const Hyperparams& h, std::uint64_t seed);
  SamplePlan next();

 private:
  std::size_t count_;
  double flip_prob_, shadow_prob_;
  std::mt19937_64 rng_;
};

int batches_per_epoch(const Hyperparams& h);

// Labels the generator would emit over `epochs` epochs, without touching images.
std::vector<float> label_stream(std::span<const float> steering, const Hyperparams& h,
                                std::uint64_t seed, int epochs = 1);

struct GeneratedBatch {
  int epoch = 0;
  int index = 0;  // within the epoch
  Batch<float> inputs;
  std::vector<float> labels;
};

class BatchGenerator {
 public:
  // Throws EmptyDatasetError when examples is empty. The examples must
  // outlive the generator.
  BatchGenerator(std::span<const Example> examples, const Hyperparams& h, std::uint64_t seed,
                 perception::PreprocessConfig cfg = {});
  // Samples only from examples[subset[i]].
  BatchGenerator(std::span<const Example> examples, std::vector<std::size_t> subset, const Hyperparams& h,
                 std::uint64_t seed, perception::PreprocessConfig cfg = {});

  int batches_per_epoch() const { return per_epoch_; }
  // Infinite stream; epoch boundaries fall every batches_per_epoch() batches.
  GeneratedBatch next();

 private:
  std::span<const Example> examples_;
  std::vector<std::size_t> subset_;
  Hyperparams h_;
  perception::PreprocessConfig cfg_;
  SamplePlanner planner_;
  int per_epoch_;
  int epoch_ = 0;
  int batch_ = 0;
};

// Applies a plan to a raw example: flip, then shadow.
Example realize(const Example& e, const SamplePlan& plan);

}  // namespace rolle::learning
