#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rolle/learning/batch_generator.hpp"
#include "rolle/learning/model.hpp"

namespace rolle::learning {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;  // NaN when the validation split is empty
};

using TrainHistory = std::vector<EpochRecord>;

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded Fisher-Yates shuffle, then the first round(n * fraction) indices
// train. Both sides are non-empty whenever n >= 2.
Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

struct TrainOptions {
  ModelSpec spec = ModelSpec::pilotnet();
  perception::PreprocessConfig preprocess;
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<bool()> cancelled;
};

struct TrainResult {
  Model<float> model;
  TrainHistory history;
  // Set when training stopped early on a non-finite loss; history then holds
  // the completed epochs only.
  std::optional<std::string> divergence;
  int divergence_epoch = -1;
  int divergence_batch = -1;
};

// Sub-seeds derived from Hyperparams::seed.
enum SeedStream : std::uint64_t { kSplitSeed = 1, kInitSeed = 2, kGeneratorSeed = 3 };

// Throws EmptyDatasetError on an empty set and ConfigError on bad hyperparams.
TrainResult train(std::span<const Example> examples, const Hyperparams& h, const TrainOptions& options = {});

// `epoch,train_mse,val_mse`, one row per epoch.
void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);
TrainHistory read_history_csv(const std::filesystem::path& path);

}  // namespace rolle::learning
