#include "rolle/learning/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "rolle/errors.hpp"

namespace rolle::learning {

Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = std::min(i - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i)));
    std::swap(idx[i - 1], idx[j]);
  }
  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  else n_train = n;
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return s;
}

namespace {

double validation_mse(const Model<float>& m, const std::vector<float>& inputs, const std::vector<float>& labels,
                      int batch_size) {
  if (labels.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t in = m.spec().input_size();
  double sse = 0.0;
  for (std::size_t start = 0; start < labels.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t n = std::min(labels.size() - start, static_cast<std::size_t>(batch_size));
    Batch<float> b;
    b.count = static_cast<int>(n);
    b.data.assign(inputs.begin() + static_cast<std::ptrdiff_t>(start * in),
                  inputs.begin() + static_cast<std::ptrdiff_t>((start + n) * in));
    const auto preds = forward(m, b);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = static_cast<double>(preds[i]) - static_cast<double>(labels[start + i]);
      sse += e * e;
    }
  }
  return sse / static_cast<double>(labels.size());
}

}  // namespace

TrainResult train(std::span<const Example> examples, const Hyperparams& h, const TrainOptions& options) {
  h.validate();
  if (examples.empty()) throw EmptyDatasetError("dataset has no records");
  if (options.spec.in_channels != perception::InputTensor::kChannels ||
      options.spec.in_height != perception::InputTensor::kHeight ||
      options.spec.in_width != perception::InputTensor::kWidth)
    throw ShapeError("training requires a model on 3@66x200 input");

  const Split split = split_indices(examples.size(), h.train_fraction, derive_seed(h.seed, kSplitSeed));
  std::vector<float> val_inputs;
  std::vector<float> val_labels;
  val_inputs.reserve(split.validation.size() * perception::InputTensor::kSize);
  for (auto i : split.validation) {
    const auto t = perception::preprocess(examples[i].frame, options.preprocess);
    val_inputs.insert(val_inputs.end(), t.values.begin(), t.values.end());
    val_labels.push_back(examples[i].steering);
  }

  TrainResult result;
  result.model = init_model<float>(options.spec, derive_seed(h.seed, kInitSeed));
  AdamOptimizer<float> adam(result.model, h.learning_rate);
  BatchGenerator gen(examples, split.train, h, derive_seed(h.seed, kGeneratorSeed), options.preprocess);
  spdlog::info("training on {} records, validating on {}, {} batches/epoch", split.train.size(), val_labels.size(),
               gen.batches_per_epoch());

  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    double sum = 0.0;
    int batches = 0;
    for (int b = 0; b < gen.batches_per_epoch(); ++b) {
      if (options.cancelled && options.cancelled()) {
        result.divergence = "cancelled";
        return result;
      }
      const auto batch = gen.next();
      try {
        const auto lg = loss_and_grad(result.model, batch.inputs, std::span<const float>(batch.labels));
        sum += lg.mse;
        ++batches;
        adam.step(result.model, lg.grads);
      } catch (const NumericDivergenceError& e) {
        result.divergence = std::string(e.what()) + " at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(b + 1);
        result.divergence_epoch = epoch + 1;
        result.divergence_batch = b + 1;
        spdlog::error("{}", *result.divergence);
        return result;
      }
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_mse = sum / batches;
    rec.val_mse = validation_mse(result.model, val_inputs, val_labels, h.batch_size);
    if (!std::isfinite(rec.train_mse) || (!val_labels.empty() && !std::isfinite(rec.val_mse))) {
      result.divergence = "validation loss is not finite at epoch " + std::to_string(epoch + 1);
      result.divergence_epoch = epoch + 1;
      return result;
    }
    spdlog::info("epoch {}/{}: train_mse={:.6f} val_mse={:.6f}", rec.epoch, h.epochs, rec.train_mse, rec.val_mse);
    result.history.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RecordError("cannot write " + path.string());
  f << "epoch,train_mse,val_mse\n";
  char buf[96];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.8g,%.8g\n", r.epoch, r.train_mse, r.val_mse);
    f << buf;
  }
  if (!f) throw RecordError("failed writing " + path.string());
}

TrainHistory read_history_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw LoadError("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != "epoch,train_mse,val_mse")
    throw ValidationError(path.string() + ": bad history header");
  TrainHistory h;
  int row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (line.empty()) continue;
    EpochRecord r;
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      throw ValidationError(path.string() + ": malformed row " + std::to_string(row));
    try {
      r.epoch = std::stoi(a);
      r.train_mse = std::stod(b);
      r.val_mse = std::stod(c);
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ": malformed row " + std::to_string(row));
    }
    h.push_back(r);
  }
  return h;
}

}  // namespace rolle::learning
