#include "rolle/learning/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rolle/errors.hpp"
#include "rolle/learning/augment.hpp"

namespace rolle::learning {

GradientCheckResult gradient_check(const Model<double>& m, const Batch<double>& batch,
                                   std::span<const double> labels, double eps, const GradOptions& options) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidEpsilonError("epsilon must be finite and positive");
  const auto analytic = loss_and_grad(m, batch, labels, options);
  const auto grads = analytic.grads.views();
  Model<double> probe = m;
  auto params = probe.parameters();
  GradientCheckResult r;
  std::size_t flat = 0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i, ++flat) {
      const double orig = params[t][i];
      params[t][i] = orig + eps;
      const double up = mse_loss(probe, batch, labels);
      params[t][i] = orig - eps;
      const double down = mse_loss(probe, batch, labels);
      params[t][i] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = grads[t][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      if (rel > r.max_relative_error) {
        r.max_relative_error = rel;
        r.worst_parameter = flat;
      }
      ++r.parameters_checked;
    }
  }
  return r;
}

GradientCheckResult gradient_check_reduced(std::uint64_t seed, double eps, int batch_size,
                                           const GradOptions& options) {
  const ModelSpec spec = ModelSpec::reduced();
  auto m = init_model<double>(spec, seed);
  std::mt19937_64 rng(derive_seed(seed, 7));
  // Non-zero biases so every layer's bias gradient is exercised away from 0.
  for (auto& l : m.layers())
    for (auto& b : l.bias) b = 0.2 * (unit_uniform(rng) - 0.5);
  Batch<double> batch;
  batch.count = batch_size;
  batch.data.resize(static_cast<std::size_t>(batch_size) * spec.input_size());
  for (auto& v : batch.data) v = 2.0 * unit_uniform(rng) - 1.0;
  std::vector<double> labels(static_cast<std::size_t>(batch_size));
  for (auto& v : labels) v = 2.0 * unit_uniform(rng) - 1.0;
  return gradient_check(m, batch, labels, eps, options);
}

}  // namespace rolle::learning
