#pragma once

#include <cstdint>
#include <span>

#include "rolle/learning/model.hpp"

namespace rolle::learning {

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;  // flat index in parameters() order
  std::size_t parameters_checked = 0;
};

// Central differences (L(p+eps) - L(p-eps)) / 2eps for every parameter,
// compared to loss_and_grad. Relative error uses max(|a|, |n|, 1e-8) as the
// denominator. Throws InvalidEpsilonError unless eps is finite and > 0.
GradientCheckResult gradient_check(const Model<double>& m, const Batch<double>& batch,
                                   std::span<const double> labels, double eps,
                                   const GradOptions& options = {});

// Reduced model and a random batch, both drawn from seed.
GradientCheckResult gradient_check_reduced(std::uint64_t seed, double eps = 1e-5, int batch_size = 2,
                                           const GradOptions& options = {});

}  // namespace rolle::learning
