#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sag/tensor.hpp"

namespace sag {

/// Builds a scalar loss from the given inputs on a fresh tape. Called once
/// for the analytic gradients and repeatedly with perturbed values for the
/// central differences, so it must not capture state across calls.
using LossFn =
    std::function<TensorPtr(Tape&, const std::vector<TensorPtr>&)>;

/// Max over all input elements of |analytic - numeric| / max(1, |a|, |n|),
/// central differences with h = 1e-5.
double max_rel_error(const LossFn& fn, const std::vector<TensorPtr>& inputs);

struct GradCheckResult {
  std::string op;
  double max_rel_err = 0.0;
  bool pass = false;
};

/// Finite-difference suite over every differentiable op at tiny shapes,
/// including the fully composed scoring path.
std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed,
                                           double tol = 1e-4);

}  // namespace sag
