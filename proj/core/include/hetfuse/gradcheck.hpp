#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hetfuse/autodiff.hpp"

namespace hetfuse::ad {

struct GradCheckReport {
  std::string label;
  std::size_t checked = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  Index worst_entry = 0;
  double tolerance = 0.0;
  bool passed = false;
};

// Relative error of one entry: |analytic - numeric| / max(|analytic|, |numeric|, floor).
// The floor keeps entries whose true gradient is ~0 from amplifying the
// O(eps/step) round-off of the central difference.
inline constexpr double kGradCheckFloor = 1e-6;
inline constexpr double kGradCheckStep = 1e-5;

using ScalarFn = std::function<Tensor(Tape&, const Tensor&)>;
using MultiScalarFn = std::function<Tensor(Tape&, std::span<const Tensor>)>;
using ValueFn = std::function<double(const Matrix&)>;
using GradientFn = std::function<Matrix(const Matrix&)>;

// Tape gradient of f at x against the central finite difference.
GradCheckReport grad_check(const ScalarFn& f, const Matrix& x, double tol,
                           double step = kGradCheckStep);

// Same, for a function of several matrix inputs; every input is perturbed.
GradCheckReport grad_check(const MultiScalarFn& f, std::span<const Matrix> xs, double tol,
                           double step = kGradCheckStep);

// Checks a hand-written gradient against the finite difference of `value`.
GradCheckReport grad_check(const ValueFn& value, const GradientFn& gradient, const Matrix& x,
                           double tol, double step = kGradCheckStep);

// One check per primitive on random inputs drawn away from kinks, plus the
// gradient-accumulation case (one leaf feeding two branches).
std::vector<GradCheckReport> primitive_gradient_suite(std::uint64_t seed, double tol = 1e-4);

}  // namespace hetfuse::ad
