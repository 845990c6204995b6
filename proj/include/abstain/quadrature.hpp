#pragma once

#include <functional>

#include "abstain/common.hpp"

namespace abstain {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long subdivisions = 0;
};

/// Adaptive Simpson integration of f over [a, b] to an absolute tolerance.
/// Throws NumericalError (reporting the achieved tolerance) if the
/// subdivision budget runs out before the tolerance is met.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol = 1e-10,
                                    long max_subdivisions = 1000000);

}  // namespace abstain
