#pragma once

#include <stdexcept>
#include <string>

namespace abstain {

/// Thrown when an iterative numerical routine fails to reach its tolerance.
/// Carries the tolerance that was actually achieved.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string& what, double achieved_tol)
      : std::runtime_error(what), achieved_tol_(achieved_tol) {}

  double achieved_tolerance() const { return achieved_tol_; }

private:
  double achieved_tol_;
};

}  // namespace abstain
