#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace abstain {

class Rng;

/// Immutable 1-D probability density. Exponential, Gaussian and Uniform
/// carry closed-form CDFs; Mixture and Tabulated CDFs are evaluated by
/// adaptive quadrature (absolute tolerance 1e-10). Tabulated densities
/// interpolate the pdf linearly between grid points and are renormalized
/// at construction.
class Density1D {
public:
  static Density1D exponential(double rate);
  static Density1D gaussian(double mean, double stddev);
  static Density1D uniform(double lo, double hi);
  static Density1D mixture(std::vector<std::pair<double, Density1D>> components);
  static Density1D tabulated(std::vector<double> grid, std::vector<double> pdf_values);

  /// Density value; exactly 0 outside the support. Rejects NaN input.
  double pdf(double x) const;
  /// P[X <= x].
  double cdf(double x) const;
  /// Inverse CDF for p in (0,1).
  double quantile(double p) const;
  /// n inverse-CDF draws, deterministic given seed.
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
  /// Single draw advancing the caller's generator.
  double draw(Rng& rng) const;

  double support_lo() const;  // may be -inf
  double support_hi() const;  // may be +inf
  /// Finite point with at most tail_mass of probability below/above it.
  double cover_lo(double tail_mass) const;
  double cover_hi(double tail_mass) const;

  bool closed_form_cdf() const;
  std::string family() const;
  /// Rate parameter; throws unless family() == "exponential".
  double exponential_rate() const;

private:
  struct Impl;
  explicit Density1D(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// A binary hypothesis-testing instance: nominal densities f0/f1, their
/// adversarially perturbed counterparts, and the class priors.
class Scenario {
public:
  Scenario(Density1D f0, Density1D f1, Density1D f0_adv, Density1D f1_adv,
           double p0, double p1);

  const Density1D& f0() const { return f0_; }
  const Density1D& f1() const { return f1_; }
  const Density1D& f0_adv() const { return f0_adv_; }
  const Density1D& f1_adv() const { return f1_adv_; }
  double p0() const { return p0_; }
  double p1() const { return p1_; }

  /// True when all four densities have closed-form CDFs.
  bool closed_form() const;
  /// Finite interval carrying all but tail_mass of every density.
  double cover_lo(double tail_mass) const;
  double cover_hi(double tail_mass) const;

private:
  Density1D f0_, f1_, f0_adv_, f1_adv_;
  double p0_, p1_;
};

}  // namespace abstain
