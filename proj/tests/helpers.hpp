// Shared fixtures for the unit and acceptance tests: the exponential example
// scenario and reproducible random instance generators.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "abstain/classifier.hpp"
#include "abstain/density.hpp"
#include "abstain/rng.hpp"

namespace testing {

using abstain::Classifier1D;
using abstain::Density1D;
using abstain::Rng;
using abstain::Scenario;

inline Scenario example_scenario() {
  return Scenario(Density1D::exponential(1.5), Density1D::exponential(0.5),
                  Density1D::exponential(1.2), Density1D::exponential(0.7), 0.5,
                  0.5);
}

inline double example_boundary() { return std::log(3.0); }

// Exact no-abstain errors of the example at the Bayes boundary:
// 0.5*3^-1.5 + 0.5*(1-3^-0.5) and 0.5*3^-1.2 + 0.5*(1-3^-0.7).
constexpr double kExampleNominal = 0.307549910270124745;
constexpr double kExampleAdversarial = 0.402058731907386890;

inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform01();
}

// All-exponential scenario with rates in [0.5, 2]; supports start at 0.
inline Scenario random_exponential_scenario(Rng& rng) {
  double p0 = uniform_in(rng, 0.25, 0.75);
  return Scenario(Density1D::exponential(uniform_in(rng, 1.0, 2.0)),
                  Density1D::exponential(uniform_in(rng, 0.5, 0.95)),
                  Density1D::exponential(uniform_in(rng, 0.8, 1.6)),
                  Density1D::exponential(uniform_in(rng, 0.55, 1.1)), p0,
                  1.0 - p0);
}

// Gaussian scenario with a shared scale and mean-shift attacks (the shift
// moves each class toward the other, by less than half the separation).
inline Scenario random_gaussian_scenario(Rng& rng) {
  double s = uniform_in(rng, 0.7, 1.3);
  double m0 = uniform_in(rng, -1.0, -0.3);
  double m1 = uniform_in(rng, 0.8, 1.6);
  double shift = uniform_in(rng, 0.15, 0.45) * (m1 - m0) * 0.5;
  double p0 = uniform_in(rng, 0.3, 0.7);
  return Scenario(Density1D::gaussian(m0, s), Density1D::gaussian(m1, s),
                  Density1D::gaussian(m0 + shift, s),
                  Density1D::gaussian(m1 - shift, s), p0, 1.0 - p0);
}

// Strictly increasing boundaries with a minimum gap, inside [lo, hi].
inline std::vector<double> random_boundaries(Rng& rng, int n, double lo,
                                             double hi) {
  std::vector<double> y(n);
  double span = hi - lo;
  double slot = span / n;
  for (int i = 0; i < n; ++i)
    y[i] = lo + slot * i + uniform_in(rng, 0.25, 0.75) * slot;
  return y;
}

// Per-coordinate half-width caps that keep the abstain intervals disjoint and
// the edges inside [cover_lo, cover_hi] of the region where every density of
// the scenario keeps non-negligible mass (tail_mass per side).
inline std::vector<double> gamma_caps(const Scenario& s,
                                      const std::vector<double>& y,
                                      double tail_mass) {
  int n = static_cast<int>(y.size());
  double lo = std::max({s.f0().cover_lo(tail_mass), s.f1().cover_lo(tail_mass),
                        s.f0_adv().cover_lo(tail_mass),
                        s.f1_adv().cover_lo(tail_mass)});
  double hi = std::min({s.f0().cover_hi(tail_mass), s.f1().cover_hi(tail_mass),
                        s.f0_adv().cover_hi(tail_mass),
                        s.f1_adv().cover_hi(tail_mass)});
  std::vector<double> caps(2 * n, 0.0);
  for (int i = 0; i < n; ++i) {
    caps[2 * i] = i == 0 ? std::max(0.0, y[0] - lo)
                         : 0.5 * (y[i] - y[i - 1]) * (1.0 - 1e-9);
    caps[2 * i + 1] = i == n - 1 ? std::max(0.0, hi - y[n - 1])
                                 : 0.5 * (y[i + 1] - y[i]) * (1.0 - 1e-9);
  }
  return caps;
}

inline std::vector<double> random_gamma(Rng& rng, const std::vector<double>& caps,
                                        double max_fraction) {
  std::vector<double> g(caps.size());
  for (std::size_t k = 0; k < caps.size(); ++k)
    g[k] = rng.uniform01() * max_fraction * caps[k];
  return g;
}

}  // namespace testing
