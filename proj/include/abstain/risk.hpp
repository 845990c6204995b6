#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abstain/classifier.hpp"
#include "abstain/density.hpp"
#include "abstain/rng.hpp"

namespace abstain {

enum class ErrorMethod { ClosedForm, Quadrature, MonteCarlo };

std::string to_string(ErrorMethod m);

/// Error pair for a classifier under a scenario.  The nominal error counts
/// abstained samples as errors; the adversarial error does not (abstaining on
/// an attacked sample is the desired outcome).
struct ErrorReport {
  double e_nom = 0.0;
  double e_adv = 0.0;
  double abstain_mass_nominal = 0.0;  // p0*P[Ra|f0] + p1*P[Ra|f1]
  ErrorMethod method = ErrorMethod::ClosedForm;
  std::optional<double> se_e_nom;  // Monte Carlo only
  std::optional<double> se_e_adv;

  /// Conservative scalar standard error (max of the two), 0 when absent.
  double std_error() const;
};

struct ErrorGradient {
  std::vector<double> d_enom;  // d e_nom / d gamma_iu, 2n entries
  std::vector<double> d_eadv;  // d e_adv / d gamma_iu, 2n entries
};

/// Nominal error via CDF evaluations at the shifted boundary points.
double nominal_error(const Scenario& s, const Classifier1D& c);

/// Adversarial error under the shifted densities, same edge bookkeeping with
/// the roles of the left/right half-widths exchanged.
double adversarial_error(const Scenario& s, const Classifier1D& c);

/// Analytic partial derivatives of both errors in the half-widths.
ErrorGradient error_gradients(const Scenario& s, const Classifier1D& c);

/// Full report (both errors plus abstain mass) via the closed-form expressions.
ErrorReport evaluate_errors(const Scenario& s, const Classifier1D& c);

/// Definition-level oracle: partitions the line at every boundary and abstain
/// edge, tags each cell, and accumulates per-cell CDF mass term by term.
/// Independent of the alternating-sign formula above.
ErrorReport brute_force_errors(const Scenario& s, const Classifier1D& c);

/// d-dimensional scenario given by samplers instead of densities.
/// Each sampler fills a dim-length output from the given RNG.
struct SampledScenario {
  int dim = 1;
  std::function<void(Rng&, std::span<double>)> draw_f0;
  std::function<void(Rng&, std::span<double>)> draw_f1;
  std::function<void(Rng&, std::span<double>)> draw_f0_adv;
  std::function<void(Rng&, std::span<double>)> draw_f1_adv;
  double p0 = 0.5;
  double p1 = 0.5;
};

/// Wraps a 1-D scenario's densities as samplers (priors carried over).
SampledScenario sampled_from(const Scenario& s);

/// Stratified Monte Carlo estimate: n draws per class per distribution,
/// binomial standard errors, deterministic for a given seed regardless of
/// thread count (per-chunk derived seeds, integer count aggregation).
ErrorReport mc_errors(const SampledScenario& s, const RegionSpecD& r, long n,
                      std::uint64_t seed);

/// Single-threaded reference implementation; must match mc_errors exactly.
ErrorReport mc_errors_serial(const SampledScenario& s, const RegionSpecD& r,
                             long n, std::uint64_t seed);

}  // namespace abstain
