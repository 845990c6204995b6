#pragma once

#include <string>
#include <utility>
#include <vector>

#include "abstain/classifier.hpp"
#include "abstain/density.hpp"
#include "abstain/risk.hpp"

namespace abstain {

/// Choose abstain half-widths minimizing the adversarial error subject to a
/// nominal-error budget zeta, for fixed decision boundaries y.
struct DesignProblem {
  Scenario scenario;
  std::vector<double> y;
  double zeta = 1.0;
};

enum class SolveStatus { Converged, MultistartBest, FallbackGrid };

std::string to_string(SolveStatus s);

struct DesignSolution {
  std::vector<double> gamma;  // 2n half-widths
  double e_nom = 0.0;
  double e_adv = 0.0;
  double lambda = 0.0;  // multiplier of the nominal-error constraint
  double stationarity_residual = 0.0;  // max relative residual, free coords
  double constraint_residual = 0.0;    // |e_nom - zeta|
  SolveStatus status = SolveStatus::FallbackGrid;
};

struct KktResiduals {
  double constraint = 0.0;               // e_nom(y, gamma) - zeta (signed)
  std::vector<double> stationarity;      // d_eadv + lambda * d_enom, per coord
};

/// First-order optimality residuals at (gamma, lambda).
KktResiduals kkt_residuals(const DesignProblem& p,
                           const std::vector<double>& gamma, double lambda);

/// Solves the design problem via nested scalar root-finds: outer bisection on
/// the multiplier lambda, inner per-coordinate root-find of the stationarity
/// equations (each couples a single half-width given lambda).  Multistart over
/// lambda windows and root profiles; returns the found stationary point with
/// least adversarial error.
DesignSolution solve_design(const DesignProblem& p);

/// Closed-form residual pair for the all-exponential single-boundary case:
/// first = nominal-error constraint, second = stationarity after eliminating
/// lambda.  Both vanish exactly at an interior optimum.
std::pair<double, double> exponential_kkt_residuals(const DesignProblem& p,
                                                    double gamma11,
                                                    double gamma12);

/// Exhaustive feasible-grid oracle over (gamma_11, gamma_12); single boundary
/// only.  resolution >= 50 cells per axis.
DesignSolution grid_search_design(const DesignProblem& p, int resolution);

struct SweepRow {
  double zeta = 0.0;
  DesignSolution solution;
  bool ok = false;
  std::string message;  // failure reason when !ok
};

/// One solve per zeta, rows in grid order; failures are recorded per row and
/// the sweep continues.
std::vector<SweepRow> sweep_tradeoff(const Scenario& s,
                                     const std::vector<double>& y,
                                     const std::vector<double>& zeta_grid);

/// Single-threaded reference; must produce identical rows.
std::vector<SweepRow> sweep_tradeoff_serial(const Scenario& s,
                                            const std::vector<double>& y,
                                            const std::vector<double>& zeta_grid);

}  // namespace abstain
