#include "abstain/design.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "abstain/parallel.hpp"

namespace abstain {

namespace {

constexpr double kResidualTol = 1e-7;
constexpr double kCoverTail = 1e-12;
constexpr int kScanPoints = 129;   // inner sign-change scan per coordinate
constexpr int kBisectIters = 90;   // inner root polish
constexpr int kLambdaIters = 130;  // outer multiplier bisection (log space)

enum CoordFlag { kFree = 0, kPinnedLow = 1, kPinnedHigh = 2 };

// One half-width coordinate.  Given the multiplier, its stationarity equation
// involves only the densities at its own abstain edge:
//   s(g) = -p_adv * f_adv(edge) + lambda * p_nom * f_nom(edge),
// edge = y + dir*g.  dir=-1 for a left half-width, +1 for a right one.
struct Coord {
  double y = 0.0;
  int dir = -1;
  double cap = 0.0;
  const Density1D* f_nom = nullptr;
  const Density1D* f_adv = nullptr;
  double p_nom = 0.0;
  double p_adv = 0.0;

  double edge(double g) const { return y + dir * g; }
  double d_enom(double g) const { return p_nom * f_nom->pdf(edge(g)); }
  double d_eadv(double g) const { return -p_adv * f_adv->pdf(edge(g)); }
  double stationarity(double g, double lambda) const {
    return d_eadv(g) + lambda * d_enom(g);
  }
  // Benefit/cost ratio; equals the multiplier at an interior optimum.
  double ratio(double g) const {
    double den = d_enom(g);
    if (den <= 0.0) return -1.0;
    return -d_eadv(g) / den;
  }
};

std::vector<Coord> make_coords(const DesignProblem& p) {
  const Scenario& s = p.scenario;
  const auto& y = p.y;
  int n = static_cast<int>(y.size());
  double lo = s.cover_lo(kCoverTail);
  double hi = s.cover_hi(kCoverTail);
  std::vector<Coord> coords(2 * n);
  for (int i = 0; i < n; ++i) {
    bool odd = (i + 1) % 2 == 1;  // 1-based parity
    Coord& left = coords[2 * i];
    Coord& right = coords[2 * i + 1];
    left.y = right.y = y[i];
    left.dir = -1;
    right.dir = 1;
    left.p_nom = odd ? s.p0() : s.p1();
    left.p_adv = odd ? s.p1() : s.p0();
    left.f_nom = odd ? &s.f0() : &s.f1();
    left.f_adv = odd ? &s.f1_adv() : &s.f0_adv();
    right.p_nom = odd ? s.p1() : s.p0();
    right.p_adv = odd ? s.p0() : s.p1();
    right.f_nom = odd ? &s.f1() : &s.f0();
    right.f_adv = odd ? &s.f0_adv() : &s.f1_adv();
    // Caps keep edges inside the mass-carrying cover and adjacent abstain
    // intervals strictly disjoint (split at the midpoint, tiny margin).
    if (i == 0) {
      left.cap = std::max(0.0, y[i] - lo);
    } else {
      double gap = y[i] - y[i - 1];
      left.cap = std::max(0.0, 0.5 * gap - 0.5e-9 * gap);
    }
    if (i == n - 1) {
      right.cap = std::max(0.0, hi - y[i]);
    } else {
      double gap = y[i + 1] - y[i];
      right.cap = std::max(0.0, 0.5 * gap - 0.5e-9 * gap);
    }
  }
  return coords;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double flo) {
  for (int it = 0; it < kBisectIters; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct InnerResult {
  std::vector<double> gamma;
  std::vector<int> flag;
};

// For a fixed multiplier, solve every per-coordinate stationarity equation.
// profile 0 takes the smallest root in [0, cap], profile 1 the largest;
// coordinates with no root are pinned at whichever bound the sign dictates.
InnerResult inner_solve(const std::vector<Coord>& coords, double lambda,
                        int profile) {
  InnerResult out;
  out.gamma.resize(coords.size(), 0.0);
  out.flag.resize(coords.size(), kFree);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const Coord& c = coords[k];
    if (c.cap <= 0.0) {
      out.gamma[k] = 0.0;
      out.flag[k] = kPinnedHigh;
      continue;
    }
    auto s = [&](double g) { return c.stationarity(g, lambda); };
    double prev_g = 0.0;
    double prev_s = s(0.0);
    double first_root = -1.0, last_root = -1.0;
    for (int t = 1; t < kScanPoints; ++t) {
      double g = c.cap * t / (kScanPoints - 1);
      double sv = s(g);
      if (prev_s == 0.0 || (prev_s < 0.0) != (sv < 0.0)) {
        double root = prev_s == 0.0 ? prev_g : bisect_root(s, prev_g, g, prev_s);
        if (first_root < 0.0) first_root = root;
        last_root = root;
        if (profile == 0) break;  // smallest root is enough
      }
      prev_g = g;
      prev_s = sv;
    }
    if (first_root >= 0.0) {
      out.gamma[k] = profile == 0 ? first_root : last_root;
      out.flag[k] = kFree;
    } else if (s(0.0) >= 0.0) {
      out.gamma[k] = 0.0;  // growing the region never pays at this multiplier
      out.flag[k] = kPinnedLow;
    } else {
      out.gamma[k] = c.cap;  // still profitable at the cap: bound is active
      out.flag[k] = kPinnedHigh;
    }
  }
  return out;
}

double enom_of(const DesignProblem& p, const std::vector<double>& gamma) {
  return nominal_error(p.scenario, Classifier1D(p.y, gamma));
}

double eadv_of(const DesignProblem& p, const std::vector<double>& gamma) {
  return adversarial_error(p.scenario, Classifier1D(p.y, gamma));
}

// Certificate residuals for a candidate; pinned coordinates are excluded from
// the stationarity check (their bound multiplier absorbs the slack).
DesignSolution certify(const DesignProblem& p, const std::vector<Coord>& coords,
                       const InnerResult& in, double lambda) {
  DesignSolution sol;
  sol.gamma = in.gamma;
  sol.lambda = lambda;
  sol.e_nom = enom_of(p, in.gamma);
  sol.e_adv = eadv_of(p, in.gamma);
  sol.constraint_residual = std::abs(sol.e_nom - p.zeta);
  double worst = 0.0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (in.flag[k] != kFree) continue;
    const Coord& c = coords[k];
    double g = in.gamma[k];
    double adv = c.d_eadv(g);
    double nom = lambda * c.d_enom(g);
    double scale = std::max({std::abs(adv), std::abs(nom), 1e-300});
    worst = std::max(worst, std::abs(adv + nom) / scale);
  }
  sol.stationarity_residual = worst;
  return sol;
}

DesignSolution zero_gamma_solution(const DesignProblem& p,
                                   const std::vector<Coord>& coords) {
  InnerResult in;
  in.gamma.assign(coords.size(), 0.0);
  in.flag.assign(coords.size(), kPinnedLow);
  double lambda = 0.0;
  std::size_t best = coords.size();
  for (std::size_t k = 0; k < coords.size(); ++k) {
    double h = coords[k].ratio(0.0);
    if (h > lambda) {
      lambda = h;
      best = k;
    }
  }
  if (best == coords.size()) lambda = 1.0;
  else in.flag[best] = kFree;  // the binding coordinate is exactly stationary
  DesignSolution sol = certify(p, coords, in, lambda);
  sol.status = SolveStatus::Converged;
  return sol;
}

DesignSolution full_cover_solution(const DesignProblem& p,
                                   const std::vector<Coord>& coords) {
  InnerResult in;
  in.flag.assign(coords.size(), kPinnedHigh);
  in.gamma.resize(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k) in.gamma[k] = coords[k].cap;
  DesignSolution sol = certify(p, coords, in, 1.0);
  // Constraint is slack at this endpoint (e_nom <= zeta holds with room);
  // report the residual against the achieved value, not the budget.
  sol.constraint_residual = std::max(0.0, sol.e_nom - p.zeta);
  sol.status = SolveStatus::Converged;
  return sol;
}

DesignSolution fallback_solution(const DesignProblem& p,
                                 const std::vector<Coord>& coords) {
  if (p.y.size() == 1) {
    DesignSolution sol = grid_search_design(p, 400);
    return sol;
  }
  // Scale the cap vector until the nominal budget is met.
  auto enom_at = [&](double t) {
    std::vector<double> g(coords.size());
    for (std::size_t k = 0; k < coords.size(); ++k) g[k] = t * coords[k].cap;
    return enom_of(p, g);
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (enom_at(mid) <= p.zeta) lo = mid;
    else hi = mid;
  }
  InnerResult in;
  in.gamma.resize(coords.size());
  in.flag.assign(coords.size(), kPinnedHigh);
  for (std::size_t k = 0; k < coords.size(); ++k) in.gamma[k] = lo * coords[k].cap;
  DesignSolution sol = certify(p, coords, in, 1.0);
  sol.status = SolveStatus::FallbackGrid;
  return sol;
}

void validate_problem(const DesignProblem& p) {
  if (p.y.empty())
    throw std::invalid_argument("design: needs at least one boundary");
  if (!(p.zeta > 0.0 && p.zeta <= 1.0))
    throw std::invalid_argument("design: zeta must lie in (0, 1]");
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MultistartBest: return "multistart_best";
    case SolveStatus::FallbackGrid: return "fallback_grid";
  }
  return "unknown";
}

KktResiduals kkt_residuals(const DesignProblem& p,
                           const std::vector<double>& gamma, double lambda) {
  validate_problem(p);
  Classifier1D c(p.y, gamma);
  KktResiduals r;
  r.constraint = nominal_error(p.scenario, c) - p.zeta;
  ErrorGradient g = error_gradients(p.scenario, c);
  r.stationarity.resize(gamma.size());
  for (std::size_t k = 0; k < gamma.size(); ++k)
    r.stationarity[k] = g.d_eadv[k] + lambda * g.d_enom[k];
  return r;
}

DesignSolution solve_design(const DesignProblem& p) {
  validate_problem(p);
  std::vector<Coord> coords = make_coords(p);

  std::vector<double> zeros(coords.size(), 0.0);
  double e0 = enom_of(p, zeros);
  if (p.zeta < e0 - 1e-12)
    throw std::invalid_argument(
        "design: zeta below the no-abstain nominal error (infeasible)");
  if (p.zeta <= e0) return zero_gamma_solution(p, coords);

  std::vector<double> caps(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k) caps[k] = coords[k].cap;
  if (p.zeta >= enom_of(p, caps)) return full_cover_solution(p, coords);

  // Scale for the multiplier search: the largest benefit/cost ratio at
  // gamma=0 (the multiplier at which the abstain region first opens).
  double lambda0 = 0.0;
  for (const Coord& c : coords) lambda0 = std::max(lambda0, c.ratio(0.0));
  if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) lambda0 = 1.0;

  std::vector<DesignSolution> candidates;
  auto consider = [&](const InnerResult& in, double lambda, double g_res) {
    if (std::abs(g_res) > kResidualTol) return;
    candidates.push_back(certify(p, coords, in, lambda));
  };

  // Multistart: two root profiles x eight log-spaced multiplier windows.
  constexpr int kGridPoints = 81;  // exponents -10..10, quarter-decade steps
  constexpr int kWindows = 8;
  for (int profile = 0; profile < 2; ++profile) {
    auto g_of = [&](double u, InnerResult& in) {
      double lambda = lambda0 * std::pow(10.0, u);
      in = inner_solve(coords, lambda, profile);
      return enom_of(p, in.gamma) - p.zeta;
    };
    std::vector<double> us(kGridPoints), gs(kGridPoints);
    std::vector<InnerResult> ins(kGridPoints);
    for (int j = 0; j < kGridPoints; ++j) {
      us[j] = -10.0 + 20.0 * j / (kGridPoints - 1);
      gs[j] = g_of(us[j], ins[j]);
      if (gs[j] == 0.0)
        consider(ins[j], lambda0 * std::pow(10.0, us[j]), gs[j]);
    }
    int per = (kGridPoints - 1) / kWindows;
    for (int w = 0; w < kWindows; ++w) {
      // First sign change inside this window starts one bisection; the
      // bisection contributes its best iterate as a single candidate.
      for (int j = w * per; j < (w + 1) * per; ++j) {
        if ((gs[j] < 0.0) == (gs[j + 1] < 0.0)) continue;
        double ulo = us[j], uhi = us[j + 1], glo = gs[j];
        InnerResult in, best_in;
        double best_g = std::numeric_limits<double>::infinity();
        double best_u = 0.0;
        for (int it = 0; it < kLambdaIters; ++it) {
          double um = 0.5 * (ulo + uhi);
          double gm = g_of(um, in);
          if (std::abs(gm) < std::abs(best_g)) {
            best_g = gm;
            best_u = um;
            best_in = in;
          }
          if (gm == 0.0 || std::abs(gm) <= 1e-13) break;
          if ((gm < 0.0) == (glo < 0.0)) {
            ulo = um;
            glo = gm;
          } else {
            uhi = um;
          }
        }
        if (std::isfinite(best_g))
          consider(best_in, lambda0 * std::pow(10.0, best_u), best_g);
        break;
      }
    }
  }

  if (candidates.empty()) return fallback_solution(p, coords);

  const DesignSolution* best = &candidates.front();
  for (const DesignSolution& s : candidates)
    if (s.e_adv < best->e_adv) best = &s;
  DesignSolution sol = *best;
  bool certified = sol.constraint_residual <= kResidualTol &&
                   sol.stationarity_residual <= kResidualTol;
  sol.status = certified ? SolveStatus::Converged : SolveStatus::MultistartBest;
  return sol;
}

std::pair<double, double> exponential_kkt_residuals(const DesignProblem& p,
                                                    double gamma11,
                                                    double gamma12) {
  validate_problem(p);
  if (p.y.size() != 1)
    throw std::invalid_argument("exponential residuals: single boundary only");
  const Scenario& s = p.scenario;
  for (const Density1D* d : {&s.f0(), &s.f1(), &s.f0_adv(), &s.f1_adv()})
    if (d->family() != "exponential")
      throw std::invalid_argument(
          "exponential residuals: all four densities must be exponential");
  double y1 = p.y[0];
  double a = y1 - gamma11, b = y1 + gamma12;
  if (a < 0.0)
    throw std::domain_error("exponential residuals: left edge below support");
  double r0 = s.f0().exponential_rate();
  double r1 = s.f1().exponential_rate();
  double r0t = s.f0_adv().exponential_rate();
  double r1t = s.f1_adv().exponential_rate();
  double p0 = s.p0(), p1 = s.p1();
  double c1 = p0 * std::exp(-r0 * a) - p1 * std::exp(-r1 * b) + p1 - p.zeta;
  double c2 = p1 * p1 * r1t * r1 * std::exp(-r1t * a - r1 * b) -
              p0 * p0 * r0t * r0 * std::exp(-r0t * b - r0 * a);
  return {c1, c2};
}

DesignSolution grid_search_design(const DesignProblem& p, int resolution) {
  validate_problem(p);
  if (p.y.size() != 1)
    throw std::invalid_argument("grid search: single boundary only");
  if (resolution < 50)
    throw std::invalid_argument("grid search: resolution must be >= 50");
  std::vector<Coord> coords = make_coords(p);
  double e0 = enom_of(p, {0.0, 0.0});
  if (p.zeta < e0 - 1e-12)
    throw std::invalid_argument(
        "design: zeta below the no-abstain nominal error (infeasible)");

  DesignSolution best;
  best.e_adv = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int i = 0; i <= resolution; ++i) {
    double g11 = coords[0].cap * i / resolution;
    for (int j = 0; j <= resolution; ++j) {
      double g12 = coords[1].cap * j / resolution;
      std::vector<double> g = {g11, g12};
      double en = enom_of(p, g);
      if (en > p.zeta + 1e-12) continue;
      double ea = eadv_of(p, g);
      if (!found || ea < best.e_adv) {
        found = true;
        best.gamma = g;
        best.e_nom = en;
        best.e_adv = ea;
      }
    }
  }
  if (!found) {  // zeta == e0 up to rounding: keep the empty region
    best.gamma = {0.0, 0.0};
    best.e_nom = e0;
    best.e_adv = eadv_of(p, best.gamma);
  }
  double h1 = coords[0].ratio(best.gamma[0]);
  double h2 = coords[1].ratio(best.gamma[1]);
  best.lambda = h1 > 0.0 && h2 > 0.0 ? std::sqrt(h1 * h2) : 1.0;
  best.constraint_residual = std::abs(best.e_nom - p.zeta);
  KktResiduals kr = kkt_residuals(p, best.gamma, best.lambda);
  double worst = 0.0;
  for (double sres : kr.stationarity) worst = std::max(worst, std::abs(sres));
  best.stationarity_residual = worst;
  best.status = SolveStatus::FallbackGrid;
  return best;
}

namespace {

std::vector<SweepRow> sweep_impl(const Scenario& s, const std::vector<double>& y,
                                 const std::vector<double>& zeta_grid,
                                 bool parallel) {
  if (!std::is_sorted(zeta_grid.begin(), zeta_grid.end()))
    throw std::invalid_argument("sweep: zeta grid must be sorted");
  std::vector<SweepRow> rows(zeta_grid.size());
  long count = static_cast<long>(zeta_grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(max_threads()) if (parallel)
#else
  (void)parallel;
#endif
  for (long i = 0; i < count; ++i) {
    SweepRow& row = rows[i];
    row.zeta = zeta_grid[i];
    try {
      row.solution = solve_design({s, y, zeta_grid[i]});
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.message = e.what();
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> sweep_tradeoff(const Scenario& s,
                                     const std::vector<double>& y,
                                     const std::vector<double>& zeta_grid) {
  return sweep_impl(s, y, zeta_grid, true);
}

std::vector<SweepRow> sweep_tradeoff_serial(const Scenario& s,
                                            const std::vector<double>& y,
                                            const std::vector<double>& zeta_grid) {
  return sweep_impl(s, y, zeta_grid, false);
}

}  // namespace abstain
