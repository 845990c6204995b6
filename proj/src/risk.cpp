#include "abstain/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "abstain/parallel.hpp"

namespace abstain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Abstain edges for boundary i (0-based): [left_edge, right_edge].
// The alternating-sign error sums evaluate each CDF at one edge per
// boundary; which edge belongs to which sum flips with boundary parity.
struct Edges {
  double a, b;  // a = y_i - gamma_i1, b = y_i + gamma_i2
};

Edges edges(const Classifier1D& c, int i) {
  return {c.left_edge(i), c.right_edge(i)};
}

ErrorMethod formula_method(const Scenario& s) {
  return s.closed_form() ? ErrorMethod::ClosedForm : ErrorMethod::Quadrature;
}

double abstain_mass(const Scenario& s, const Classifier1D& c) {
  double m = 0.0;
  for (int i = 0; i < c.n_boundaries(); ++i) {
    Edges e = edges(c, i);
    m += s.p0() * (s.f0().cdf(e.b) - s.f0().cdf(e.a)) +
         s.p1() * (s.f1().cdf(e.b) - s.f1().cdf(e.a));
  }
  return clamp01(m);
}

}  // namespace

std::string to_string(ErrorMethod m) {
  switch (m) {
    case ErrorMethod::ClosedForm: return "closed_form";
    case ErrorMethod::Quadrature: return "quadrature";
    case ErrorMethod::MonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

double ErrorReport::std_error() const {
  return std::max(se_e_nom.value_or(0.0), se_e_adv.value_or(0.0));
}

double nominal_error(const Scenario& s, const Classifier1D& c) {
  int n = c.n_boundaries();
  double sum0 = n % 2 == 1 ? 1.0 : 0.0;  // tail constant, p0 bracket
  double sum1 = n % 2 == 0 ? 1.0 : 0.0;  // tail constant, p1 bracket
  for (int i = 0; i < n; ++i) {
    Edges e = edges(c, i);
    double sign = (i + 1) % 2 == 1 ? -1.0 : 1.0;  // (-1)^l, l = i+1
    // Odd boundary (1-based): F0 sees the left edge, F1 the right edge;
    // even boundaries swap.  This is the j/k parity bookkeeping.
    double x0 = (i + 1) % 2 == 1 ? e.a : e.b;
    double x1 = (i + 1) % 2 == 1 ? e.b : e.a;
    sum0 += sign * s.f0().cdf(x0);
    sum1 -= sign * s.f1().cdf(x1);
  }
  return clamp01(s.p0() * sum0 + s.p1() * sum1);
}

double adversarial_error(const Scenario& s, const Classifier1D& c) {
  int n = c.n_boundaries();
  double sum0 = n % 2 == 1 ? 1.0 : 0.0;
  double sum1 = n % 2 == 0 ? 1.0 : 0.0;
  for (int i = 0; i < n; ++i) {
    Edges e = edges(c, i);
    double sign = (i + 1) % 2 == 1 ? -1.0 : 1.0;
    // Edge roles are exchanged relative to the nominal error: the attacked
    // H0 samples are only caught past the right abstain edge, and vice versa.
    double x0 = (i + 1) % 2 == 1 ? e.b : e.a;
    double x1 = (i + 1) % 2 == 1 ? e.a : e.b;
    sum0 += sign * s.f0_adv().cdf(x0);
    sum1 -= sign * s.f1_adv().cdf(x1);
  }
  return clamp01(s.p0() * sum0 + s.p1() * sum1);
}

ErrorGradient error_gradients(const Scenario& s, const Classifier1D& c) {
  int n = c.n_boundaries();
  ErrorGradient g;
  g.d_enom.resize(2 * n);
  g.d_eadv.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    Edges e = edges(c, i);
    bool odd = (i + 1) % 2 == 1;  // 1-based parity: q=0,r=1 for odd boundaries
    double pq = odd ? s.p0() : s.p1();
    double pr = odd ? s.p1() : s.p0();
    const Density1D& fq = odd ? s.f0() : s.f1();
    const Density1D& fr = odd ? s.f1() : s.f0();
    const Density1D& fq_adv = odd ? s.f0_adv() : s.f1_adv();
    const Density1D& fr_adv = odd ? s.f1_adv() : s.f0_adv();
    g.d_enom[2 * i] = pq * fq.pdf(e.a);
    g.d_enom[2 * i + 1] = pr * fr.pdf(e.b);
    g.d_eadv[2 * i] = -pr * fr_adv.pdf(e.a);
    g.d_eadv[2 * i + 1] = -pq * fq_adv.pdf(e.b);
  }
  return g;
}

ErrorReport evaluate_errors(const Scenario& s, const Classifier1D& c) {
  ErrorReport r;
  r.e_nom = nominal_error(s, c);
  r.e_adv = adversarial_error(s, c);
  r.abstain_mass_nominal = abstain_mass(s, c);
  r.method = formula_method(s);
  return r;
}

ErrorReport brute_force_errors(const Scenario& s, const Classifier1D& c) {
  // Cell partition at every boundary and abstain edge; each open cell lies
  // entirely inside one decision region and is entirely in or out of Ra.
  std::vector<double> cuts;
  for (int i = 0; i < c.n_boundaries(); ++i) {
    cuts.push_back(c.left_edge(i));
    cuts.push_back(c.boundaries()[i]);
    cuts.push_back(c.right_edge(i));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto& y = c.boundaries();
  auto in_ra = [&](double x) {
    for (int i = 0; i < c.n_boundaries(); ++i)
      if (x >= c.left_edge(i) && x <= c.right_edge(i)) return true;
    return false;
  };
  auto in_r1 = [&](double x) {
    auto it = std::upper_bound(y.begin(), y.end(), x);
    return static_cast<int>(it - y.begin()) % 2 == 1;
  };

  ErrorReport r;
  r.method = formula_method(s);
  int m = static_cast<int>(cuts.size());
  for (int cell = 0; cell <= m; ++cell) {
    double lo = cell == 0 ? -kInf : cuts[cell - 1];
    double hi = cell == m ? kInf : cuts[cell];
    double rep;  // representative interior point
    if (cell == 0) rep = cuts.front() - 1.0;
    else if (cell == m) rep = cuts.back() + 1.0;
    else rep = 0.5 * (lo + hi);

    double m0 = (cell == m ? 1.0 : s.f0().cdf(hi)) - (cell == 0 ? 0.0 : s.f0().cdf(lo));
    double m1 = (cell == m ? 1.0 : s.f1().cdf(hi)) - (cell == 0 ? 0.0 : s.f1().cdf(lo));
    bool abst = in_ra(rep);
    bool h1 = in_r1(rep);

    // Def. 1: misclassified or abstained.
    if (h1) r.e_nom += s.p0() * m0;
    else r.e_nom += s.p1() * m1;
    if (abst) {
      if (h1) r.e_nom += s.p1() * m1;
      else r.e_nom += s.p0() * m0;
      r.abstain_mass_nominal += s.p0() * m0 + s.p1() * m1;
    }

    // Def. 2: misclassified and not abstained, under the shifted densities.
    if (!abst) {
      double t0 = (cell == m ? 1.0 : s.f0_adv().cdf(hi)) -
                  (cell == 0 ? 0.0 : s.f0_adv().cdf(lo));
      double t1 = (cell == m ? 1.0 : s.f1_adv().cdf(hi)) -
                  (cell == 0 ? 0.0 : s.f1_adv().cdf(lo));
      if (h1) r.e_adv += s.p0() * t0;
      else r.e_adv += s.p1() * t1;
    }
  }
  r.e_nom = clamp01(r.e_nom);
  r.e_adv = clamp01(r.e_adv);
  r.abstain_mass_nominal = clamp01(r.abstain_mass_nominal);
  return r;
}

SampledScenario sampled_from(const Scenario& s) {
  SampledScenario out;
  out.dim = 1;
  out.p0 = s.p0();
  out.p1 = s.p1();
  out.draw_f0 = [d = s.f0()](Rng& rng, std::span<double> x) { x[0] = d.draw(rng); };
  out.draw_f1 = [d = s.f1()](Rng& rng, std::span<double> x) { x[0] = d.draw(rng); };
  out.draw_f0_adv = [d = s.f0_adv()](Rng& rng, std::span<double> x) { x[0] = d.draw(rng); };
  out.draw_f1_adv = [d = s.f1_adv()](Rng& rng, std::span<double> x) { x[0] = d.draw(rng); };
  return out;
}

namespace {

constexpr long kChunk = 1 << 16;

struct McCounts {
  long nom0 = 0, nom1 = 0;  // classify != class, nominal draws
  long adv0 = 0, adv1 = 0;  // classified as the wrong class, attacked draws
  long abst0 = 0, abst1 = 0;
};

// One chunk of one stream; a fresh RNG per (stream, chunk) makes the totals
// independent of how chunks are scheduled across threads.
void mc_stream_chunk(const SampledScenario& s, const RegionSpecD& r, int stream,
                     std::uint64_t seed, long chunk, long count, McCounts& acc) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(stream),
                      static_cast<std::uint64_t>(chunk)));
  std::vector<double> x(static_cast<std::size_t>(s.dim));
  for (long i = 0; i < count; ++i) {
    switch (stream) {
      case 0: s.draw_f0(rng, x); break;
      case 1: s.draw_f1(rng, x); break;
      case 2: s.draw_f0_adv(rng, x); break;
      default: s.draw_f1_adv(rng, x); break;
    }
    Label lab = classify_d(r, x);
    switch (stream) {
      case 0:
        if (lab != Label::H0) ++acc.nom0;
        if (lab == Label::Abstain) ++acc.abst0;
        break;
      case 1:
        if (lab != Label::H1) ++acc.nom1;
        if (lab == Label::Abstain) ++acc.abst1;
        break;
      case 2:
        if (lab == Label::H1) ++acc.adv0;
        break;
      default:
        if (lab == Label::H0) ++acc.adv1;
        break;
    }
  }
}

ErrorReport mc_errors_impl(const SampledScenario& s, const RegionSpecD& r,
                           long n, std::uint64_t seed, bool parallel) {
  if (n < 1000) throw std::invalid_argument("mc_errors: need n >= 1000");
  if (s.dim < 1 || r.dim() != s.dim)
    throw std::invalid_argument("mc_errors: dimension mismatch");
  if (!s.draw_f0 || !s.draw_f1 || !s.draw_f0_adv || !s.draw_f1_adv)
    throw std::invalid_argument("mc_errors: all four samplers required");
  if (!(s.p0 >= 0.0 && s.p1 >= 0.0 && std::abs(s.p0 + s.p1 - 1.0) <= 1e-12))
    throw std::invalid_argument("mc_errors: priors must be in [0,1] and sum to 1");

  long n_chunks = (n + kChunk - 1) / kChunk;
  long total = 4 * n_chunks;  // task id = stream * n_chunks + chunk
  long nom0 = 0, nom1 = 0, adv0 = 0, adv1 = 0, abst0 = 0, abst1 = 0;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (parallel) \
    reduction(+ : nom0, nom1, adv0, adv1, abst0, abst1)
#else
  (void)parallel;
#endif
  for (long task = 0; task < total; ++task) {
    int stream = static_cast<int>(task / n_chunks);
    long chunk = task % n_chunks;
    long count = std::min(kChunk, n - chunk * kChunk);
    McCounts c;
    mc_stream_chunk(s, r, stream, seed, chunk, count, c);
    nom0 += c.nom0;
    nom1 += c.nom1;
    adv0 += c.adv0;
    adv1 += c.adv1;
    abst0 += c.abst0;
    abst1 += c.abst1;
  }

  double dn = static_cast<double>(n);
  double q_nom0 = nom0 / dn, q_nom1 = nom1 / dn;
  double q_adv0 = adv0 / dn, q_adv1 = adv1 / dn;

  ErrorReport rep;
  rep.method = ErrorMethod::MonteCarlo;
  rep.e_nom = s.p0 * q_nom0 + s.p1 * q_nom1;
  rep.e_adv = s.p0 * q_adv0 + s.p1 * q_adv1;
  rep.abstain_mass_nominal = s.p0 * (abst0 / dn) + s.p1 * (abst1 / dn);
  rep.se_e_nom = std::sqrt(s.p0 * s.p0 * q_nom0 * (1.0 - q_nom0) / dn +
                           s.p1 * s.p1 * q_nom1 * (1.0 - q_nom1) / dn);
  rep.se_e_adv = std::sqrt(s.p0 * s.p0 * q_adv0 * (1.0 - q_adv0) / dn +
                           s.p1 * s.p1 * q_adv1 * (1.0 - q_adv1) / dn);
  return rep;
}

}  // namespace

ErrorReport mc_errors(const SampledScenario& s, const RegionSpecD& r, long n,
                      std::uint64_t seed) {
  return mc_errors_impl(s, r, n, seed, true);
}

ErrorReport mc_errors_serial(const SampledScenario& s, const RegionSpecD& r,
                             long n, std::uint64_t seed) {
  return mc_errors_impl(s, r, n, seed, false);
}

}  // namespace abstain
