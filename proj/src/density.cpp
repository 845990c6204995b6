#include "abstain/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

#include "abstain/quadrature.hpp"
#include "abstain/rng.hpp"

namespace abstain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void reject_nan(double x, const char* what) {
  if (std::isnan(x)) throw std::invalid_argument(std::string(what) + ": NaN input");
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double standard_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / kSqrt2Pi;
}

// Acklam's rational approximation followed by one Halley refinement
// against the exact erfc-based CDF; accurate to ~1e-15 on (0,1).
double standard_normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = standard_normal_cdf(x) - p;
  double u = e / standard_normal_pdf(x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

struct ExponentialF {
  double rate;
};
struct GaussianF {
  double mean, stddev;
};
struct UniformF {
  double lo, hi;
};
struct MixtureF {
  std::vector<std::pair<double, Density1D>> components;
};
struct TabulatedF {
  std::vector<double> grid;
  std::vector<double> pdf;  // renormalized
  std::vector<double> cum;  // exact prefix integrals of the interpolant
};

}  // namespace

struct Density1D::Impl {
  std::variant<ExponentialF, GaussianF, UniformF, MixtureF, TabulatedF> fam;
};

namespace {

const double kQuadTol = 1e-10;
const long kQuadMaxSubdiv = 1000000;
const double kTruncationTail = 1e-13;

double tabulated_pdf(const TabulatedF& t, double x) {
  if (x < t.grid.front() || x > t.grid.back()) return 0.0;
  auto it = std::upper_bound(t.grid.begin(), t.grid.end(), x);
  if (it == t.grid.begin()) return t.pdf.front();
  if (it == t.grid.end()) return t.pdf.back();
  std::size_t i = static_cast<std::size_t>(it - t.grid.begin()) - 1;
  double h = t.grid[i + 1] - t.grid[i];
  double w = (x - t.grid[i]) / h;
  return t.pdf[i] * (1.0 - w) + t.pdf[i + 1] * w;
}

}  // namespace

Density1D Density1D::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "exponential: rate must be positive");
  return Density1D(std::make_shared<const Impl>(Impl{ExponentialF{rate}}));
}

Density1D Density1D::gaussian(double mean, double stddev) {
  require(std::isfinite(mean), "gaussian: mean must be finite");
  require(std::isfinite(stddev) && stddev > 0.0, "gaussian: std must be positive");
  return Density1D(std::make_shared<const Impl>(Impl{GaussianF{mean, stddev}}));
}

Density1D Density1D::uniform(double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi,
          "uniform: requires finite lo < hi");
  return Density1D(std::make_shared<const Impl>(Impl{UniformF{lo, hi}}));
}

Density1D Density1D::mixture(std::vector<std::pair<double, Density1D>> components) {
  require(!components.empty(), "mixture: needs at least one component");
  double wsum = 0.0;
  for (const auto& [w, comp] : components) {
    (void)comp;
    require(std::isfinite(w) && w > 0.0, "mixture: weights must be positive");
    wsum += w;
  }
  require(std::abs(wsum - 1.0) <= 1e-12, "mixture: weights must sum to 1");
  Density1D d(std::make_shared<const Impl>(Impl{MixtureF{std::move(components)}}));
  // Normalization check by quadrature over the covering interval.
  double lo = d.cover_lo(kTruncationTail), hi = d.cover_hi(kTruncationTail);
  double mass =
      integrate_adaptive([&d](double x) { return d.pdf(x); }, lo, hi, kQuadTol,
                         kQuadMaxSubdiv)
          .value;
  require(std::abs(mass - 1.0) <= 1e-8, "mixture: pdf does not integrate to 1");
  return d;
}

Density1D Density1D::tabulated(std::vector<double> grid,
                               std::vector<double> pdf_values) {
  require(grid.size() >= 2 && grid.size() == pdf_values.size(),
          "tabulated: grid and pdf need equal size >= 2");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(std::isfinite(grid[i]), "tabulated: grid must be finite");
    require(std::isfinite(pdf_values[i]) && pdf_values[i] >= 0.0,
            "tabulated: pdf values must be nonnegative");
    if (i > 0) require(grid[i] > grid[i - 1], "tabulated: grid must be strictly increasing");
  }
  // Trapezoid mass of the linear interpolant, then renormalize.
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    mass += 0.5 * (pdf_values[i] + pdf_values[i + 1]) * (grid[i + 1] - grid[i]);
  require(mass > 0.0, "tabulated: pdf must have positive mass");
  for (double& v : pdf_values) v /= mass;
  std::vector<double> cum(grid.size(), 0.0);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    cum[i + 1] = cum[i] + 0.5 * (pdf_values[i] + pdf_values[i + 1]) *
                              (grid[i + 1] - grid[i]);
  cum.back() = 1.0;
  Density1D d(std::make_shared<const Impl>(
      Impl{TabulatedF{std::move(grid), std::move(pdf_values), std::move(cum)}}));
  const TabulatedF& t = std::get<TabulatedF>(d.impl_->fam);
  double q = integrate_adaptive([&t](double x) { return tabulated_pdf(t, x); },
                                t.grid.front(), t.grid.back(), kQuadTol,
                                kQuadMaxSubdiv)
                 .value;
  require(std::abs(q - 1.0) <= 1e-8, "tabulated: pdf does not integrate to 1");
  return d;
}

double Density1D::pdf(double x) const {
  reject_nan(x, "pdf");
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialF>) {
          return x < 0.0 ? 0.0 : f.rate * std::exp(-f.rate * x);
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return standard_normal_pdf((x - f.mean) / f.stddev) / f.stddev;
        } else if constexpr (std::is_same_v<T, UniformF>) {
          return (x < f.lo || x > f.hi) ? 0.0 : 1.0 / (f.hi - f.lo);
        } else if constexpr (std::is_same_v<T, MixtureF>) {
          double acc = 0.0;
          for (const auto& [w, comp] : f.components) acc += w * comp.pdf(x);
          return acc;
        } else {
          return tabulated_pdf(f, x);
        }
      },
      impl_->fam);
}

double Density1D::cdf(double x) const {
  reject_nan(x, "cdf");
  return std::visit(
      [x, this](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialF>) {
          return x <= 0.0 ? 0.0 : -std::expm1(-f.rate * x);
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return standard_normal_cdf((x - f.mean) / f.stddev);
        } else if constexpr (std::is_same_v<T, UniformF>) {
          if (x <= f.lo) return 0.0;
          if (x >= f.hi) return 1.0;
          return (x - f.lo) / (f.hi - f.lo);
        } else {
          // Mixture/Tabulated: adaptive quadrature of the pdf from a
          // covering left endpoint (missed tail < 1e-13 << tolerance).
          double lo = cover_lo(kTruncationTail);
          if (x <= lo) return 0.0;
          if (x >= cover_hi(kTruncationTail)) return 1.0;
          double v = integrate_adaptive([this](double t) { return pdf(t); }, lo,
                                        x, kQuadTol, kQuadMaxSubdiv)
                         .value;
          return std::clamp(v, 0.0, 1.0);
        }
      },
      impl_->fam);
}

double Density1D::quantile(double p) const {
  require(std::isfinite(p) && p > 0.0 && p < 1.0, "quantile: p must be in (0,1)");
  return std::visit(
      [p, this](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialF>) {
          return -std::log1p(-p) / f.rate;
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return f.mean + f.stddev * standard_normal_quantile(p);
        } else if constexpr (std::is_same_v<T, UniformF>) {
          return f.lo + p * (f.hi - f.lo);
        } else if constexpr (std::is_same_v<T, TabulatedF>) {
          auto it = std::upper_bound(f.cum.begin(), f.cum.end(), p);
          std::size_t i = it == f.cum.begin()
                              ? 0
                              : static_cast<std::size_t>(it - f.cum.begin()) - 1;
          i = std::min(i, f.grid.size() - 2);
          double h = f.grid[i + 1] - f.grid[i];
          double f0 = f.pdf[i], f1 = f.pdf[i + 1];
          double delta = p - f.cum[i];
          double slope = (f1 - f0) / h;
          double t;
          if (std::abs(slope) < 1e-300) {
            t = f0 > 0.0 ? delta / f0 : 0.0;
          } else {
            double disc = std::max(0.0, f0 * f0 + 2.0 * slope * delta);
            t = (-f0 + std::sqrt(disc)) / slope;
          }
          return f.grid[i] + std::clamp(t, 0.0, h);
        } else {
          // Mixture: monotone bisection on the cdf.
          double lo = cover_lo(1e-15), hi = cover_hi(1e-15);
          for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo));
               ++it) {
            double mid = 0.5 * (lo + hi);
            (cdf(mid) < p ? lo : hi) = mid;
          }
          return 0.5 * (lo + hi);
        }
      },
      impl_->fam);
}

double Density1D::draw(Rng& rng) const {
  if (const auto* mix = std::get_if<MixtureF>(&impl_->fam)) {
    double u = rng.uniform01();
    double acc = 0.0;
    for (const auto& [w, comp] : mix->components) {
      acc += w;
      if (u <= acc) return comp.draw(rng);
    }
    return mix->components.back().second.draw(rng);
  }
  return quantile(rng.uniform01());
}

std::vector<double> Density1D::sample(std::size_t n, std::uint64_t seed) const {
  require(n >= 1, "sample: n must be >= 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = draw(rng);
  return out;
}

double Density1D::support_lo() const {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialF>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return -kInf;
        } else if constexpr (std::is_same_v<T, UniformF>) {
          return f.lo;
        } else if constexpr (std::is_same_v<T, MixtureF>) {
          double lo = kInf;
          for (const auto& [w, comp] : f.components) {
            (void)w;
            lo = std::min(lo, comp.support_lo());
          }
          return lo;
        } else {
          return f.grid.front();
        }
      },
      impl_->fam);
}

double Density1D::support_hi() const {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialF>) {
          return kInf;
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return kInf;
        } else if constexpr (std::is_same_v<T, UniformF>) {
          return f.hi;
        } else if constexpr (std::is_same_v<T, MixtureF>) {
          double hi = -kInf;
          for (const auto& [w, comp] : f.components) {
            (void)w;
            hi = std::max(hi, comp.support_hi());
          }
          return hi;
        } else {
          return f.grid.back();
        }
      },
      impl_->fam);
}

double Density1D::cover_lo(double tail_mass) const {
  return std::visit(
      [tail_mass](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialF>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return f.mean + f.stddev * standard_normal_quantile(tail_mass);
        } else if constexpr (std::is_same_v<T, UniformF>) {
          return f.lo;
        } else if constexpr (std::is_same_v<T, MixtureF>) {
          double lo = kInf;
          for (const auto& [w, comp] : f.components) {
            (void)w;
            lo = std::min(lo, comp.cover_lo(tail_mass));
          }
          return lo;
        } else {
          return f.grid.front();
        }
      },
      impl_->fam);
}

double Density1D::cover_hi(double tail_mass) const {
  return std::visit(
      [tail_mass](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialF>) {
          return -std::log(tail_mass) / f.rate;
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return f.mean + f.stddev * standard_normal_quantile(1.0 - tail_mass);
        } else if constexpr (std::is_same_v<T, UniformF>) {
          return f.hi;
        } else if constexpr (std::is_same_v<T, MixtureF>) {
          double hi = -kInf;
          for (const auto& [w, comp] : f.components) {
            (void)w;
            hi = std::max(hi, comp.cover_hi(tail_mass));
          }
          return hi;
        } else {
          return f.grid.back();
        }
      },
      impl_->fam);
}

bool Density1D::closed_form_cdf() const {
  return std::visit(
      [](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        return std::is_same_v<T, ExponentialF> || std::is_same_v<T, GaussianF> ||
               std::is_same_v<T, UniformF>;
      },
      impl_->fam);
}

std::string Density1D::family() const {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialF>) return "exponential";
        else if constexpr (std::is_same_v<T, GaussianF>) return "gaussian";
        else if constexpr (std::is_same_v<T, UniformF>) return "uniform";
        else if constexpr (std::is_same_v<T, MixtureF>) return "mixture";
        else return "tabulated";
      },
      impl_->fam);
}

double Density1D::exponential_rate() const {
  if (const auto* e = std::get_if<ExponentialF>(&impl_->fam)) return e->rate;
  throw std::invalid_argument("exponential_rate: not an exponential density");
}

Scenario::Scenario(Density1D f0, Density1D f1, Density1D f0_adv,
                   Density1D f1_adv, double p0, double p1)
    : f0_(std::move(f0)),
      f1_(std::move(f1)),
      f0_adv_(std::move(f0_adv)),
      f1_adv_(std::move(f1_adv)),
      p0_(p0),
      p1_(p1) {
  require(std::isfinite(p0) && std::isfinite(p1) && p0 > 0.0 && p0 < 1.0 &&
              p1 > 0.0 && p1 < 1.0,
          "scenario: priors must lie in (0,1)");
  require(std::abs(p0 + p1 - 1.0) <= 1e-12, "scenario: priors must sum to 1");
}

bool Scenario::closed_form() const {
  return f0_.closed_form_cdf() && f1_.closed_form_cdf() &&
         f0_adv_.closed_form_cdf() && f1_adv_.closed_form_cdf();
}

double Scenario::cover_lo(double tail_mass) const {
  return std::min(std::min(f0_.cover_lo(tail_mass), f1_.cover_lo(tail_mass)),
                  std::min(f0_adv_.cover_lo(tail_mass), f1_adv_.cover_lo(tail_mass)));
}

double Scenario::cover_hi(double tail_mass) const {
  return std::max(std::max(f0_.cover_hi(tail_mass), f1_.cover_hi(tail_mass)),
                  std::max(f0_adv_.cover_hi(tail_mass), f1_adv_.cover_hi(tail_mass)));
}

}  // namespace abstain
