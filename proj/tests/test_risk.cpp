#include <cmath>
#include <vector>

#include "abstain/classifier.hpp"
#include "abstain/density.hpp"
#include "abstain/risk.hpp"
#include "abstain/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using abstain::Classifier1D;
using abstain::Density1D;
using abstain::ErrorGradient;
using abstain::ErrorMethod;
using abstain::ErrorReport;
using abstain::RegionSpecD;
using abstain::Rng;
using abstain::Scenario;

namespace {

// Random scenario + classifier with feasible nonzero half-widths.
struct Instance {
  Scenario s;
  Classifier1D c;
};

Instance random_instance(Rng& rng, int max_boundaries) {
  bool exponential = rng.uniform01() < 0.5;
  Scenario s = exponential ? testing::random_exponential_scenario(rng)
                           : testing::random_gaussian_scenario(rng);
  int n = 1 + static_cast<int>(rng.uniform01() * max_boundaries);
  if (n > max_boundaries) n = max_boundaries;
  auto y = exponential ? testing::random_boundaries(rng, n, 0.3, 2.5)
                       : testing::random_boundaries(rng, n, -1.2, 1.2);
  auto caps = testing::gamma_caps(s, y, 1e-3);
  auto gamma = testing::random_gamma(rng, caps, 0.45);
  return {std::move(s), Classifier1D(y, gamma)};
}

}  // namespace

TEST_CASE("exponential example reproduces the frozen constants") {
  Scenario s = testing::example_scenario();
  Classifier1D c({testing::example_boundary()}, {0.0, 0.0});
  CHECK(std::abs(abstain::nominal_error(s, c) - testing::kExampleNominal) <=
        1e-15);
  CHECK(std::abs(abstain::adversarial_error(s, c) -
                 testing::kExampleAdversarial) <= 1e-15);

  ErrorGradient g = abstain::error_gradients(s, c);
  REQUIRE(g.d_enom.size() == 2);
  REQUIRE(g.d_eadv.size() == 2);
  // At the no-abstain point both nominal partials equal p1 f1(y) = p0 f0(y)
  // (the boundary is the likelihood-ratio crossing).
  CHECK(std::abs(g.d_enom[0] - 0.144337567297406441) <= 1e-15);
  CHECK(std::abs(g.d_enom[1] - 0.144337567297406441) <= 1e-15);
  CHECK(std::abs(g.d_eadv[0] - (-0.162212069870189423)) <= 1e-15);
  CHECK(std::abs(g.d_eadv[1] - (-0.160548312352046136)) <= 1e-15);

  ErrorReport r = abstain::evaluate_errors(s, c);
  CHECK(r.e_nom == abstain::nominal_error(s, c));
  CHECK(r.e_adv == abstain::adversarial_error(s, c));
  CHECK(r.abstain_mass_nominal == 0.0);
  CHECK(r.method == ErrorMethod::ClosedForm);
  CHECK(!r.se_e_nom.has_value());
  CHECK(r.std_error() == 0.0);
}

TEST_CASE("widening the abstain interval moves both errors as designed") {
  Scenario s = testing::example_scenario();
  Classifier1D narrow({testing::example_boundary()}, {0.2, 0.2});
  Classifier1D wide({testing::example_boundary()}, {0.4, 0.5});
  ErrorReport a = abstain::evaluate_errors(s, narrow);
  ErrorReport b = abstain::evaluate_errors(s, wide);
  CHECK(b.e_nom > a.e_nom);
  CHECK(b.e_adv < a.e_adv);
  CHECK(b.abstain_mass_nominal > a.abstain_mass_nominal);
}

TEST_CASE("formula agrees with the cell-by-cell oracle") {
  Scenario s = testing::example_scenario();
  Classifier1D c({testing::example_boundary()}, {0.2, 0.3});
  ErrorReport fast = abstain::evaluate_errors(s, c);
  ErrorReport slow = abstain::brute_force_errors(s, c);
  CHECK(std::abs(fast.e_nom - slow.e_nom) <= 1e-12);
  CHECK(std::abs(fast.e_adv - slow.e_adv) <= 1e-12);
  CHECK(std::abs(fast.abstain_mass_nominal - slow.abstain_mass_nominal) <=
        1e-12);

  Rng rng(314159);
  for (int t = 0; t < 60; ++t) {
    Instance inst = random_instance(rng, 6);
    ErrorReport f = abstain::evaluate_errors(inst.s, inst.c);
    ErrorReport b = abstain::brute_force_errors(inst.s, inst.c);
    CHECK(std::abs(f.e_nom - b.e_nom) <= 1e-9);
    CHECK(std::abs(f.e_adv - b.e_adv) <= 1e-9);
    CHECK(std::abs(f.abstain_mass_nominal - b.abstain_mass_nominal) <= 1e-9);
    CHECK(f.e_nom >= 0.0);
    CHECK(f.e_nom <= 1.0);
    CHECK(f.e_adv >= 0.0);
    CHECK(f.e_adv <= 1.0);
  }
}

TEST_CASE("oracle handles uniform and mixture densities") {
  Scenario s(Density1D::uniform(0.0, 2.0),
             Density1D::mixture({{0.5, Density1D::gaussian(1.5, 0.4)},
                                 {0.5, Density1D::uniform(1.0, 3.0)}}),
             Density1D::uniform(0.2, 2.2), Density1D::gaussian(1.3, 0.5), 0.6,
             0.4);
  Classifier1D c({0.8, 1.7}, {0.1, 0.2, 0.15, 0.1});
  ErrorReport f = abstain::evaluate_errors(s, c);
  ErrorReport b = abstain::brute_force_errors(s, c);
  CHECK(f.method == ErrorMethod::Quadrature);  // mixture cdf is numeric
  CHECK(std::abs(f.e_nom - b.e_nom) <= 5e-9);
  CHECK(std::abs(f.e_adv - b.e_adv) <= 5e-9);
}

TEST_CASE("nominal error dominates the pure misclassification mass") {
  // Abstaining counts against the nominal error, so dropping the abstain
  // terms can only shrink it.
  Rng rng(271828);
  for (int t = 0; t < 30; ++t) {
    Instance inst = random_instance(rng, 4);
    auto regs = abstain::regions(inst.c);
    double misclass = 0.0;
    for (const auto& iv : regs.r1.intervals())
      misclass += inst.s.p0() * (inst.s.f0().cdf(iv.hi) - inst.s.f0().cdf(iv.lo));
    for (const auto& iv : regs.r0.intervals()) {
      double lo_cdf = std::isfinite(iv.lo) ? inst.s.f1().cdf(iv.lo) : 0.0;
      double hi_cdf = std::isfinite(iv.hi) ? inst.s.f1().cdf(iv.hi) : 1.0;
      misclass += inst.s.p1() * (hi_cdf - lo_cdf);
    }
    CHECK(abstain::nominal_error(inst.s, inst.c) >= misclass - 1e-12);
  }
}

TEST_CASE("error gradients match finite differences") {
  Rng rng(161803);
  for (int t = 0; t < 40; ++t) {
    Instance inst = random_instance(rng, 6);
    const auto& y = inst.c.boundaries();
    std::vector<double> gamma = inst.c.gamma();
    // Keep every coordinate clear of zero so central differences stay valid.
    for (double& g : gamma) g = std::max(g, 1e-4);
    Classifier1D base(y, gamma);
    ErrorGradient an = abstain::error_gradients(inst.s, base);
    double h = 1e-6;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      auto bump = [&](double delta) {
        std::vector<double> g2 = gamma;
        g2[k] += delta;
        Classifier1D c2(y, g2);
        return std::pair(abstain::nominal_error(inst.s, c2),
                         abstain::adversarial_error(inst.s, c2));
      };
      auto [np, ap] = bump(h);
      auto [nm, am] = bump(-h);
      double fd_nom = (np - nm) / (2.0 * h);
      double fd_adv = (ap - am) / (2.0 * h);
      CHECK(std::abs(fd_nom - an.d_enom[k]) <=
            std::max(1e-6, 1e-4 * std::abs(an.d_enom[k])));
      CHECK(std::abs(fd_adv - an.d_eadv[k]) <=
            std::max(1e-6, 1e-4 * std::abs(an.d_eadv[k])));
    }
  }
}

TEST_CASE("gradient signs follow the error trade-off") {
  Rng rng(42);
  for (int t = 0; t < 20; ++t) {
    Instance inst = random_instance(rng, 3);
    ErrorGradient g = abstain::error_gradients(inst.s, inst.c);
    for (std::size_t k = 0; k < g.d_enom.size(); ++k) {
      CHECK(g.d_enom[k] >= 0.0);
      CHECK(g.d_eadv[k] <= 0.0);
    }
  }
}

TEST_CASE("nested abstain regions order the errors strictly") {
  Rng rng(5772156);
  for (int t = 0; t < 50; ++t) {
    Instance inst = random_instance(rng, 4);
    const auto& y = inst.c.boundaries();
    auto caps = testing::gamma_caps(inst.s, y, 1e-3);
    std::vector<double> inner = testing::random_gamma(rng, caps, 0.45);
    std::vector<double> outer(inner);
    for (std::size_t k = 0; k < outer.size(); ++k)
      outer[k] += (0.1 + 0.9 * rng.uniform01()) * 0.45 * caps[k];
    ErrorReport a =
        abstain::evaluate_errors(inst.s, Classifier1D(y, inner));
    ErrorReport b =
        abstain::evaluate_errors(inst.s, Classifier1D(y, outer));
    CHECK(b.e_nom - a.e_nom > 1e-10);
    CHECK(a.e_adv - b.e_adv > 1e-10);
  }
}

TEST_CASE("degenerate classifiers hit the exact extremes") {
  Scenario s = testing::example_scenario();
  // Abstain on (essentially) the whole support.
  double hi = s.cover_hi(1e-16);
  Classifier1D cover({1.0}, {1.0, hi});
  ErrorReport r = abstain::evaluate_errors(s, cover);
  CHECK(r.e_adv <= 1e-12);
  CHECK(r.e_nom >= 1.0 - 1e-12);
  CHECK(r.abstain_mass_nominal >= 1.0 - 1e-12);

  // Identical class-conditionals and equal priors: coin-flip risk.
  Density1D d = Density1D::gaussian(0.0, 1.0);
  Scenario sym(d, d, d, d, 0.5, 0.5);
  Classifier1D c({0.0}, {0.0, 0.0});
  CHECK(abstain::nominal_error(sym, c) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(abstain::adversarial_error(sym, c) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("monte carlo agrees with the closed form within its stderr") {
  Scenario s = testing::example_scenario();
  Classifier1D c({testing::example_boundary()}, {0.3, 0.4});
  ErrorReport exact = abstain::evaluate_errors(s, c);
  abstain::SampledScenario sampled = abstain::sampled_from(s);
  RegionSpecD region = abstain::region_from_classifier(c);
  ErrorReport mc = abstain::mc_errors(sampled, region, 200000, 2718);
  REQUIRE(mc.method == ErrorMethod::MonteCarlo);
  REQUIRE(mc.se_e_nom.has_value());
  REQUIRE(mc.se_e_adv.has_value());
  CHECK(*mc.se_e_nom > 0.0);
  CHECK(*mc.se_e_nom < 0.005);
  CHECK(std::abs(mc.e_nom - exact.e_nom) <= 4.0 * *mc.se_e_nom);
  CHECK(std::abs(mc.e_adv - exact.e_adv) <= 4.0 * *mc.se_e_adv);
  CHECK(mc.std_error() == std::max(*mc.se_e_nom, *mc.se_e_adv));
}

TEST_CASE("monte carlo is deterministic and seed-sensitive") {
  Scenario s = testing::example_scenario();
  Classifier1D c({testing::example_boundary()}, {0.2, 0.2});
  abstain::SampledScenario sampled = abstain::sampled_from(s);
  RegionSpecD region = abstain::region_from_classifier(c);
  ErrorReport a = abstain::mc_errors(sampled, region, 50000, 9);
  ErrorReport b = abstain::mc_errors(sampled, region, 50000, 9);
  ErrorReport d = abstain::mc_errors(sampled, region, 50000, 10);
  CHECK(a.e_nom == b.e_nom);
  CHECK(a.e_adv == b.e_adv);
  CHECK(a.e_nom != d.e_nom);
}

TEST_CASE("monte carlo handles all-or-nothing regions exactly") {
  abstain::SampledScenario s;
  s.dim = 2;
  auto ball = [](Rng& rng, std::span<double> out) {
    for (double& v : out) v = rng.uniform01();
  };
  s.draw_f0 = s.draw_f1 = s.draw_f0_adv = s.draw_f1_adv = ball;
  RegionSpecD all_abstain(
      2, [](std::span<const double>) { return 1.0; },
      [](std::span<const double>) { return 1.0; },
      [](std::span<const double>) { return -1.0; });
  ErrorReport r = abstain::mc_errors(s, all_abstain, 10000, 1);
  CHECK(r.e_nom == 1.0);
  CHECK(r.e_adv == 0.0);
  CHECK(r.abstain_mass_nominal == 1.0);

  RegionSpecD all_h1(
      2, [](std::span<const double>) { return 1.0; },
      [](std::span<const double>) { return -1.0; },
      [](std::span<const double>) { return 1.0; });
  ErrorReport r1 = abstain::mc_errors(s, all_h1, 10000, 1);
  // Every f0 sample lands in the H1 region, every f1 sample is correct.
  CHECK(r1.e_nom == s.p0);
  CHECK(r1.e_adv == s.p0);
  CHECK(r1.abstain_mass_nominal == 0.0);
}

TEST_CASE("monte carlo rejects tiny budgets") {
  Scenario s = testing::example_scenario();
  abstain::SampledScenario sampled = abstain::sampled_from(s);
  RegionSpecD region =
      abstain::region_from_classifier(Classifier1D({1.0}, {0.0, 0.0}));
  CHECK_THROWS_AS(abstain::mc_errors(sampled, region, 999, 1),
                  std::invalid_argument);
}
