// Timing comparison of the OpenMP kernels against their serial reference
// implementations, with a result-equality check.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "abstain/classifier.hpp"
#include "abstain/density.hpp"
#include "abstain/design.hpp"
#include "abstain/empirical.hpp"
#include "abstain/parallel.hpp"
#include "abstain/risk.hpp"

using namespace abstain;

namespace {

double time_ms(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms,
            bool identical) {
  std::printf("%-28s %10.1f ms %10.1f ms   x%.2f   results %s\n", name.c_str(),
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "identical" : "DIFFER");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", max_threads());
  std::printf("%-28s %13s %13s %7s\n", "kernel", "serial", "parallel", "");

  Scenario s(Density1D::exponential(1.5), Density1D::exponential(0.5),
             Density1D::exponential(1.2), Density1D::exponential(0.7), 0.5, 0.5);
  double y1 = std::log(3.0);
  Classifier1D c({y1}, {0.2, 0.3});

  {
    SampledScenario sam = sampled_from(s);
    RegionSpecD region = region_from_classifier(c);
    constexpr long kDraws = 2000000;
    ErrorReport a, b;
    double ts = time_ms([&] { a = mc_errors_serial(sam, region, kDraws, 42); });
    double tp = time_ms([&] { b = mc_errors(sam, region, kDraws, 42); });
    report("monte carlo (2e6 draws)", ts, tp,
           a.e_nom == b.e_nom && a.e_adv == b.e_adv &&
               a.abstain_mass_nominal == b.abstain_mass_nominal);
  }

  {
    double e0 = nominal_error(s, Classifier1D({y1}, {0.0, 0.0}));
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(e0 + (1.0 - e0) * i / 8.0);
    std::vector<SweepRow> a, b;
    double ts = time_ms([&] { a = sweep_tradeoff_serial(s, {y1}, grid); });
    double tp = time_ms([&] { b = sweep_tradeoff(s, {y1}, grid); });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
      same = a[i].ok == b[i].ok && a[i].solution.gamma == b[i].solution.gamma &&
             a[i].solution.e_adv == b[i].solution.e_adv;
    report("design sweep (9 budgets)", ts, tp, same);
  }

  {
    auto [train, test] = make_blob_benchmark(7);
    ProbModel model = train_model(train, 1e-3, 7);
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    std::vector<EmpiricalReport> a, b;
    double ts = time_ms([&] {
      a.clear();
      for (double pa : grid)
        a.push_back(empirical_errors_serial(model, test, pa, 0.3, 7));
    });
    double tp = time_ms([&] {
      b.clear();
      for (double pa : grid)
        b.push_back(empirical_errors(model, test, pa, 0.3, 7));
    });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
      same = a[i].e_nom == b[i].e_nom && a[i].e_adv == b[i].e_adv &&
             a[i].abstain_fraction == b[i].abstain_fraction;
    report("threshold sweep (21 pts)", ts, tp, same);
  }

  return 0;
}
