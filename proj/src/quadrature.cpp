#include "abstain/quadrature.hpp"

#include <cmath>
#include <vector>

namespace abstain {

namespace {

struct Segment {
  double a, b;
  double fa, fm, fb;
  double whole;  // Simpson estimate over [a, b]
  double tol;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    long max_subdivisions) {
  QuadratureResult res;
  if (a == b) return res;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  double fa = f(a), fb = f(b);
  double m = 0.5 * (a + b);
  double fm = f(m);
  std::vector<Segment> stack;
  stack.push_back({a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), abs_tol});

  // Segments too narrow to split further are accepted with their local
  // error charged against the budget.
  const double min_width = (b - a) * 1e-15;

  while (!stack.empty()) {
    Segment s = stack.back();
    stack.pop_back();

    double lm = 0.5 * (s.a + 0.5 * (s.a + s.b));
    double rm = 0.5 * (0.5 * (s.a + s.b) + s.b);
    double flm = f(lm), frm = f(rm);
    double mid = 0.5 * (s.a + s.b);
    double left = simpson(s.a, mid, s.fa, flm, s.fm);
    double right = simpson(mid, s.b, s.fm, frm, s.fb);
    double delta = left + right - s.whole;
    ++res.subdivisions;

    if (std::abs(delta) <= 15.0 * s.tol || (s.b - s.a) < min_width) {
      res.value += left + right + delta / 15.0;
      res.error_estimate += std::abs(delta) / 15.0;
    } else if (res.subdivisions >= max_subdivisions) {
      // Budget exhausted: fold in the remaining estimates and report.
      res.value += left + right + delta / 15.0;
      res.error_estimate += std::abs(delta) / 15.0;
      for (const Segment& r : stack) {
        res.value += r.whole;
        res.error_estimate += r.tol * 15.0;
      }
      throw NumericalError("adaptive quadrature did not converge: achieved " +
                               std::to_string(res.error_estimate) +
                               ", requested " + std::to_string(abs_tol),
                           res.error_estimate);
    } else {
      stack.push_back({s.a, mid, s.fa, flm, s.fm, left, 0.5 * s.tol});
      stack.push_back({mid, s.b, s.fm, frm, s.fb, right, 0.5 * s.tol});
    }
  }

  res.value *= sign;
  return res;
}

}  // namespace abstain
