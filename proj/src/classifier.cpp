#include "abstain/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace abstain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double Interval::length() const {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return kInf;
  return hi - lo;
}

IntervalSet::IntervalSet(std::vector<Interval> intervals)
    : intervals_(std::move(intervals)) {
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    require(intervals_[i].lo <= intervals_[i].hi, "interval: lo > hi");
    if (i > 0) {
      const Interval& prev = intervals_[i - 1];
      const Interval& cur = intervals_[i];
      bool touching = prev.hi == cur.lo && (prev.closed_hi && cur.closed_lo);
      require(prev.hi < cur.lo || (prev.hi == cur.lo && !touching),
              "interval set: intervals must be disjoint");
    }
  }
}

bool IntervalSet::contains(double x) const {
  auto it = std::upper_bound(
      intervals_.begin(), intervals_.end(), x,
      [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  return std::prev(it)->contains(x);
}

double IntervalSet::total_length() const {
  double acc = 0.0;
  for (const Interval& iv : intervals_) acc += iv.length();
  return acc;
}

Classifier1D::Classifier1D(std::vector<double> boundaries,
                           std::vector<double> gamma)
    : y_(std::move(boundaries)), gamma_(std::move(gamma)) {
  require(!y_.empty(), "classifier: needs at least one boundary");
  require(gamma_.size() == 2 * y_.size(),
          "classifier: gamma must have 2n entries");
  for (std::size_t i = 0; i < y_.size(); ++i) {
    require(std::isfinite(y_[i]), "classifier: boundaries must be finite");
    if (i > 0) require(y_[i] > y_[i - 1], "classifier: boundaries must be strictly increasing");
  }
  for (double g : gamma_)
    require(std::isfinite(g) && g >= 0.0, "classifier: gamma must be nonnegative");
  for (std::size_t i = 0; i + 1 < y_.size(); ++i) {
    require(right_edge(static_cast<int>(i)) < left_edge(static_cast<int>(i) + 1),
            "classifier: abstain intervals must be disjoint");
  }
}

Regions regions(const Classifier1D& c) {
  const auto& y = c.boundaries();
  int n = c.n_boundaries();
  std::vector<Interval> r0, r1, ra;
  // Interval i runs (y_i, y_{i+1}) with y_0 = -inf, y_{n+1} = +inf;
  // even i -> H0 (open), odd i -> H1 (closed at finite ends).
  for (int i = 0; i <= n; ++i) {
    double lo = i == 0 ? -kInf : y[i - 1];
    double hi = i == n ? kInf : y[i];
    if (i % 2 == 0) {
      r0.push_back({lo, hi, false, false});
    } else {
      r1.push_back({lo, hi, std::isfinite(lo), std::isfinite(hi)});
    }
  }
  for (int i = 0; i < n; ++i)
    ra.push_back({c.left_edge(i), c.right_edge(i), true, true});
  return Regions{IntervalSet(std::move(r0)), IntervalSet(std::move(r1)),
                 IntervalSet(std::move(ra))};
}

Label classify(const Classifier1D& c, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("classify: x must be finite");
  const auto& y = c.boundaries();
  int n = c.n_boundaries();
  for (int i = 0; i < n; ++i) {
    if (x >= c.left_edge(i) && x <= c.right_edge(i)) return Label::Abstain;
  }
  // Boundaries themselves belong to H1 (closed R1 intervals).
  auto it = std::lower_bound(y.begin(), y.end(), x);
  if (it != y.end() && *it == x) return Label::H1;
  int idx = static_cast<int>(it - y.begin());  // x lies in (y_idx, y_{idx+1})
  return idx % 2 == 0 ? Label::H0 : Label::H1;
}

RegionSpecD::RegionSpecD(int dim, SignFn g, SignFn g1, SignFn g2)
    : dim_(dim), g_(std::move(g)), g1_(std::move(g1)), g2_(std::move(g2)) {
  if (dim_ < 1) throw std::invalid_argument("region spec: dim must be >= 1");
  if (!g_ || !g1_ || !g2_)
    throw std::invalid_argument("region spec: all sign functions required");
}

Label classify_d(const RegionSpecD& r, std::span<const double> x) {
  if (static_cast<int>(x.size()) != r.dim())
    throw std::invalid_argument("classify_d: dimension mismatch");
  if (r.g1(x) >= 0.0 && r.g2(x) <= 0.0) return Label::Abstain;
  return r.g(x) <= 0.0 ? Label::H0 : Label::H1;
}

RegionSpecD region_from_classifier(const Classifier1D& c) {
  // Indicator-style sign functions; the abstain slab test reduces to
  // plain membership because g2 = -g1.
  auto in_ra = [c](std::span<const double> x) -> double {
    for (int i = 0; i < c.n_boundaries(); ++i)
      if (x[0] >= c.left_edge(i) && x[0] <= c.right_edge(i)) return 1.0;
    return -1.0;
  };
  auto g = [c](std::span<const double> x) -> double {
    const auto& y = c.boundaries();
    auto it = std::lower_bound(y.begin(), y.end(), x[0]);
    if (it != y.end() && *it == x[0]) return 1.0;
    int idx = static_cast<int>(it - y.begin());
    return idx % 2 == 0 ? -1.0 : 1.0;
  };
  auto g2 = [in_ra](std::span<const double> x) -> double { return -in_ra(x); };
  return RegionSpecD(1, g, in_ra, g2);
}

}  // namespace abstain
