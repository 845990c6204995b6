#pragma once

#include <functional>
#include <span>
#include <vector>

namespace abstain {

enum class Label { H0, H1, Abstain };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed_lo = true;
  bool closed_hi = true;

  bool contains(double x) const {
    if (x < lo || x > hi) return false;
    if (x == lo && !closed_lo) return false;
    if (x == hi && !closed_hi) return false;
    return true;
  }
  /// Length of the finite part (0 for degenerate points).
  double length() const;
};

/// Sorted list of pairwise disjoint intervals.
class IntervalSet {
public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> intervals);

  bool contains(double x) const;
  double total_length() const;
  const std::vector<Interval>& intervals() const { return intervals_; }

private:
  std::vector<Interval> intervals_;
};

/// 1-D classifier with an abstain option: strictly increasing finite
/// boundaries y_1..y_n and nonnegative abstain half-widths stored as
/// [g_11, g_12, ..., g_n1, g_n2]. The abstain interval around y_i is
/// [y_i - g_i1, y_i + g_i2]; overlapping intervals are rejected.
class Classifier1D {
public:
  Classifier1D(std::vector<double> boundaries, std::vector<double> gamma);

  int n_boundaries() const { return static_cast<int>(y_.size()); }
  const std::vector<double>& boundaries() const { return y_; }
  const std::vector<double>& gamma() const { return gamma_; }

  /// Abstain edges for boundary index i in [0, n).
  double left_edge(int i) const { return y_[i] - gamma_[2 * i]; }
  double right_edge(int i) const { return y_[i] + gamma_[2 * i + 1]; }

private:
  std::vector<double> y_;
  std::vector<double> gamma_;
};

struct Regions {
  IntervalSet r0, r1, ra;
};

/// The three classifier regions. Intervals between consecutive boundaries
/// alternate H0 (open) and H1 (closed) starting with H0 on the left;
/// abstain intervals are closed.
Regions regions(const Classifier1D& c);

Label classify(const Classifier1D& c, double x);

/// d-dimensional region spec: sign functions g (H0/H1 split) and g1, g2
/// (abstain slab: g1 >= 0 and g2 <= 0).
class RegionSpecD {
public:
  using SignFn = std::function<double(std::span<const double>)>;

  RegionSpecD(int dim, SignFn g, SignFn g1, SignFn g2);

  int dim() const { return dim_; }
  double g(std::span<const double> x) const { return g_(x); }
  double g1(std::span<const double> x) const { return g1_(x); }
  double g2(std::span<const double> x) const { return g2_(x); }

private:
  int dim_;
  SignFn g_, g1_, g2_;
};

Label classify_d(const RegionSpecD& r, std::span<const double> x);

/// Wraps a 1-D classifier as a RegionSpecD over d=1 vectors.
RegionSpecD region_from_classifier(const Classifier1D& c);

}  // namespace abstain
