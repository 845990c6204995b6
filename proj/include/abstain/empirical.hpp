#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace abstain {

/// Label value returned when the classifier declines to decide.
constexpr int kAbstainLabel = -1;

struct Dataset {
  std::vector<double> features;  // row-major, size() == n * dim
  std::vector<int> labels;       // values in {0..classes-1}
  int dim = 0;
  int classes = 0;

  Dataset() = default;
  Dataset(std::vector<double> features, std::vector<int> labels, int dim,
          int classes);

  long size() const { return static_cast<long>(labels.size()); }
  std::span<const double> row(long i) const {
    return {features.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

/// Multinomial-logistic scorer: softmax(W x + b).
struct ProbModel {
  int classes = 0;
  int dim = 0;
  std::vector<double> weights;  // classes x dim, row-major
  std::vector<double> biases;   // one per class

  /// Softmax probabilities for one input; out must have `classes` entries.
  void probabilities(std::span<const double> x, std::span<double> out) const;
};

/// Full-batch gradient descent on L2-regularized cross-entropy with a fixed
/// provably-safe step size; stops at relative objective change < 1e-8 or
/// 10^4 iterations.  Deterministic.  If loss_trace is non-null it receives
/// the objective value at every iterate (nonincreasing).
ProbModel train_model(const Dataset& train, double l2, std::uint64_t seed,
                      std::vector<double>* loss_trace = nullptr);

/// Argmax label (lowest index on ties), or kAbstainLabel when the maximum
/// softmax probability is strictly below p_a.
int abstain_predict(const ProbModel& m, std::span<const double> x, double p_a);

/// Single-step sign perturbation along the input gradient of the
/// cross-entropy loss at the true label; every coordinate moves by exactly
/// +-xi (0 where the gradient component is 0).
std::vector<double> adversarial_perturb(const ProbModel& m,
                                        std::span<const double> x,
                                        int true_label, double xi);

struct EmpiricalReport {
  double p_a = 0.0;
  double e_nom = 0.0;            // misclassified or abstained, clean inputs
  double e_adv = 0.0;            // misclassified and not abstained, perturbed
  double abstain_fraction = 0.0; // abstained, clean inputs
  double xi = 0.0;
};

EmpiricalReport empirical_errors(const ProbModel& m, const Dataset& test,
                                 double p_a, double xi, std::uint64_t seed);

/// Single-threaded reference; must match empirical_errors exactly.
EmpiricalReport empirical_errors_serial(const ProbModel& m, const Dataset& test,
                                        double p_a, double xi,
                                        std::uint64_t seed);

/// One report per threshold, grid order preserved.
std::vector<EmpiricalReport> sweep_pa(const ProbModel& m, const Dataset& test,
                                      const std::vector<double>& pa_grid,
                                      double xi, std::uint64_t seed);

/// Reproducible desk-scale benchmark: three isotropic Gaussian blobs in the
/// plane (means on the unit circle, sigma 0.6), 2000 train + 2000 test
/// samples with balanced labels.  Returns {train, test}.
std::pair<Dataset, Dataset> make_blob_benchmark(std::uint64_t seed);

/// CSV round trip, header `label,f1,...,fd`.
Dataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const std::string& path, const Dataset& ds);

}  // namespace abstain
