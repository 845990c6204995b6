#include "abstain/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "abstain/density.hpp"
#include "abstain/parallel.hpp"
#include "abstain/rng.hpp"

namespace abstain {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_model_dataset(const ProbModel& m, const Dataset& d) {
  require(m.dim == d.dim && m.classes >= d.classes,
          "empirical: model/dataset shape mismatch");
}

// Cross-entropy objective plus L2 penalty on the weights (biases free).
double objective(const ProbModel& m, const Dataset& d, double l2,
                 std::vector<double>& probs) {
  double loss = 0.0;
  for (long i = 0; i < d.size(); ++i) {
    m.probabilities(d.row(i), probs);
    loss += -std::log(std::max(probs[d.labels[i]], 1e-300));
  }
  loss /= static_cast<double>(d.size());
  double w2 = 0.0;
  for (double w : m.weights) w2 += w * w;
  return loss + 0.5 * l2 * w2;
}

}  // namespace

Dataset::Dataset(std::vector<double> features_in, std::vector<int> labels_in,
                 int dim_in, int classes_in)
    : features(std::move(features_in)),
      labels(std::move(labels_in)),
      dim(dim_in),
      classes(classes_in) {
  require(dim >= 1 && classes >= 1, "dataset: dim and classes must be >= 1");
  require(!labels.empty(), "dataset: needs at least one sample");
  require(features.size() == labels.size() * static_cast<std::size_t>(dim),
          "dataset: feature matrix size mismatch");
  for (int z : labels)
    require(z >= 0 && z < classes, "dataset: label out of range");
  for (double v : features)
    require(std::isfinite(v), "dataset: features must be finite");
}

void ProbModel::probabilities(std::span<const double> x,
                              std::span<double> out) const {
  if (static_cast<int>(x.size()) != dim ||
      static_cast<int>(out.size()) != classes)
    throw std::invalid_argument("probabilities: shape mismatch");
  double top = -1e308;
  for (int c = 0; c < classes; ++c) {
    double s = biases[c];
    const double* w = weights.data() + static_cast<std::size_t>(c) * dim;
    for (int j = 0; j < dim; ++j) s += w[j] * x[j];
    out[c] = s;
    top = std::max(top, s);
  }
  double z = 0.0;
  for (int c = 0; c < classes; ++c) {
    out[c] = std::exp(out[c] - top);
    z += out[c];
  }
  for (int c = 0; c < classes; ++c) out[c] /= z;
}

ProbModel train_model(const Dataset& train, double l2, std::uint64_t seed,
                      std::vector<double>* loss_trace) {
  (void)seed;  // zero-initialized convex problem: already deterministic
  require(l2 >= 0.0 && std::isfinite(l2), "train: l2 must be nonnegative");
  std::vector<long> per_class(train.classes, 0);
  for (int z : train.labels) ++per_class[z];
  for (long c : per_class)
    require(c > 0, "train: every class needs at least one sample");

  ProbModel m;
  m.classes = train.classes;
  m.dim = train.dim;
  m.weights.assign(static_cast<std::size_t>(m.classes) * m.dim, 0.0);
  m.biases.assign(m.classes, 0.0);

  long n = train.size();
  // Softmax cross-entropy is 1/2-smooth in the scores, so the objective is
  // L-smooth with L <= 0.5 * mean(|x|^2 + 1) + l2 (the +1 covers the bias).
  double mean_sq = 0.0;
  for (long i = 0; i < n; ++i) {
    auto x = train.row(i);
    double s = 1.0;
    for (double v : x) s += v * v;
    mean_sq += s;
  }
  mean_sq /= static_cast<double>(n);
  double step = 1.0 / (0.5 * mean_sq + l2);

  std::vector<double> probs(m.classes);
  std::vector<double> grad_w(m.weights.size());
  std::vector<double> grad_b(m.classes);
  double prev = objective(m, train, l2, probs);
  if (loss_trace) loss_trace->push_back(prev);

  for (int iter = 0; iter < 10000; ++iter) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (long i = 0; i < n; ++i) {
      auto x = train.row(i);
      m.probabilities(x, probs);
      for (int c = 0; c < m.classes; ++c) {
        double g = probs[c] - (c == train.labels[i] ? 1.0 : 0.0);
        grad_b[c] += g;
        double* gw = grad_w.data() + static_cast<std::size_t>(c) * m.dim;
        for (int j = 0; j < m.dim; ++j) gw[j] += g * x[j];
      }
    }
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < m.weights.size(); ++k)
      m.weights[k] -= step * (grad_w[k] * inv_n + l2 * m.weights[k]);
    for (int c = 0; c < m.classes; ++c) m.biases[c] -= step * grad_b[c] * inv_n;

    double cur = objective(m, train, l2, probs);
    if (loss_trace) loss_trace->push_back(cur);
    if (std::abs(prev - cur) < 1e-8 * std::max(1.0, std::abs(prev))) break;
    prev = cur;
  }
  return m;
}

int abstain_predict(const ProbModel& m, std::span<const double> x, double p_a) {
  std::vector<double> probs(m.classes);
  m.probabilities(x, probs);
  int arg = 0;
  for (int c = 1; c < m.classes; ++c)
    if (probs[c] > probs[arg]) arg = c;
  if (probs[arg] < p_a) return kAbstainLabel;
  return arg;
}

std::vector<double> adversarial_perturb(const ProbModel& m,
                                        std::span<const double> x,
                                        int true_label, double xi) {
  require(xi >= 0.0 && std::isfinite(xi), "perturb: xi must be nonnegative");
  require(true_label >= 0 && true_label < m.classes, "perturb: bad label");
  std::vector<double> probs(m.classes);
  m.probabilities(x, probs);
  std::vector<double> out(x.begin(), x.end());
  for (int j = 0; j < m.dim; ++j) {
    // d CE / d x_j = sum_c (p_c - 1{c=z}) w_cj
    double g = 0.0;
    for (int c = 0; c < m.classes; ++c) {
      double coef = probs[c] - (c == true_label ? 1.0 : 0.0);
      g += coef * m.weights[static_cast<std::size_t>(c) * m.dim + j];
    }
    if (g > 0.0) out[j] += xi;
    else if (g < 0.0) out[j] -= xi;
  }
  return out;
}

namespace {

EmpiricalReport empirical_impl(const ProbModel& m, const Dataset& test,
                               double p_a, double xi, std::uint64_t seed,
                               bool parallel) {
  (void)seed;  // the single-step attack is deterministic
  check_model_dataset(m, test);
  require(p_a >= 0.0 && p_a <= 1.0, "empirical: p_a must be in [0,1]");
  require(xi >= 0.0 && std::isfinite(xi), "empirical: xi must be nonnegative");

  long n = test.size();
  long nom_err = 0, adv_err = 0, abstained = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(max_threads()) \
    if (parallel) reduction(+ : nom_err, adv_err, abstained)
#else
  (void)parallel;
#endif
  for (long i = 0; i < n; ++i) {
    int z = test.labels[i];
    auto x = test.row(i);
    int zhat = abstain_predict(m, x, p_a);
    if (zhat != z) ++nom_err;  // abstaining on a clean input counts as error
    if (zhat == kAbstainLabel) ++abstained;
    std::vector<double> xt = adversarial_perturb(m, x, z, xi);
    int ztil = abstain_predict(m, xt, p_a);
    if (ztil != z && ztil != kAbstainLabel) ++adv_err;
  }

  EmpiricalReport r;
  r.p_a = p_a;
  r.xi = xi;
  double dn = static_cast<double>(n);
  r.e_nom = nom_err / dn;
  r.e_adv = adv_err / dn;
  r.abstain_fraction = abstained / dn;
  return r;
}

}  // namespace

EmpiricalReport empirical_errors(const ProbModel& m, const Dataset& test,
                                 double p_a, double xi, std::uint64_t seed) {
  return empirical_impl(m, test, p_a, xi, seed, true);
}

EmpiricalReport empirical_errors_serial(const ProbModel& m, const Dataset& test,
                                        double p_a, double xi,
                                        std::uint64_t seed) {
  return empirical_impl(m, test, p_a, xi, seed, false);
}

std::vector<EmpiricalReport> sweep_pa(const ProbModel& m, const Dataset& test,
                                      const std::vector<double>& pa_grid,
                                      double xi, std::uint64_t seed) {
  if (!std::is_sorted(pa_grid.begin(), pa_grid.end()))
    throw std::invalid_argument("sweep_pa: grid must be sorted");
  std::vector<EmpiricalReport> out;
  out.reserve(pa_grid.size());
  for (double pa : pa_grid)
    out.push_back(empirical_errors(m, test, pa, xi, seed));
  return out;
}

std::pair<Dataset, Dataset> make_blob_benchmark(std::uint64_t seed) {
  constexpr int kClasses = 3;
  constexpr long kPerSplit = 2000;
  constexpr double kSigma = 0.6;
  const double mx[kClasses] = {0.0, -std::sqrt(3.0) / 2.0, std::sqrt(3.0) / 2.0};
  const double my[kClasses] = {1.0, -0.5, -0.5};
  Density1D normal = Density1D::gaussian(0.0, 1.0);

  auto make_split = [&](std::uint64_t stream) {
    Rng rng(derive_seed(seed, stream, 0));
    std::vector<double> feats;
    feats.reserve(2 * kPerSplit);
    std::vector<int> labels;
    labels.reserve(kPerSplit);
    for (long i = 0; i < kPerSplit; ++i) {
      int z = static_cast<int>(i % kClasses);
      labels.push_back(z);
      feats.push_back(mx[z] + kSigma * normal.draw(rng));
      feats.push_back(my[z] + kSigma * normal.draw(rng));
    }
    return Dataset(std::move(feats), std::move(labels), 2, kClasses);
  };
  return {make_split(0), make_split(1)};
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("dataset: empty file " + path);
  int dim = 0;
  {
    std::stringstream hdr(line);
    std::string col;
    bool first = true;
    while (std::getline(hdr, col, ',')) {
      if (first && col != "label")
        throw std::invalid_argument("dataset: header must start with label");
      if (!first) ++dim;
      first = false;
    }
  }
  if (dim < 1) throw std::invalid_argument("dataset: no feature columns");

  std::vector<double> feats;
  std::vector<int> labels;
  int max_label = 0;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int col = -1;
    while (std::getline(row, cell, ',')) {
      try {
        if (col == -1) {
          int z = std::stoi(cell);
          labels.push_back(z);
          max_label = std::max(max_label, z);
        } else {
          feats.push_back(std::stod(cell));
        }
      } catch (...) {
        throw std::invalid_argument("dataset: bad value at line " +
                                    std::to_string(line_no));
      }
      ++col;
    }
    if (col != dim)
      throw std::invalid_argument("dataset: wrong column count at line " +
                                  std::to_string(line_no));
  }
  return Dataset(std::move(feats), std::move(labels), dim, max_label + 1);
}

void save_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("dataset: cannot write " + path);
  out << "label";
  for (int j = 1; j <= ds.dim; ++j) out << ",f" << j;
  out << "\n";
  char buf[64];
  for (long i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    for (double v : ds.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
}

}  // namespace abstain
