// Command-line front end: scenario files in, CSV (or JSON lines) out.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "abstain/classifier.hpp"
#include "abstain/common.hpp"
#include "abstain/density.hpp"
#include "abstain/design.hpp"
#include "abstain/empirical.hpp"
#include "abstain/risk.hpp"
#include "abstain/scenario_io.hpp"

namespace {

using abstain::Classifier1D;
using abstain::Scenario;
using nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Writes CSV rows or one JSON object per line, to stdout or a file.
class Output {
 public:
  Output(const std::string& path, bool json) : json_(json) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot open output file: " + path);
    }
  }

  void header(std::vector<std::string> cols) {
    cols_ = std::move(cols);
    if (json_) return;
    std::string line;
    for (std::size_t i = 0; i < cols_.size(); ++i) {
      if (i) line += ',';
      line += cols_[i];
    }
    stream() << line << "\n";
  }

  // One value per column; monostate-like empty optional renders as an empty
  // CSV cell / JSON null.
  struct Cell {
    enum Kind { kNum, kText, kEmpty } kind = kEmpty;
    double num = 0.0;
    std::string text;
    Cell() = default;
    Cell(double v) : kind(kNum), num(v) {}
    Cell(const std::string& s) : kind(kText), text(s) {}
    Cell(const char* s) : kind(kText), text(s) {}
  };

  void row(const std::vector<Cell>& cells) {
    if (json_) {
      ordered_json obj;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        switch (cells[i].kind) {
          case Cell::kNum: obj[cols_[i]] = cells[i].num; break;
          case Cell::kText: obj[cols_[i]] = cells[i].text; break;
          case Cell::kEmpty: obj[cols_[i]] = nullptr; break;
        }
      }
      stream() << obj.dump() << "\n";
      return;
    }
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      switch (cells[i].kind) {
        case Cell::kNum: line += fmt(cells[i].num); break;
        case Cell::kText: line += cells[i].text; break;
        case Cell::kEmpty: break;
      }
    }
    stream() << line << "\n";
  }

 private:
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  bool json_;
  std::ofstream file_;
  std::vector<std::string> cols_;
};

std::vector<std::string> gamma_columns(std::size_t n_boundaries) {
  std::vector<std::string> cols;
  for (std::size_t i = 1; i <= n_boundaries; ++i) {
    cols.push_back("gamma_" + std::to_string(i) + "_1");
    cols.push_back("gamma_" + std::to_string(i) + "_2");
  }
  return cols;
}

std::vector<double> parse_grid(const std::string& spec) {
  // "A:B:STEP" inclusive of both ends (B must sit on the step lattice).
  double a, b, step;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3)
    throw std::invalid_argument("grid must be min:max:step, got '" + spec + "'");
  if (!(step > 0.0) || b < a)
    throw std::invalid_argument("grid needs max >= min and step > 0");
  long k = std::lround((b - a) / step);
  if (std::abs(a + k * step - b) > 1e-9)
    throw std::invalid_argument("grid span is not a multiple of step");
  std::vector<double> out;
  for (long i = 0; i <= k; ++i) out.push_back(i == k ? b : a + i * step);
  return out;
}

void emit_error_report(Output& out, const abstain::ErrorReport& r) {
  out.header({"e_nom", "e_adv", "abstain_mass", "method", "stderr"});
  Output::Cell se;
  if (r.se_e_nom || r.se_e_adv) se = Output::Cell(r.std_error());
  out.row({r.e_nom, r.e_adv, r.abstain_mass_nominal, to_string(r.method), se});
}

int cmd_errors(const std::string& scenario_path, const std::string& out_path,
               bool json) {
  abstain::ScenarioConfig cfg = abstain::load_scenario(scenario_path);
  abstain::ErrorReport r =
      abstain::evaluate_errors(cfg.scenario, cfg.classifier());
  Output out(out_path, json);
  emit_error_report(out, r);
  return 0;
}

int cmd_design(const std::string& scenario_path, double zeta,
               const std::string& out_path, bool json) {
  abstain::ScenarioConfig cfg = abstain::load_scenario(scenario_path);
  abstain::DesignSolution sol =
      abstain::solve_design({cfg.scenario, cfg.y, zeta});
  Output out(out_path, json);
  std::vector<std::string> cols = {"zeta"};
  for (auto& c : gamma_columns(cfg.y.size())) cols.push_back(c);
  for (auto& c : {"e_nom", "e_adv", "lambda", "status"}) cols.push_back(c);
  out.header(cols);
  std::vector<Output::Cell> cells = {zeta};
  for (double g : sol.gamma) cells.push_back(g);
  cells.push_back(sol.e_nom);
  cells.push_back(sol.e_adv);
  cells.push_back(sol.lambda);
  cells.push_back(to_string(sol.status));
  out.row(cells);
  return 0;
}

int cmd_sweep(const std::string& scenario_path, std::optional<double> zeta_min,
              std::optional<double> zeta_max, int points,
              const std::string& out_path, bool json) {
  abstain::ScenarioConfig cfg = abstain::load_scenario(scenario_path);
  std::vector<double> zeros(2 * cfg.y.size(), 0.0);
  double lo = zeta_min.value_or(
      abstain::nominal_error(cfg.scenario, Classifier1D(cfg.y, zeros)));
  double hi = zeta_max.value_or(1.0);
  if (points < 1) throw std::invalid_argument("sweep: need --points >= 1");
  if (hi < lo) throw std::invalid_argument("sweep: zeta-max below zeta-min");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);

  std::vector<abstain::SweepRow> rows =
      abstain::sweep_tradeoff(cfg.scenario, cfg.y, grid);

  Output out(out_path, json);
  std::vector<std::string> cols = {"zeta"};
  for (auto& c : gamma_columns(cfg.y.size())) cols.push_back(c);
  for (auto& c : {"e_nom", "e_adv", "status"}) cols.push_back(c);
  out.header(cols);
  for (const abstain::SweepRow& row : rows) {
    std::vector<Output::Cell> cells = {row.zeta};
    if (row.ok) {
      for (double g : row.solution.gamma) cells.push_back(g);
      cells.push_back(row.solution.e_nom);
      cells.push_back(row.solution.e_adv);
      cells.push_back(to_string(row.solution.status));
    } else {
      for (std::size_t i = 0; i < 2 * cfg.y.size() + 2; ++i)
        cells.push_back(Output::Cell());
      cells.push_back(std::string("failed: ") + row.message);
    }
    out.row(cells);
  }
  return 0;
}

int cmd_mc(const std::string& scenario_path, long samples, std::uint64_t seed,
           const std::string& out_path, bool json) {
  abstain::ScenarioConfig cfg = abstain::load_scenario(scenario_path);
  abstain::SampledScenario s = abstain::sampled_from(cfg.scenario);
  abstain::RegionSpecD region = abstain::region_from_classifier(cfg.classifier());
  abstain::ErrorReport r = abstain::mc_errors(s, region, samples, seed);
  Output out(out_path, json);
  emit_error_report(out, r);
  return 0;
}

int cmd_empirical(const std::string& train_path, const std::string& test_path,
                  double l2, double xi, const std::string& pa_grid_spec,
                  std::uint64_t seed, const std::string& export_prefix,
                  const std::string& out_path, bool json) {
  std::vector<double> grid = parse_grid(pa_grid_spec);
  for (double v : grid)
    if (v < 0.0 || v > 1.0)
      throw std::invalid_argument("pa grid values must lie in [0,1]");

  abstain::Dataset train, test;
  if (!train_path.empty() || !test_path.empty()) {
    if (train_path.empty() || test_path.empty())
      throw std::invalid_argument("--train and --test must be given together");
    train = abstain::load_dataset_csv(train_path);
    test = abstain::load_dataset_csv(test_path);
  } else {
    auto [tr, te] = abstain::make_blob_benchmark(seed);
    train = std::move(tr);
    test = std::move(te);
  }
  if (!export_prefix.empty()) {
    abstain::save_dataset_csv(export_prefix + "_train.csv", train);
    abstain::save_dataset_csv(export_prefix + "_test.csv", test);
  }

  abstain::ProbModel model = abstain::train_model(train, l2, seed);
  std::vector<abstain::EmpiricalReport> reports =
      abstain::sweep_pa(model, test, grid, xi, seed);

  Output out(out_path, json);
  out.header({"p_a", "e_nom", "e_adv", "abstain_fraction", "xi"});
  for (const abstain::EmpiricalReport& r : reports)
    out.row({r.p_a, r.e_nom, r.e_adv, r.abstain_fraction, r.xi});
  return 0;
}

Scenario example_scenario() {
  using abstain::Density1D;
  return Scenario(Density1D::exponential(1.5), Density1D::exponential(0.5),
                  Density1D::exponential(1.2), Density1D::exponential(0.7), 0.5,
                  0.5);
}

int cmd_selfcheck() {
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "PASS " : "FAIL ") << what << "\n";
    if (!ok) ++failures;
  };

  Scenario s = example_scenario();
  double y1 = std::log(3.0);
  Classifier1D empty({y1}, {0.0, 0.0});

  double e0 = abstain::nominal_error(s, empty);
  double a0 = abstain::adversarial_error(s, empty);
  check(std::abs(e0 - 0.307549910270124745) <= 1e-9,
        "no-abstain nominal error = 0.30755 (" + fmt(e0) + ")");
  check(std::abs(a0 - 0.402058731907386890) <= 1e-9,
        "no-abstain adversarial error = 0.40206 (" + fmt(a0) + ")");

  abstain::DesignProblem prob{s, {y1}, 0.5};
  abstain::DesignSolution sol = abstain::solve_design(prob);
  check(sol.status == abstain::SolveStatus::Converged &&
            sol.constraint_residual <= 1e-7 &&
            sol.stationarity_residual <= 1e-7 && sol.lambda > 0.0,
        "budget 0.5 design satisfies first-order conditions");
  auto [r1, r2] =
      abstain::exponential_kkt_residuals(prob, sol.gamma[0], sol.gamma[1]);
  check(std::abs(r1) <= 1e-7 && std::abs(r2) <= 1e-7,
        "closed-form exponential residuals vanish (" + fmt(r1) + ", " +
            fmt(r2) + ")");
  abstain::DesignSolution grid = abstain::grid_search_design(prob, 200);
  check(sol.e_adv <= grid.e_adv + 1e-4,
        "solver at least matches the grid oracle (" + fmt(sol.e_adv) + " vs " +
            fmt(grid.e_adv) + ")");

  std::vector<double> zg = {e0, 0.4, 0.6, 0.8, 1.0};
  auto rows = abstain::sweep_tradeoff(s, {y1}, zg);
  bool ends_ok = rows.front().ok && rows.back().ok &&
                 std::abs(rows.front().solution.e_adv - a0) <= 1e-6 &&
                 rows.back().solution.e_adv <= 1e-6;
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    monotone = monotone &&
               rows[i].solution.e_adv <= rows[i - 1].solution.e_adv + 1e-9;
  check(ends_ok && monotone, "tradeoff sweep endpoints and monotonicity");

  abstain::ErrorReport mc = abstain::mc_errors(
      abstain::sampled_from(s), abstain::region_from_classifier(empty),
      1000000, 7);
  check(std::abs(mc.e_nom - e0) <= 4.0 * mc.se_e_nom.value() &&
            std::abs(mc.e_adv - a0) <= 4.0 * mc.se_e_adv.value(),
        "Monte Carlo estimate agrees with the closed form");

  std::cout << (failures == 0 ? "selfcheck OK" : "selfcheck FAILED") << "\n";
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abstain-region evaluation and design for binary classifiers"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, train_path, test_path, export_prefix;
  std::string pa_grid_spec = "0:1:0.05";
  bool json = false;
  double zeta = 0.5, l2 = 1e-3, xi = 0.3;
  std::optional<double> zeta_min, zeta_max;
  int points = 50;
  long samples = 1000000;
  std::uint64_t seed = 1234;

  auto add_common = [&](CLI::App* sub, bool needs_scenario) {
    if (needs_scenario)
      sub->add_option("--scenario", scenario_path, "scenario TOML file")
          ->required();
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_flag("--json", json, "one JSON object per row instead of CSV");
  };

  CLI::App* c_errors = app.add_subcommand(
      "errors", "evaluate nominal/adversarial error for the classifier");
  add_common(c_errors, true);

  CLI::App* c_design =
      app.add_subcommand("design", "optimal abstain region for one budget");
  add_common(c_design, true);
  c_design->add_option("--zeta", zeta, "nominal error budget")->required();

  CLI::App* c_sweep =
      app.add_subcommand("sweep", "tradeoff curve over a budget grid");
  add_common(c_sweep, true);
  c_sweep->add_option("--zeta-min", zeta_min,
                      "lowest budget (default: no-abstain nominal error)");
  c_sweep->add_option("--zeta-max", zeta_max, "highest budget (default 1)");
  c_sweep->add_option("--points", points, "grid size (default 50)");

  CLI::App* c_mc =
      app.add_subcommand("mc", "Monte Carlo error estimate for the classifier");
  add_common(c_mc, true);
  c_mc->add_option("--samples", samples, "draws per class per distribution")
      ->required();
  c_mc->add_option("--seed", seed, "RNG seed");

  CLI::App* c_emp = app.add_subcommand(
      "empirical", "threshold sweep on a trained probabilistic classifier");
  add_common(c_emp, false);
  c_emp->add_option("--l2", l2, "weight penalty (default 1e-3)");
  c_emp->add_option("--xi", xi, "perturbation bound (default 0.3)");
  c_emp->add_option("--pa-grid", pa_grid_spec,
                    "threshold grid min:max:step (default 0:1:0.05)");
  c_emp->add_option("--seed", seed, "benchmark/run seed");
  c_emp->add_option("--train", train_path, "training CSV (default: built-in benchmark)");
  c_emp->add_option("--test", test_path, "test CSV");
  c_emp->add_option("--export-benchmark", export_prefix,
                    "write the datasets used to PREFIX_train.csv/_test.csv");

  CLI::App* c_self = app.add_subcommand(
      "selfcheck", "end-to-end reproduction of the exponential example");
  (void)c_self;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help exits 0, bad flags exit 2
  }

  try {
    if (app.got_subcommand(c_errors))
      return cmd_errors(scenario_path, out_path, json);
    if (app.got_subcommand(c_design))
      return cmd_design(scenario_path, zeta, out_path, json);
    if (app.got_subcommand(c_sweep))
      return cmd_sweep(scenario_path, zeta_min, zeta_max, points, out_path,
                       json);
    if (app.got_subcommand(c_mc))
      return cmd_mc(scenario_path, samples, seed, out_path, json);
    if (app.got_subcommand(c_emp))
      return cmd_empirical(train_path, test_path, l2, xi, pa_grid_spec, seed,
                           export_prefix, out_path, json);
    return cmd_selfcheck();
  } catch (const abstain::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
