#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = ABSTAIN_CLI_PATH;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "abstain_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  fs::path out = work_dir() / "stdout.txt";
  fs::path err = work_dir() / "stderr.txt";
  std::string cmd =
      kCli + " " + args + " > " + out.string() + " 2> " + err.string();
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string scenario_path() {
  static std::string path = [] {
    fs::path p = work_dir() / "example.toml";
    std::ofstream f(p);
    f << "schema = 1\n"
         "[f0]\nfamily = \"exponential\"\nrate = 1.5\n"
         "[f1]\nfamily = \"exponential\"\nrate = 0.5\n"
         "[f0_adv]\nfamily = \"exponential\"\nrate = 1.2\n"
         "[f1_adv]\nfamily = \"exponential\"\nrate = 0.7\n"
         "[priors]\np0 = 0.5\np1 = 0.5\n"
         "[classifier]\ny = [1.0986122886681098]\n";
    return p.string();
  }();
  return path;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

TEST_CASE("cli errors command prints the known error pair") {
  RunResult r = run_cli("errors --scenario " + scenario_path());
  REQUIRE(r.exit_code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "e_nom,e_adv,abstain_mass,method,stderr");
  auto cells = split_csv(rows[1]);
  REQUIRE(cells.size() == 5);
  CHECK(std::abs(std::stod(cells[0]) - 0.30754991027012474) <= 1e-5);
  CHECK(std::abs(std::stod(cells[1]) - 0.40205873190738689) <= 1e-5);
  CHECK(std::stod(cells[2]) == 0.0);
  CHECK(cells[3] == "closed_form");
  CHECK(cells[4].empty());  // no stderr for the closed form
}

TEST_CASE("cli json mode emits one parsable object per row") {
  RunResult r = run_cli("errors --json --scenario " + scenario_path());
  REQUIRE(r.exit_code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 1);
  auto obj = nlohmann::json::parse(rows[0]);
  CHECK(std::abs(obj.at("e_nom").get<double>() - 0.30754991027012474) <= 1e-9);
  CHECK(obj.at("method").get<std::string>() == "closed_form");
  CHECK(obj.at("stderr").is_null());

  RunResult d = run_cli("design --zeta 0.5 --json --scenario " + scenario_path());
  REQUIRE(d.exit_code == 0);
  auto drow = nlohmann::json::parse(lines_of(d.out)[0]);
  CHECK(std::abs(drow.at("e_adv").get<double>() - 0.228733940196) <= 1e-6);
  CHECK(drow.at("status").get<std::string>() == "converged");
  CHECK(drow.at("gamma_1_1").is_number());
}

TEST_CASE("cli design emits the reference solution in csv") {
  RunResult r = run_cli("design --zeta 0.5 --scenario " + scenario_path());
  REQUIRE(r.exit_code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "zeta,gamma_1_1,gamma_1_2,e_nom,e_adv,lambda,status");
  auto cells = split_csv(rows[1]);
  REQUIRE(cells.size() == 7);
  CHECK(std::stod(cells[0]) == 0.5);
  CHECK(std::abs(std::stod(cells[1]) - 0.533919602668) <= 1e-6);
  CHECK(std::abs(std::stod(cells[2]) - 0.595465769333) <= 1e-6);
  CHECK(std::abs(std::stod(cells[4]) - 0.228733940196) <= 1e-6);
  CHECK(cells[6] == "converged");
}

TEST_CASE("cli sweep covers the budget range and is reproducible") {
  std::string out1 = (work_dir() / "sweep1.csv").string();
  std::string out2 = (work_dir() / "sweep2.csv").string();
  RunResult r1 = run_cli("sweep --points 7 --scenario " + scenario_path() +
                         " --out " + out1);
  RunResult r2 = run_cli("sweep --points 7 --scenario " + scenario_path() +
                         " --out " + out2);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  std::ifstream f1(out1), f2(out2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());  // byte identical across runs
  auto rows = lines_of(s1.str());
  REQUIRE(rows.size() == 8);
  CHECK(rows[0] == "zeta,gamma_1_1,gamma_1_2,e_nom,e_adv,status");
  auto first = split_csv(rows[1]);
  auto last = split_csv(rows[7]);
  CHECK(std::abs(std::stod(first[4]) - 0.40205873190738689) <= 1e-6);
  CHECK(std::stod(last[0]) == 1.0);
  CHECK(std::stod(last[4]) <= 1e-9);
}

TEST_CASE("cli sweep accepts a single-point grid") {
  RunResult r = run_cli("sweep --points 1 --zeta-min 1 --zeta-max 1 --scenario " +
                        scenario_path());
  REQUIRE(r.exit_code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 2);
  auto cells = split_csv(rows[1]);
  CHECK(std::stod(cells[0]) == 1.0);
  CHECK(std::stod(cells[4]) <= 1e-9);
}

TEST_CASE("cli mc is seed-deterministic") {
  std::string base = "mc --samples 20000 --seed 11 --scenario " + scenario_path();
  RunResult a = run_cli(base);
  RunResult b = run_cli(base);
  RunResult c = run_cli("mc --samples 20000 --seed 12 --scenario " +
                        scenario_path());
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  auto cells = split_csv(lines_of(a.out)[1]);
  REQUIRE(cells.size() == 5);
  CHECK(cells[3] == "monte_carlo");
  CHECK(std::stod(cells[4]) > 0.0);
  CHECK(std::abs(std::stod(cells[0]) - 0.30754991027012474) <= 0.02);
}

TEST_CASE("cli empirical sweeps the threshold grid") {
  RunResult r = run_cli("empirical --pa-grid 0:1:0.25 --xi 0.2 --seed 4");
  REQUIRE(r.exit_code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "p_a,e_nom,e_adv,abstain_fraction,xi");
  auto first = split_csv(rows[1]);
  auto last = split_csv(rows[5]);
  CHECK(std::stod(first[0]) == 0.0);
  CHECK(std::stod(last[0]) == 1.0);
  CHECK(std::stod(last[3]) == 1.0);  // abstains everywhere at p_a = 1
  CHECK(std::stod(first[3]) == 0.0);
}

TEST_CASE("cli exit codes distinguish validation from parse errors") {
  CHECK(run_cli("errors --scenario /nonexistent.toml").exit_code == 2);
  CHECK(run_cli("bogus_subcommand").exit_code == 2);
  CHECK(run_cli("errors --no-such-flag --scenario " + scenario_path())
            .exit_code == 2);
  CHECK(run_cli("design --zeta 0.1 --scenario " + scenario_path()).exit_code ==
        2);  // infeasible budget
  CHECK(run_cli("design --zeta 0.5 --scenario " + scenario_path()).exit_code ==
        0);
  CHECK(run_cli("empirical --pa-grid 0:1:0.3").exit_code == 2);  // off-lattice
  CHECK(run_cli("--help").exit_code == 0);
  RunResult bad = run_cli("errors --scenario /nonexistent.toml");
  CHECK(!bad.err.empty());
  CHECK(bad.out.empty());
}

TEST_CASE("cli selfcheck passes") {
  RunResult r = run_cli("selfcheck");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("selfcheck OK") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}
