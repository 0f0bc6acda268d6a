#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ftnls/cli.hpp"

using namespace ftnls;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ftnls_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else
      cur += c;
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split(line, ','));
  }
  return rows;
}

}  // namespace

TEST_CASE("bifurcation table: schema, header comment, threshold transitions", "[cli]") {
  cli::RunConfig cfg;
  cfg.command = cli::Command::Bifurcation;
  cfg.tau = 2.0;
  cfg.v = 1.0;
  cfg.mu = 1.0;
  cfg.omega_min = 0.01;
  cfg.omega_max = 2.0;
  cfg.omega_steps = 200;
  cfg.output = temp_file("bif.csv").string();
  REQUIRE(cli::run(cfg) == 0);

  const std::string text = slurp(cfg.output);
  REQUIRE(text.rfind("# ftnls " + std::string(version) + " | bifurcation", 0) == 0);

  const auto rows = read_csv(cfg.output);
  REQUIRE(rows.size() == 201);  // header + 200 data rows
  REQUIRE(rows[0] == std::vector<std::string>{
                         "omega", "count", "T_tilde_minus", "T_tilde_plus", "x_tilde_minus", "x_tilde_plus",
                         "T_hat_minus", "T_hat_plus", "x_hat_minus", "x_hat_plus", "mass_tilde", "mass_hat",
                         "s_reduced_tilde", "s_reduced_hat"});
  int prev_count = 0;
  for (size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 14);
    const double omega = std::stod(rows[i][0]);
    const int count = std::stoi(rows[i][1]);
    const int expect = omega <= 0.04 ? 0 : (omega <= 1.0 / 9.0 ? 1 : 2);
    REQUIRE(count == expect);
    REQUIRE(count >= prev_count);
    prev_count = count;
    REQUIRE(rows[i][2].empty() == (count == 0));   // tilde cells
    REQUIRE(rows[i][6].empty() == (count < 2));    // hat cells
    REQUIRE(rows[i][11].empty() == (count < 2));   // mass_hat
  }
}

TEST_CASE("mass-curve table reproduces the non-monotone supercritical shape", "[cli]") {
  cli::RunConfig cfg;
  cfg.command = cli::Command::MassCurve;
  cfg.tau = 2.0;
  cfg.v = 1.0;
  cfg.mu = 3.0;
  cfg.omega_min = 0.05;
  cfg.omega_max = 20.0;
  cfg.omega_steps = 200;
  cfg.log_omega = true;
  cfg.output = temp_file("mass.csv").string();
  REQUIRE(cli::run(cfg) == 0);
  const auto rows = read_csv(cfg.output);
  REQUIRE(rows[0] == std::vector<std::string>{"omega", "mass", "dmass_domega", "phi", "verdict"});
  int sign_changes = 0;
  bool saw_stable = false, saw_unstable = false;
  double dprev = 0;
  for (size_t i = 2; i < rows.size(); ++i) {
    const double m0 = std::stod(rows[i - 1][1]), m1 = std::stod(rows[i][1]);
    const double d = m1 - m0;
    if (i > 2 && ((dprev > 0 && d < 0) || (dprev < 0 && d > 0))) ++sign_changes;
    dprev = d;
    saw_stable |= rows[i][4] == "Stable";
    saw_unstable |= rows[i][4] == "Unstable";
  }
  REQUIRE(sign_changes == 1);
  REQUIRE(saw_stable);
  REQUIRE(saw_unstable);
}

TEST_CASE("stationary below the threshold exits 3 and reports both thresholds", "[cli]") {
  cli::RunConfig cfg;
  cfg.command = cli::Command::Stationary;
  cfg.tau = 2.0;
  cfg.v = 1.0;
  cfg.mu = 1.0;
  cfg.omega = 0.02;
  cfg.output = temp_file("stat_low.csv").string();
  REQUIRE(cli::run(cfg) == 3);
}

TEST_CASE("invalid parameters exit 2", "[cli]") {
  cli::RunConfig cfg;
  cfg.command = cli::Command::Stationary;
  cfg.tau = 1.0;  // rejected
  cfg.omega = 1.0;
  cfg.output = temp_file("bad.csv").string();
  REQUIRE(cli::run(cfg) == 2);

  cli::RunConfig no_out;
  no_out.command = cli::Command::Bifurcation;
  no_out.output.clear();
  REQUIRE(cli::run(no_out) == 2);
}

TEST_CASE("stationary profile table carries both branches above omega**", "[cli]") {
  cli::RunConfig cfg;
  cfg.command = cli::Command::Stationary;
  cfg.tau = 2.0;
  cfg.v = 1.0;
  cfg.mu = 1.0;
  cfg.omega = 1.0;
  cfg.grid_N = 400;
  cfg.output = temp_file("stat.csv").string();
  REQUIRE(cli::run(cfg) == 0);
  const auto rows = read_csv(cfg.output);
  REQUIRE(rows[0] == std::vector<std::string>{"x", "u_tilde", "u_hat"});
  REQUIRE(rows.size() == 2 * (400 + 1) + 1);
  // the origin appears twice, once per side
  int zeros = 0;
  for (size_t i = 1; i < rows.size(); ++i)
    if (std::stod(rows[i][0]) == 0.0) ++zeros;
  REQUIRE(zeros == 2);
}

TEST_CASE("evolve output is deterministic and 17-digit round-trip exact", "[cli]") {
  auto run_once = [&](const std::string& name) {
    cli::RunConfig cfg;
    cfg.command = cli::Command::Evolve;
    cfg.tau = 2.0;
    cfg.v = 1.0;
    cfg.mu = 1.0;
    cfg.omega = 1.0;
    cfg.grid_N = 600;
    cfg.grid_L = 40.0;
    cfg.dt = 1e-2;
    cfg.t_final = 0.2;
    cfg.snapshot_stride = 5;
    cfg.perturb = 0.01;
    cfg.seed = 42;
    cfg.output = temp_file(name).string();
    REQUIRE(cli::run(cfg) == 0);
    return slurp(cfg.output);
  };
  const std::string a = run_once("traj_a.csv");
  const std::string b = run_once("traj_b.csv");
  REQUIRE(a == b);

  const auto rows = read_csv(temp_file("traj_a.csv"));
  REQUIRE(rows[0] == std::vector<std::string>{"t", "mass_drift", "energy_drift", "orbital_distance"});
  for (size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][0]);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", t);
    REQUIRE(std::string(buf) == rows[i][0]);  // printed at round-trip precision
  }
}

TEST_CASE("spectral table lists both operators", "[cli]") {
  cli::RunConfig cfg;
  cfg.command = cli::Command::Spectral;
  cfg.tau = 2.0;
  cfg.v = 1.0;
  cfg.mu = 1.0;
  cfg.omega = 1.0;
  cfg.grid_N = 1200;
  cfg.output = temp_file("spectral_table.csv").string();
  REQUIRE(cli::run(cfg) == 0);
  const auto rows = read_csv(cfg.output);
  REQUIRE(rows[0] == std::vector<std::string>{"operator", "index", "eigenvalue"});
  bool l1 = false, l2 = false;
  for (size_t i = 1; i < rows.size(); ++i) {
    l1 |= rows[i][0] == "L1";
    l2 |= rows[i][0] == "L2";
  }
  REQUIRE(l1);
  REQUIRE(l2);
}

TEST_CASE("ground-state report in json format", "[cli]") {
  cli::RunConfig cfg;
  cfg.command = cli::Command::GroundState;
  cfg.tau = 2.0;
  cfg.v = 1.0;
  cfg.mu = 1.0;
  cfg.omega = 1.0;
  cfg.format = "json";
  cfg.output = temp_file("gs.json").string();
  REQUIRE(cli::run(cfg) == 0);
  const auto doc = nlohmann::json::parse(slurp(cfg.output));
  REQUIRE(doc["artifact"] == "ftnls");
  REQUIRE(doc["version"] == std::string(version));
  bool found = false;
  for (const auto& row : doc["rows"]) {
    if (row[0] == "winner") {
      REQUIRE(row[1] == "tilde");
      found = true;
    }
  }
  REQUIRE(found);
}

TEST_CASE("the installed binary runs end to end", "[cli]") {
  const fs::path out = temp_file("bin_bif.csv");
  std::ostringstream cmd;
  cmd << FTNLS_CLI_PATH << " bifurcation --tau 2 --v 1 --mu 1 --omega-min 0.02 --omega-max 0.2"
      << " --omega-steps 10 --output " << out << " 2>/dev/null";
  REQUIRE(std::system(cmd.str().c_str()) == 0);
  const auto rows = read_csv(out);
  REQUIRE(rows.size() == 11);

  // below-threshold stationary run exits with code 3
  std::ostringstream bad;
  bad << FTNLS_CLI_PATH << " stationary --tau 2 --v 1 --mu 1 --omega 0.02 --output " << temp_file("x.csv")
      << " 2>/dev/null";
  const int rc = std::system(bad.str().c_str());
  REQUIRE(WIFEXITED(rc));
  REQUIRE(WEXITSTATUS(rc) == 3);
}

TEST_CASE("the thread-cap environment variable leaves output unchanged", "[cli]") {
  auto run_with = [&](const char* env, const std::string& name) {
    if (env)
      setenv("NEHARI_FT_THREADS", env, 1);
    else
      unsetenv("NEHARI_FT_THREADS");
    cli::RunConfig cfg;
    cfg.command = cli::Command::Bifurcation;
    cfg.tau = 2.0;
    cfg.v = 1.0;
    cfg.mu = 1.0;
    cfg.omega_min = 0.02;
    cfg.omega_max = 1.5;
    cfg.omega_steps = 48;
    cfg.threads = 0;
    cfg.output = temp_file(name).string();
    REQUIRE(cli::run(cfg) == 0);
    return slurp(cfg.output);
  };
  const std::string capped = run_with("1", "thr1.csv");
  const std::string wide = run_with("16", "thr16.csv");
  unsetenv("NEHARI_FT_THREADS");
  REQUIRE(capped == wide);
}

TEST_CASE("config files provide defaults and flags win", "[cli]") {
  const fs::path conf = temp_file("run.conf");
  {
    std::ofstream c(conf);
    c << "tau = 2\nv = 1\nmu = 1\nomega-min = 0.02\nomega-max = 0.2\nomega-steps = 5\n";
  }
  const fs::path out1 = temp_file("conf1.csv"), out2 = temp_file("conf2.csv");
  std::ostringstream c1;
  c1 << FTNLS_CLI_PATH << " bifurcation --config " << conf << " --output " << out1 << " 2>/dev/null";
  REQUIRE(std::system(c1.str().c_str()) == 0);
  REQUIRE(read_csv(out1).size() == 6);

  std::ostringstream c2;
  c2 << FTNLS_CLI_PATH << " bifurcation --config " << conf << " --omega-steps 9 --output " << out2
     << " 2>/dev/null";
  REQUIRE(std::system(c2.str().c_str()) == 0);
  REQUIRE(read_csv(out2).size() == 10);  // the flag overrides the file
}
