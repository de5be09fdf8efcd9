#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string g_binary;

struct RunResult {
  int exit_code;
  json report;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  fs::create_directories(dir);
  std::string cmd = g_binary + " " + args + " --out " + dir.string() + " --quiet";
  int rc = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WEXITSTATUS(rc);
  std::ifstream in(dir / "report.json");
  if (in) res.report = json::parse(in, nullptr, false);
  return res;
}

fs::path write_config(const fs::path& dir, const json& cfg) {
  fs::create_directories(dir);
  fs::path p = dir / "config.json";
  std::ofstream out(p);
  out << cfg.dump(2);
  return p;
}

fs::path tmp_dir(const std::string& name) {
  return fs::temp_directory_path() / ("holoq_cli_" + name);
}

}  // namespace

TEST_CASE("tripod-gates run reports beta1 near -pi with small discrepancy") {
  auto dir = tmp_dir("gates");
  json cfg = {{"kind", "tripod-gates"}, {"preset", "tripod-u1"}, {"alpha", 0.6},
              {"delta", 1.0},           {"kappa", 1.0},          {"theta0", M_PI / 2},
              {"phi_span", 2 * M_PI},   {"n_steps", 800}};
  auto res = run_cli("run " + write_config(dir, cfg).string(), dir);
  CHECK(res.exit_code == 0);
  REQUIRE(!res.report.is_discarded());
  double beta1 = res.report["results"]["beta1"].get<double>();
  CHECK(std::abs(beta1 + M_PI) < 1e-9);
  CHECK(res.report["results"]["discrepancy"].get<double>() < 1e-6);
}

TEST_CASE("decompose of an inline matrix") {
  auto dir = tmp_dir("decompose");
  json cfg = {{"kind", "decompose"},
              {"system",
               {{"matrix",
                 {{"rows", 2},
                  {"cols", 2},
                  {"data", {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {2.0, 0.0}}}}}}}};
  auto res = run_cli("run " + write_config(dir, cfg).string(), dir);
  CHECK(res.exit_code == 0);
  REQUIRE(!res.report.is_discarded());
  auto eigs = res.report["results"]["eigenvalues"];
  CHECK(eigs[0][0].get<double>() == 1.0);
  CHECK(eigs[1][0].get<double>() == 2.0);
}

TEST_CASE("evolve with growing T produces a decreasing gate-error column") {
  auto dir = tmp_dir("evolve");
  json cfg = {{"kind", "evolve"},      {"preset", "tripod-u2"}, {"alpha", 0.6},
              {"delta", 1.0},          {"kappa", 1.0},          {"theta0", M_PI / 3},
              {"phi_span", 2 * M_PI},  {"T_values", {30.0, 60.0, 120.0}},
              {"n_steps", 30000},      {"holonomy_steps", 400}};
  auto res = run_cli("run " + write_config(dir, cfg).string(), dir);
  CHECK(res.exit_code == 0);
  REQUIRE(!res.report.is_discarded());
  auto errs = res.report["results"]["gate_error"];
  REQUIRE(errs.size() == 3);
  CHECK(errs[0].get<double>() > errs[1].get<double>());
  CHECK(errs[1].get<double>() > errs[2].get<double>());
  CHECK(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("sweep over theta0 matches the closed form per row") {
  auto dir = tmp_dir("sweep");
  json cfg = {{"kind", "sweep"},
              {"axes", {{{"name", "theta0"}, {"values", {0.4, 0.9, 1.4}}}}},
              {"experiment",
               {{"kind", "tripod-gates"},
                {"preset", "tripod-u1"},
                {"alpha", 0.6},
                {"delta", 1.0},
                {"kappa", 1.0},
                {"phi_span", 2 * M_PI},
                {"n_steps", 300}}}};
  auto res = run_cli("run " + write_config(dir, cfg).string(), dir);
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir / "sweep.csv"));
  std::ifstream csv(dir / "sweep.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header.find("theta0") == 0);
  CHECK(header.find("beta1") != std::string::npos);
  int rows = 0;
  std::string line;
  int beta_col = -1, col = 0;
  {
    std::stringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      if (cell == "beta1") beta_col = col;
      ++col;
    }
  }
  std::vector<double> thetas = {0.4, 0.9, 1.4};
  while (std::getline(csv, line)) {
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    double beta1 = std::stod(cells[beta_col]);
    double expected = -2 * M_PI * std::pow(std::sin(thetas[rows] / 2), 2);
    CHECK(std::abs(beta1 - expected) < 1e-6);
    CHECK(cells.back() == "ok");
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("determinism: identical config gives bit-identical result scalars") {
  json cfg = {{"kind", "tripod-gates"}, {"preset", "tripod-u2"}, {"alpha", 0.55},
              {"delta", 1.0},           {"kappa", 1.3},          {"theta0", 0.8},
              {"phi_span", 2 * M_PI},   {"n_steps", 250}};
  auto dir_a = tmp_dir("det_a"), dir_b = tmp_dir("det_b");
  auto res_a = run_cli("run " + write_config(dir_a, cfg).string(), dir_a);
  auto res_b = run_cli("run " + write_config(dir_b, cfg).string(), dir_b);
  REQUIRE(res_a.exit_code == 0);
  REQUIRE(res_b.exit_code == 0);
  CHECK(res_a.report["results"].dump() == res_b.report["results"].dump());
  CHECK(res_a.report["matrices"].dump() == res_b.report["matrices"].dump());
}

TEST_CASE("config errors exit with code 2") {
  auto dir = tmp_dir("bad");
  json cfg = {{"kind", "no-such-kind"}};
  auto res = run_cli("run " + write_config(dir, cfg).string(), dir);
  CHECK(res.exit_code == 2);
  auto res2 = run_cli("run /nonexistent/config.json", dir);
  CHECK(res2.exit_code == 2);
}

TEST_CASE("verify subcommand writes a full report") {
  auto dir = tmp_dir("verify");
  auto res = run_cli("verify --filter bundles", dir);
  CHECK(res.exit_code == 0);
  REQUIRE(!res.report.is_discarded());
  CHECK(res.report["checks"].size() >= 4);
  for (const auto& c : res.report["checks"]) CHECK(c["pass"].get<bool>());
}


TEST_CASE("sweep with an empty axis yields a header-only CSV") {
  auto dir = tmp_dir("sweep_empty");
  json cfg = {{"kind", "sweep"},
              {"axes", {{{"name", "theta0"}, {"values", json::array()}}}},
              {"experiment",
               {{"kind", "tripod-gates"}, {"preset", "tripod-u1"}, {"n_steps", 100}}}};
  auto res = run_cli("run " + write_config(dir, cfg).string(), dir);
  CHECK(res.exit_code == 0);
  std::ifstream csv(dir / "sweep.csv");
  std::string header, extra_line;
  CHECK(std::getline(csv, header));
  CHECK(!std::getline(csv, extra_line));
}

TEST_CASE("dotted sweep axis reaches nested config keys") {
  auto dir = tmp_dir("sweep_alpha");
  json cfg = {{"kind", "sweep"},
              {"axes", {{{"name", "system.alpha"}, {"values", {0.2, 0.5, 0.8}}}}},
              {"experiment",
               {{"kind", "decompose"},
                {"system",
                 {{"preset", "tripod-u1"}, {"theta", 0.9}, {"phi", 1.3},
                  {"delta", 1.0}, {"kappa", 1.0}}}}}};
  auto res = run_cli("run " + write_config(dir, cfg).string(), dir);
  CHECK(res.exit_code == 0);
  std::ifstream csv(dir / "sweep.csv");
  std::string header;
  std::getline(csv, header);
  int res_col = -1, col = 0;
  {
    std::stringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      if (cell == "pseudo_hermiticity_residual") res_col = col;
      ++col;
    }
  }
  REQUIRE(res_col >= 0);
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) {
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    CHECK(std::stod(cells[res_col]) < 1e-10);
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("holonomy run honors steps_per_edge from a loop spec") {
  auto dir = tmp_dir("loopspec");
  json cfg = {{"kind", "holonomy"}, {"preset", "tripod-u2"}, {"alpha", 0.6},
              {"delta", 1.0},       {"kappa", 1.0},
              {"loop",
               {{"chart", "tripod-u2"},
                {"points",
                 {{0.0, 0.0},
                  {M_PI / 4, 0.0},
                  {M_PI / 4, 2 * M_PI},
                  {0.0, 2 * M_PI},
                  {0.0, 0.0}}},
                {"closed", true},
                {"steps_per_edge", 150}}}};
  auto res = run_cli("run " + write_config(dir, cfg).string(), dir);
  CHECK(res.exit_code == 0);
  REQUIRE(!res.report.is_discarded());
  double beta2 = res.report["results"]["beta2"].get<double>();
  CHECK(std::abs(beta2 - 2 * M_PI * (std::cos(M_PI / 4) - 1.0)) < 1e-9);
  CHECK(res.report["results"]["discrepancy"].get<double>() < 1e-6);
}

int main(int argc, char** argv) {
  doctest::Context ctx;
  // the holoq binary path arrives as the last argument (from ctest)
  if (argc > 1 && argv[argc - 1][0] != '-') {
    g_binary = argv[argc - 1];
    --argc;
  }
  ctx.applyCommandLine(argc, argv);
  return ctx.run();
}
