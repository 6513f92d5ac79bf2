// End-to-end tests of the command-line binary.  The path to the binary and a
// scratch directory come from the CLI_BIN / CLI_WORK environment variables.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "elpareto.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_bin() {
  const char* p = std::getenv("CLI_BIN");
  REQUIRE(p != nullptr);
  return p;
}

fs::path work_dir() {
  const char* p = std::getenv("CLI_WORK");
  REQUIRE(p != nullptr);
  fs::create_directories(p);
  return p;
}

// runs the CLI, returns the exit code; stderr lands in err_file
int run(const std::string& args, const fs::path& err_file) {
  const std::string cmd = cli_bin() + " " + args + " 2>" + err_file.string() + " >/dev/null";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// draws.csv-style file: header then numeric rows
std::vector<std::vector<double>> read_csv_rows(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        row.push_back(std::nan(""));  // id columns
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_fixture(const fs::path& dir) {
  // four sites on a unit square
  std::ofstream sites(dir / "sites.csv");
  sites << "id,x,y\ns1,0,0\ns2,1,0\ns3,0,1\ns4,1,1\n";
  sites.close();

  // raw "daily" data with Gumbel-like margins from extremal-t draws
  const double coords[8] = {0, 0, 1, 0, 0, 1, 1, 1};
  elp_model* m = nullptr;
  REQUIRE(elp_model_create(coords, 4, 2, 0.0, 1.0, 2.0, &m) == ELP_OK);
  const int n = 2000;
  std::vector<double> draws(n * 4);
  REQUIRE(elp_simulate_extremal_t(m, n, 2024, draws.data()) == ELP_OK);
  elp_model_free(m);

  std::ofstream data(dir / "data.csv");
  data << "date,site_id,value\n";
  char date[16];
  for (int i = 0; i < n; ++i) {
    std::snprintf(date, sizeof(date), "d%05d", i);
    for (int j = 0; j < 4; ++j) {
      data << date << ",s" << (j + 1) << ','
           << std::log(draws[i * 4 + j]) << '\n';
    }
  }
}

}  // namespace

TEST_CASE("fit produces fit.json, margins.csv and a theta curve") {
  const fs::path dir = work_dir() / "fit";
  fs::create_directories(dir);
  write_fixture(dir);

  const std::string common = "fit --sites " + (dir / "sites.csv").string() +
                             " --data " + (dir / "data.csv").string() +
                             " --max-evals 250 --seed 1 --out " + dir.string();
  REQUIRE(run(common, dir / "err.txt") == 0);
  const json fit = json::parse(slurp(dir / "fit.json"));
  CHECK(fit.at("likelihood") == "l2");
  CHECK(std::isfinite(fit.at("aic").get<double>()));
  CHECK(fit.at("psi").at("kappa").get<double>() >= 0.05);

  // margins: one line per site, 30+ exceedances each
  std::ifstream margins(dir / "margins.csv");
  std::string line;
  int lines = 0;
  while (std::getline(margins, line)) ++lines;
  CHECK(lines == 5);

  const auto curve = read_csv_rows(dir / "theta_curve.csv");
  CHECK(curve.size() == 100);
  for (const auto& row : curve) {
    CHECK(row[1] >= 1.0);
    CHECK(row[1] <= 2.0);
  }

  // pairwise estimator gives a different but valid fit
  const fs::path dir2 = dir / "pw";
  fs::create_directories(dir2);
  REQUIRE(run("fit --sites " + (dir / "sites.csv").string() + " --data " +
                  (dir / "data.csv").string() +
                  " --likelihood pairwise --max-evals 250 --seed 1 --out " +
                  dir2.string(),
              dir / "err.txt") == 0);
  const json fit2 = json::parse(slurp(dir2 / "fit.json"));
  CHECK(std::isfinite(fit2.at("aic").get<double>()));
  CHECK(fit2.at("nll") != fit.at("nll"));
}

TEST_CASE("missing sites file exits with code 2 naming the path") {
  const fs::path dir = work_dir();
  const int rc = run("fit --sites /nonexistent/sites.csv --data also_missing.csv",
                     dir / "err2.txt");
  CHECK(rc == 2);
  CHECK(slurp(dir / "err2.txt").find("/nonexistent/sites.csv") != std::string::npos);
}

TEST_CASE("simulate writes deterministic positive draws") {
  const fs::path dir = work_dir() / "sim";
  fs::create_directories(dir);
  std::ofstream sites(dir / "sites.csv");
  sites << "id,x,y\na,0,0\nb,0.5,0\n";
  sites.close();

  const std::string base = "simulate --sites " + (dir / "sites.csv").string() +
                           " --kind extremal-t --n 1000 --seed 5 --out ";
  REQUIRE(run(base + (dir / "a.csv").string(), dir / "err.txt") == 0);
  REQUIRE(run(base + (dir / "b.csv").string(), dir / "err.txt") == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  const auto rows = read_csv_rows(dir / "a.csv");
  REQUIRE(rows.size() == 1000);
  for (const auto& r : rows) {
    CHECK(r[0] > 0.0);
    CHECK(r[1] > 0.0);
  }

  // ell-Pareto draws satisfy the exceedance constraint
  REQUIRE(run("simulate --sites " + (dir / "sites.csv").string() +
                  " --kind pareto --ell max --u 2 --n 200 --seed 6 --out " +
                  (dir / "p.csv").string(),
              dir / "err.txt") == 0);
  for (const auto& r : read_csv_rows(dir / "p.csv")) {
    CHECK(std::max(r[0], r[1]) / 2.0 >= 1.0 - 1e-12);
  }

  REQUIRE(run("simulate --sites " + (dir / "sites.csv").string() +
                  " --kind bogus --out " + (dir / "x.csv").string(),
              dir / "err.txt") == 2);
}

TEST_CASE("conditional simulation writes draws and summaries") {
  const fs::path dir = work_dir() / "cond";
  fs::create_directories(dir);
  std::ofstream sites(dir / "sites.csv");
  sites << "id,x,y\na,0,0\nb,0.4,0\nc,0.8,0\n";
  sites.close();

  const std::string base = "conditional --sites " + (dir / "sites.csv").string() +
                           " --cond a=3.0 --seed 4 --out " + dir.string();
  REQUIRE(run(base + " --n 2000", dir / "err.txt") == 0);
  const auto band = read_csv_rows(dir / "summary.csv");
  REQUIRE(band.size() == 2);  // sites b and c

  // self-coverage: fresh draws with another seed fall in the 95% band ~95%
  REQUIRE(run("conditional --sites " + (dir / "sites.csv").string() +
                  " --cond a=3.0 --seed 99 --n 200 --out " + dir.string(),
              dir / "err.txt") == 0);
  const auto fresh = read_csv_rows(dir / "cond_draws.csv");
  int inside = 0, total = 0;
  for (const auto& r : fresh) {
    for (int j = 0; j < 2; ++j) {
      ++total;
      if (r[j] >= band[j][3] && r[j] <= band[j][5]) ++inside;
    }
  }
  const double cov = static_cast<double>(inside) / total;
  CHECK(cov > 0.90);
  CHECK(cov < 0.99);

  // n = 1: the summary is the draw itself
  REQUIRE(run(base + " --n 1", dir / "err.txt") == 0);
  const auto one = read_csv_rows(dir / "cond_draws.csv");
  const auto sum1 = read_csv_rows(dir / "summary.csv");
  for (int j = 0; j < 2; ++j) {
    CHECK(sum1[j][1] == one[0][j]);  // mean
    CHECK(sum1[j][4] == one[0][j]);  // median
  }

  // duplicate conditioning site is rejected before any simulation
  CHECK(run("conditional --sites " + (dir / "sites.csv").string() +
                " --cond a=3.0 --cond a=2.0 --out " + dir.string(),
            dir / "err.txt") == 2);
  CHECK(run("conditional --sites " + (dir / "sites.csv").string() +
                " --cond zz=3.0 --out " + dir.string(),
            dir / "err.txt") == 2);
}

TEST_CASE("study presets run and malformed input is a usage error") {
  const fs::path dir = work_dir() / "study";
  fs::create_directories(dir);
  REQUIRE(run("study --preset smoke --seed 3 --out " + dir.string(),
              dir / "err.txt") == 0);
  const json report = json::parse(slurp(dir / "study.json"));
  CHECK(report.at("kind") == "recovery");
  CHECK(report.at("cells").size() == 1);
  CHECK(slurp(dir / "study.csv").find("trace_x100") != std::string::npos);

  CHECK(run("study --preset bogus --out " + dir.string(), dir / "err.txt") == 2);
}
