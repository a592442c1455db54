#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cli.hpp"
#include "gpsearch/csv.hpp"
#include "gpsearch/errors.hpp"

using namespace gpsearch;
using std::numbers::pi;

namespace {

struct Result {
  int code;
  CsvTable table;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  Result r{code, {}, out.str(), err.str()};
  if (code == 0 && r.out.rfind("<svg", 0) != 0 && !r.out.empty()) {
    std::istringstream in(r.out);
    r.table = CsvTable::read(in);
  }
  return r;
}

std::size_t column(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  FAIL("missing column " << name);
  return 0;
}

double fit(const CsvTable& t, const std::string& name) {
  for (const auto& c : t.comments) {
    std::istringstream in(c);
    std::string tag, col, value;
    std::getline(in, tag, ',');
    std::getline(in, col, ',');
    std::getline(in, value, ',');
    if (col == name) return std::stod(value);
  }
  FAIL("missing fit " << name);
  return 0;
}

}  // namespace

TEST_CASE("argument parsing helpers") {
  CHECK(cli::parse_count("1024") == 1024);
  CHECK(cli::parse_count("2^40") == (std::int64_t{1} << 40));
  CHECK_THROWS_AS(cli::parse_count("3^4"), DomainError);
  CHECK_THROWS_AS(cli::parse_count("-5"), DomainError);
  CHECK(cli::parse_power_range("2^10:2^13") == std::vector<std::int64_t>{1024, 2048, 4096, 8192});
  CHECK(cli::parse_gamma("critical", 8).is_critical());
  CHECK(std::get<GammaPolicy::Constant>(cli::parse_gamma("const:1/N", 8).rule()).value == 0.125);
  CHECK(std::get<GammaPolicy::Constant>(cli::parse_gamma("const:0.5", 8).rule()).value == 0.5);
  CHECK_THROWS_AS(cli::parse_gamma("linear", 8), DomainError);
  CHECK_THROWS_AS(cli::parse_gamma("file:/nonexistent/schedule.csv", 8), DomainError);
}

TEST_CASE("simulate") {
  const auto r = call({"simulate", "--n", "1024", "--k", "1", "--g", "1", "--gamma", "critical",
                       "--t-end", "auto", "--compare-analytic"});
  REQUIRE(r.code == 0);
  const auto& rows = r.table.rows;
  const double ts = pi * 32 / (2 * std::sqrt(2.0));
  CHECK(rows.back()[0] == doctest::Approx(2 * ts));
  CHECK(std::abs(rows.back()[1] - 1.0 / 1024) < 1e-8);
  double worst = 0, peak = 0;
  for (const auto& row : rows) {
    worst = std::max(worst, std::abs(row[column(r.table, "residual")]));
    peak = std::max(peak, row[1]);
  }
  CHECK(worst < 1e-8);
  CHECK(peak > 0.999);

  const auto c = call({"simulate", "--n", "1024", "--g", "1", "--gamma", "const:0.0009765625"});
  REQUIRE(c.code == 0);
  double cmax = 0;
  for (const auto& row : c.table.rows) cmax = std::max(cmax, row[1]);
  CHECK(cmax < 0.5);

  const auto rep = call({"simulate", "--n", "1024", "--g", "-1.5", "--gamma", "critical"});
  REQUIRE(rep.code == 0);
  double rmax = 0;
  for (const auto& row : rep.table.rows) rmax = std::max(rmax, row[1]);
  CHECK(std::abs(rmax - 0.667) < 2e-3);

  const auto full = call({"simulate", "--n", "64", "--k", "2", "--G", "1", "--engine", "full",
                          "--marked", "5,9", "--samples", "50"});
  REQUIRE(full.code == 0);
  for (const auto& row : full.table.rows) CHECK(row[column(full.table, "leakage")] < 1e-9);

  const auto dec = call({"simulate", "--n", "64", "--G", "0.5", "--engine", "decoupled", "--samples", "50"});
  REQUIRE(dec.code == 0);
  CHECK(dec.table.rows.size() >= 51);
}

TEST_CASE("simulate writes files and charts") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto csv = dir / "gpsearch_cli_test.csv";
  const auto svg = dir / "gpsearch_cli_test.svg";
  REQUIRE(call({"simulate", "--n", "16", "--G", "1", "--samples", "10", "--out", csv.string()}).code == 0);
  std::ifstream in(csv);
  CHECK(CsvTable::read(in).rows.size() == 11);
  REQUIRE(call({"simulate", "--n", "16", "--G", "1", "--format", "svg", "--out", svg.string()}).code == 0);
  std::ifstream s(svg);
  std::string first;
  std::getline(s, first);
  CHECK(first.rfind("<svg", 0) == 0);
  CHECK_FALSE(std::filesystem::exists(csv.string() + ".tmp"));
  std::filesystem::remove(csv);
  std::filesystem::remove(svg);

  const auto sched = dir / "gpsearch_cli_schedule.csv";
  std::ofstream(sched) << "t,gamma\n0,0.05\n5,0.1\n";
  const auto r = call({"simulate", "--n", "16", "--G", "1", "--gamma", "file:" + sched.string(),
                       "--samples", "5"});
  REQUIRE(r.code == 0);
  CHECK(r.table.rows.front()[2] == doctest::Approx(0.05));
  std::filesystem::remove(sched);
}

TEST_CASE("analytic queries") {
  auto r = call({"analytic", "runtime", "--n", "1024", "--k", "1", "--G", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.table.rows[0][column(r.table, "t_star")] == doctest::Approx(pi / 2).epsilon(1e-14));

  r = call({"analytic", "width", "--n", "1024", "--k", "1", "--G", "0", "--eps", "0.1"});
  REQUIRE(r.code == 0);
  CHECK(std::abs(r.table.rows[0][column(r.table, "taylor_first_term")] / (2 * std::sqrt(102.4)) - 1) < 1e-3);
  CHECK(r.table.rows[0][column(r.table, "exact")] > 0);

  r = call({"analytic", "spectrum", "--n", "1024", "--G", "0", "--x", "0.0009765625",
            "--gamma-range", "0.0005:0.0015:200"});
  REQUIRE(r.code == 0);
  const auto gap = column(r.table, "gap");
  std::size_t best = 0;
  for (std::size_t i = 0; i < r.table.rows.size(); ++i)
    if (r.table.rows[i][gap] < r.table.rows[best][gap]) best = i;
  CHECK(std::abs(r.table.rows[best][0] - 1.0 / 1024) < 5e-6);
  CHECK(std::abs(r.table.rows[best][gap] - 0.0625) < 1e-4);

  r = call({"analytic", "x-of-t", "--n", "4", "--G", "1", "--t", "0.7853981633974483"});
  REQUIRE(r.code == 0);
  CHECK(r.table.rows[0][1] == doctest::Approx(0.4));
  r = call({"analytic", "x-of-t", "--n", "64", "--G", "1", "--t-range", "0:3:30"});
  CHECK(r.table.rows.size() == 31);
  r = call({"analytic", "t-of-x", "--n", "64", "--G", "1", "--x", "1"});
  CHECK(r.table.rows[0][1] == doctest::Approx(pi / 2));
}

TEST_CASE("sweep") {
  auto r = call({"sweep", "--n-range", "2^10:2^20", "--kappa", "0", "--fit"});
  REQUIRE(r.code == 0);
  CHECK(r.table.rows.size() == 11);
  CHECK(std::abs(fit(r.table, "delta_t") + 0.5) < 0.05);
  r = call({"sweep", "--n-range", "2^10:2^20", "--kappa", "-0.5", "--fit"});
  CHECK(std::abs(fit(r.table, "t_star") - 0.25) < 0.05);
  r = call({"sweep", "--n-range", "2^10:2^20", "--kappa", "-1", "--fit", "--workers", "3"});
  CHECK(std::abs(fit(r.table, "t_star") - 0.5) < 0.05);
  r = call({"sweep", "--n", "1024,2^12", "--G", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.table.rows[1][0] == 4096);
  CHECK(r.table.rows[1][column(r.table, "t_star")] == doctest::Approx(pi / 2));
  CHECK(call({"sweep", "--n", "1024"}).code == 2);
}

TEST_CASE("resources") {
  auto r = call({"resources", "--n", "1024", "--kappa", "0", "--zalka"});
  REQUIRE(r.code == 0);
  CHECK(r.table.rows[0][column(r.table, "zalka_bound")] > 1.0);
  r = call({"resources", "--n", "2^20", "--optimize", "--simplex"});
  REQUIRE(r.code == 0);
  const double k = r.table.rows[0][column(r.table, "kappa")];
  CHECK(k >= -1.0);
  CHECK(k <= 0.0);
  CHECK(r.table.rows[0][column(r.table, "log_simplex_volume")] < 0);
  CHECK(call({"resources", "--n", "1024"}).code == 2);
}

TEST_CASE("verify and exit codes") {
  auto r = call({"verify", "--n", "1024", "--g", "1"});
  CHECK(r.code == 0);
  for (double v : r.table.rows.at(0)) CHECK(v < 1e-5);
  r = call({"verify", "--n", "1024", "--g", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.table.rows[0][column(r.table, "max_rescaled_time_residual")] < 1e-8);
  CHECK(call({"verify", "--n", "1024", "--g", "1", "--samples", "3"}).code == 2);
  CHECK(call({"verify", "--n", "1024", "--g", "1", "--tol", "1e-12"}).code == 1);

  CHECK(call({}).code == 2);
  CHECK(call({"simulate", "--n", "64", "--g", "1", "--G", "1"}).code == 2);
  CHECK(call({"simulate", "--n", "1", "--g", "1"}).code == 2);
  CHECK(call({"simulate", "--n", "64", "--format", "png"}).code == 2);
  CHECK(call({"simulate", "--n", "64", "--G", "1", "--rtol", "1e-14", "--atol", "1e-300",
              "--t-end", "1e9"}).code == 3);
  std::ostringstream out, err;
  CHECK(cli::run({"--help"}, out, err) == 0);
  CHECK(out.str().find("simulate") != std::string::npos);
}
