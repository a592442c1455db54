#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gpsearch/analytic.hpp"
#include "gpsearch/errors.hpp"
#include "gpsearch/resources.hpp"
#include "oracles.hpp"

using namespace gpsearch;

namespace {

std::vector<double> powers(int lo, int hi) {
  std::vector<double> n;
  for (int a = lo; a <= hi; ++a) n.push_back(std::ldexp(1.0, a));
  return n;
}

template <class F>
double slope(const std::vector<double>& ns, F&& f) {
  std::vector<double> y;
  for (double n : ns) y.push_back(f(static_cast<std::int64_t>(n)));
  return oracle::loglog_slope(ns, y);
}

}  // namespace

TEST_CASE("marked count") {
  CHECK(marked_count(1024, 0.0) == 1);
  CHECK(marked_count(1024, 0.5) == 32);
  CHECK(marked_count(1024, 1.0) == 1023);
  CHECK(marked_count(1000, 0.5) == 32);
}

TEST_CASE("profile arithmetic") {
  const auto r = resource_profile(1 << 16, 0.0, -0.5, 0.1, 1.0);
  const auto p = make_params(1 << 16, 1, Coefficient::rescaled(1.0 / 256));
  CHECK(r.k == 1);
  CHECK(r.G == doctest::Approx(1.0 / 256));
  CHECK(r.t_star == doctest::Approx(runtime(p)));
  CHECK(r.delta_t == doctest::Approx(peak_width(p).exact));
  CHECK(r.n_clock == static_cast<std::int64_t>(std::ceil(1.0 / r.delta_t)));
  CHECK(r.qubits == 16.0);
  CHECK(r.space == doctest::Approx(r.n_clock + 16.0));
  CHECK(r.st_product == doctest::Approx(r.space * r.t_star));
  CHECK(resource_profile(1 << 16, 0.0, -0.5, 0.1, 3.0).n_clock >= r.n_clock);

  const auto at = resource_profile_at(1 << 16, 1, 1.0 / 256);
  CHECK(at.kappa == doctest::Approx(-0.5));
  CHECK(at.st_product == doctest::Approx(r.st_product));
  CHECK(std::isinf(resource_profile_at(1 << 16, 1, 0.0).kappa));

  CHECK_THROWS_AS(resource_profile(1024, 1.5, 0.0), DomainError);
  CHECK_THROWS_AS(resource_profile(1024, 0.0, 0.0, 0.1, 0.0), DomainError);
}

TEST_CASE("clock and width regimes") {
  const auto ns = powers(10, 20);
  CHECK(std::abs(slope(ns, [](auto n) { return double(resource_profile(n, 0, 0).n_clock); }) - 0.5) < 0.05);
  CHECK(std::abs(slope(ns, [](auto n) { return resource_profile(n, 0, -1).delta_t; }) - 0.5) < 0.05);
  // kappa = -1/2: constant width and clock, product ~ N^(1/4) log N.
  for (double n : ns) CHECK(resource_profile(std::int64_t(n), 0, -0.5).n_clock == 2);
  CHECK(std::abs(slope(ns, [](auto n) { return resource_profile(n, 0, -0.5).delta_t; })) < 0.05);
  CHECK(std::abs(slope(ns, [](auto n) {
          return resource_profile(n, 0, -0.5).st_product / (std::pow(double(n), 0.25) * std::log2(double(n)));
        })) < 0.05);
}

TEST_CASE("kappa optimization") {
  const std::vector<double> single{-1.0};
  CHECK(optimize_kappa(1 << 20, 0.0, single).kappa == -1.0);

  const auto grid = make_grid(-1.0, 0.0, 0.01);
  CHECK(grid.size() == 101);
  CHECK(grid.front() == -1.0);
  CHECK(grid.back() == doctest::Approx(0.0).epsilon(1e-12));
  for (std::int64_t n : {std::int64_t{1} << 20, std::int64_t{1} << 40}) {
    const auto best = optimize_kappa(n, 0.0, grid);
    for (double k : grid) CHECK(best.profile.st_product <= resource_profile(n, 0.0, k).st_product);
  }
  CHECK_THROWS_AS(optimize_kappa(1024, 0.0, std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(optimize_kappa(1024, 0.0, std::vector<double>{0.5}), DomainError);
  CHECK_THROWS_AS(make_grid(0.0, -1.0, 0.01), DomainError);
}

TEST_CASE("asymptotic kappa optimum") {
  const auto grid = make_grid(-1.0, 0.0, 0.01);
  const std::int64_t n = std::int64_t{1} << 40;
  const auto a = optimize_kappa(n, 0.0, grid);
  const auto b = optimize_kappa(n, 0.5, grid);
  CHECK(a.kappa >= -0.55);
  CHECK(a.kappa <= -0.45);
  CHECK(b.kappa >= -0.80);
  CHECK(b.kappa <= -0.70);
}

TEST_CASE("asymptotic zalka exponents") {
  const auto ns = powers(10, 30);
  CHECK(std::abs(slope(ns, [](auto n) { return zalka_lower_bound(n, -0.5); }) - 0.5) < 0.05);
  CHECK(std::abs(slope(ns, [](auto n) { return zalka_lower_bound(n, 0.0); }) - 1.0) < 0.05);
}

TEST_CASE("zalka bound") {
  // Direct evaluation of N / (log2 N t*^2) at G = N^kappa.
  const std::int64_t n = 1 << 20;
  const auto p = make_params(n, 1, Coefficient::rescaled(std::pow(double(n), -0.5)));
  const double t = runtime(p);
  CHECK(zalka_lower_bound(n, -0.5) == doctest::Approx(double(n) / (20 * t * t)));
  for (double n2 : powers(10, 30)) CHECK(zalka_lower_bound(std::int64_t(n2), -1.0) == 1.0);
  CHECK_THROWS_AS(zalka_lower_bound(1024, 0.5), DomainError);
}

TEST_CASE("simplex volume") {
  CHECK(log_simplex_volume(2) == doctest::Approx(0.0));
  CHECK(log_simplex_volume(3) == doctest::Approx(std::log(std::sqrt(3.0) / 4)));
  CHECK(std::abs(log_simplex_volume(3) + 0.8369) < 1e-4);
  CHECK(log_simplex_volume(100) < std::log(100 / std::log2(100.0)));
  double ln_fact = 0;
  for (int i = 2; i < 30; ++i) ln_fact += std::log(double(i));
  CHECK(log_simplex_volume(30) == doctest::Approx(0.5 * std::log(30.0) - 29 * 0.5 * std::log(2.0) - ln_fact));
}

TEST_CASE("scaling fit") {
  std::vector<std::pair<double, double>> pts;
  for (double n : powers(4, 12)) pts.emplace_back(n, std::sqrt(n));
  auto f = fit_scaling_exponent(pts);
  CHECK(f.exponent == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));

  pts.clear();
  for (double n : powers(4, 12)) pts.emplace_back(n, 7.5 * std::pow(n, -0.25));
  f = fit_scaling_exponent(pts);
  CHECK(std::abs(f.exponent + 0.25) < 1e-12);
  CHECK(std::exp(f.intercept) == doctest::Approx(7.5));

  std::vector<std::pair<double, double>> widths;
  for (double n : powers(10, 20))
    widths.emplace_back(n, peak_width(make_params(std::int64_t(n), 1, Coefficient::rescaled(1.0))).exact);
  CHECK(std::abs(fit_scaling_exponent(widths).exponent + 0.5) < 0.05);

  CHECK_THROWS_AS(fit_scaling_exponent(std::vector<std::pair<double, double>>{{1, 1}, {2, 2}}), DomainError);
  CHECK_THROWS_AS(fit_scaling_exponent(std::vector<std::pair<double, double>>{{4, 1}, {4, 2}, {4, 3}}),
                  DomainError);
  CHECK_THROWS_AS(fit_scaling_exponent(std::vector<std::pair<double, double>>{{1, 1}, {2, -2}, {4, 3}}),
                  DomainError);
}

TEST_CASE("resource monotonicity properties") {
  const auto grid = make_grid(-1.0, 0.0, 0.05);
  for (std::int64_t n : {std::int64_t{1} << 12, std::int64_t{1} << 24}) {
    double prev_bound = 0;
    for (double k : grid) {
      const double b = zalka_lower_bound(n, k);
      CHECK(b >= prev_bound);
      prev_bound = b;
    }
    std::vector<ResourceProfile> profiles;
    for (double k : grid) profiles.push_back(resource_profile(n, 0.0, k));
    for (const auto& a : profiles)
      for (const auto& b : profiles)
        if (a.delta_t <= b.delta_t) CHECK(a.n_clock >= b.n_clock);
    for (const auto& p : profiles) {
      CHECK(p.n_clock >= 1);
      CHECK(std::isfinite(p.st_product));
      CHECK(p.st_product > 0);
    }
  }
  for (std::int64_t n = 4; n < 200; ++n) CHECK(log_simplex_volume(n + 1) < log_simplex_volume(n));
}
