#include "gpsearch/resources.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "gpsearch/analytic.hpp"
#include "gpsearch/errors.hpp"

namespace gpsearch {

std::int64_t marked_count(std::int64_t n, double lambda_exp) {
  const double k = std::round(std::pow(static_cast<double>(n), lambda_exp));
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(k), 1, n - 1);
}

ResourceProfile resource_profile_at(std::int64_t n, std::int64_t k, double G, double epsilon,
                                    double clock_constant) {
  if (!(clock_constant > 0.0)) throw DomainError("clock_constant", "must be positive");
  const SearchParams params = make_params(n, k, Coefficient::rescaled(G), epsilon);
  const double nd = params.dim();

  ResourceProfile r{};
  r.kappa = G > 0.0 ? std::log(G) / std::log(nd) : -std::numeric_limits<double>::infinity();
  r.lambda_exp = std::log(params.marked()) / std::log(nd);
  r.k = k;
  r.G = G;
  r.t_star = runtime(params);
  r.delta_t = peak_width(params).exact;
  r.n_clock = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(clock_constant / r.delta_t)));
  r.qubits = std::log2(nd);
  r.space = static_cast<double>(r.n_clock) + r.qubits;
  r.st_product = r.space * r.t_star;
  return r;
}

ResourceProfile resource_profile(std::int64_t n, double lambda_exp, double kappa, double epsilon,
                                 double clock_constant) {
  if (n < 2) throw DomainError("N", "must be at least 2");
  if (!(lambda_exp >= 0.0 && lambda_exp <= 1.0)) throw DomainError("lambda", "must lie in [0, 1]");
  if (!std::isfinite(kappa)) throw DomainError("kappa", "must be finite");

  const double G = std::pow(static_cast<double>(n), kappa);
  ResourceProfile r =
      resource_profile_at(n, marked_count(n, lambda_exp), G, epsilon, clock_constant);
  r.kappa = kappa;
  r.lambda_exp = lambda_exp;
  return r;
}

KappaOptimum optimize_kappa(std::int64_t n, double lambda_exp, std::span<const double> kappa_grid,
                            double epsilon, double clock_constant) {
  if (kappa_grid.empty()) throw DomainError("kappa_grid", "must not be empty");
  for (double kappa : kappa_grid)
    if (!(kappa >= -1.0 - 1e-12 && kappa <= 1e-12))
      throw DomainError("kappa_grid", "points must lie in [-1, 0]");

  std::optional<KappaOptimum> best;
  for (double kappa : kappa_grid) {
    const ResourceProfile p = resource_profile(n, lambda_exp, kappa, epsilon, clock_constant);
    const bool better = !best || p.st_product < best->profile.st_product ||
                        (p.st_product == best->profile.st_product && kappa < best->kappa);
    if (better) best = KappaOptimum{kappa, p};
  }
  return *best;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw DomainError("grid", "step must be positive");
  if (!(hi >= lo)) throw DomainError("grid", "upper end below lower end");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = std::min(grid.back(), hi);
  return grid;
}

double zalka_lower_bound(std::int64_t n, double kappa) {
  if (n < 2) throw DomainError("N", "must be at least 2");
  if (!(kappa >= -1.0 && kappa <= 0.0)) throw DomainError("kappa", "must lie in [-1, 0]");
  const double nd = static_cast<double>(n);
  const SearchParams params = make_params(n, 1, Coefficient::rescaled(std::pow(nd, kappa)));
  const double t = runtime(params);
  return std::max(1.0, nd / (std::log2(nd) * t * t));
}

double log_simplex_volume(std::int64_t n) {
  if (n < 2) throw DomainError("N", "must be at least 2");
  const double nd = static_cast<double>(n);
  return 0.5 * std::log(nd) - 0.5 * (nd - 1.0) * std::log(2.0) - std::lgamma(nd);
}

ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw DomainError("points", "need at least 3 points");
  double sx = 0, sy = 0;
  for (const auto& [n, v] : points) {
    if (!(n > 0.0) || !(v > 0.0)) throw DomainError("points", "values must be positive");
    sx += std::log(n);
    sy += std::log(v);
  }
  const double m = static_cast<double>(points.size());
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [n, v] : points) {
    const double dx = std::log(n) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DomainError("points", "degenerate fit: all N equal");
  const double slope = sxy / sxx;
  const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return {slope, my - slope * mx, r2};
}

}  // namespace gpsearch
