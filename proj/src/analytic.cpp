#include "gpsearch/analytic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gpsearch/errors.hpp"

namespace gpsearch {
namespace {

double peak_factor(const SearchParams& p) { return 1.0 + p.G() * p.unmarked(); }

double require_peak_factor(const SearchParams& p) {
  const double c = peak_factor(p);
  if (!(c > 0.0))
    throw DomainError("G", "success probability 1 unreachable: need G > -1/(N-k), got G = " +
                               std::to_string(p.G()));
  return c;
}

double angular_rate(const SearchParams& p, double c) {
  return std::sqrt(p.marked() * c / p.dim());
}

}  // namespace

Generator2x2 generator_matrix(const SearchParams& p, double gamma, double marked_prob,
                              double unmarked_prob) {
  return {gamma * p.marked() + 1.0 + p.G() * p.unmarked() * marked_prob,
          gamma * std::sqrt(p.marked() * p.unmarked()),
          gamma * p.unmarked() + p.G() * p.marked() * unmarked_prob};
}

double critical_gamma(const SearchParams& p, double marked_prob, double unmarked_prob) {
  const double delta = p.unmarked() * marked_prob - p.marked() * unmarked_prob;
  return (1.0 + p.G() * delta) / p.dim();
}

double critical_gamma(const SearchParams& p, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("x", "must lie in [0, 1]");
  return critical_gamma(p, x, 1.0 - x);
}

Spectrum spectrum(const SearchParams& p, double gamma, double x) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma", "must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("x", "must lie in [0, 1]");

  const Generator2x2 a = generator_matrix(p, gamma, x, 1.0 - x);
  const double d = a.marked_diag - a.unmarked_diag;
  const double gap = std::hypot(d, 2.0 * a.coupling);
  const double b = a.coupling;

  // Eigenvectors (marked, unmarked) components, picked to avoid cancellation.
  double up_w, up_r, lo_w, lo_r;
  if (d >= 0.0) {
    up_w = 0.5 * (d + gap), up_r = b;
    lo_w = b, lo_r = -0.5 * (d + gap);
  } else {
    up_w = b, up_r = 0.5 * (gap - d);
    lo_w = -0.5 * (gap - d), lo_r = b;
  }

  const double sk = std::sqrt(p.marked()), srest = std::sqrt(p.unmarked());
  const double sn = std::sqrt(p.dim());
  auto ratio = [&](double w, double r) { return (w * srest - r * sk) / (r * sn); };
  auto w_overlap = [&](double w, double r) { return w * w / (w * w + r * r); };
  auto s_overlap = [&](double w, double r) {
    const double proj = (sk * w + srest * r) / sn;
    return proj * proj / (w * w + r * r);
  };

  Spectrum s{};
  s.lambda_plus = 0.5 * (a.trace() + gap);
  s.lambda_minus = 0.5 * (a.trace() - gap);
  s.gap = gap;
  s.w_ratio_plus = ratio(up_w, up_r);
  s.w_ratio_minus = ratio(lo_w, lo_r);
  s.w_overlap_plus = w_overlap(up_w, up_r);
  s.s_overlap_plus = s_overlap(up_w, up_r);
  s.w_overlap_minus = w_overlap(lo_w, lo_r);
  s.s_overlap_minus = s_overlap(lo_w, lo_r);
  return s;
}

double success_probability(const SearchParams& p, double t) {
  if (!(t >= 0.0)) throw DomainError("t", "must be non-negative");
  const double c = require_peak_factor(p);
  // The tan form written with sin/cos of omega t: regular everywhere,
  // periodic in 2 t* and symmetric about t*.
  const double phase = angular_rate(p, c) * t;
  const double s2 = std::pow(std::sin(phase), 2);
  const double c2 = std::pow(std::cos(phase), 2);
  const double n = p.dim();
  return (n * s2 + p.marked() * c * c2) / (n * s2 + n * c * c2);
}

double time_to_probability(const SearchParams& p, double x) {
  const double floor = p.marked() / p.dim();
  if (!(x >= floor && x <= 1.0))
    throw DomainError("x", "must lie in [k/N, 1], got " + std::to_string(x));
  const double c = require_peak_factor(p);
  const double n = p.dim();
  const double angle =
      std::atan2(std::sqrt(c) * std::sqrt(std::max(0.0, n * x - p.marked())),
                 std::sqrt(n) * std::sqrt(1.0 - x));
  return angle / angular_rate(p, c);
}

double runtime(const SearchParams& p) {
  const double c = require_peak_factor(p);
  return std::numbers::pi * std::sqrt(p.dim()) / (2.0 * std::sqrt(p.marked() * c));
}

PeakWidth peak_width(const SearchParams& p) {
  const double n = p.dim(), k = p.marked(), eps = p.epsilon();
  if (!(eps > 0.0 && eps < 1.0 - k / n))
    throw DomainError("epsilon", "must lie in (0, 1 - k/N), got " + std::to_string(eps));
  const double c = require_peak_factor(p);

  const double q = n * (1.0 - eps) - k;  // N x - k at x = 1 - eps
  PeakWidth w{};
  w.exact = 2.0 * std::sqrt(n / (k * c)) *
            std::atan(std::sqrt(n) * std::sqrt(eps) / (std::sqrt(c) * std::sqrt(q)));
  w.taylor_first_term = 2.0 * n / c * std::sqrt(eps / (k * p.unmarked()));
  const double pq = 1.0 + p.G() * q;
  w.remainder_bound = n * n * std::abs(1.0 + 3.0 * p.G() * q) /
                      (std::sqrt(k) * std::pow(q, 1.5) * pq * pq) * std::pow(eps, 1.5);
  w.remainder_extrapolated = p.k() > 1;
  return w;
}

StationaryPoints stationary_points(const SearchParams& p) {
  if (p.k() != 1)
    throw DomainError("k", "stationary points are only derived for a single marked item");
  const double n = p.dim(), G = p.G();
  StationaryPoints sp{1.0 / n, 1.0, std::nullopt, false};
  if (G != 0.0) sp.stationary = (G - 1.0) / (n * G);
  sp.blocks_peak = G < -1.0 / (n - 1.0);
  return sp;
}

double decoupled_rate_sq(const SearchParams& p, double x) {
  const double n = p.dim(), k = p.marked();
  const double u = n * x - k;
  const double pu = 1.0 + p.G() * u;
  return 4.0 * k * u * (1.0 - x) * pu * pu / (n * n);
}

double decoupled_rate_sq_derivative(const SearchParams& p, double x) {
  const double n = p.dim(), k = p.marked(), G = p.G();
  const double u = n * x - k;
  const double pu = 1.0 + G * u;
  return 4.0 * k / (n * n) *
         (n * (1.0 - x) * pu * pu - u * pu * pu + 2.0 * u * (1.0 - x) * pu * G * n);
}

}  // namespace gpsearch
