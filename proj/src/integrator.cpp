#include "gpsearch/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "gpsearch/errors.hpp"

namespace gpsearch {
namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kBeta = 0.04;  // PI controller memory
constexpr double kAlpha = 0.2 - 0.75 * kBeta;

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0)) throw DomainError("rel_tol", "must be positive");
  if (!(abs_tol > 0.0)) throw DomainError("abs_tol", "must be positive");
  if (!(max_step > 0.0)) throw DomainError("max_step", "must be positive");
  if (sampler.kind == Sampler::Kind::grid && !(sampler.interval > 0.0))
    throw DomainError("sampler", "grid interval must be positive");
}

DormandPrince54::DormandPrince54(Rhs rhs, std::size_t dim, IntegratorConfig config)
    : rhs_(std::move(rhs)),
      dim_(dim),
      config_(config),
      k2_(dim),
      k3_(dim),
      k4_(dim),
      k5_(dim),
      k6_(dim),
      tmp_(dim) {
  config_.validate();
}

double DormandPrince54::attempt(double t, std::span<const double> y,
                                std::span<const double> k1, double h, std::span<double> y_new,
                                std::span<double> k7) const {
  const std::size_t n = dim_;
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * a21 * k1[i];
  rhs_(t + c2 * h, tmp_, k2_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a31 * k1[i] + a32 * k2_[i]);
  rhs_(t + c3 * h, tmp_, k3_);
  for (std::size_t i = 0; i < n; ++i)
    tmp_[i] = y[i] + h * (a41 * k1[i] + a42 * k2_[i] + a43 * k3_[i]);
  rhs_(t + c4 * h, tmp_, k4_);
  for (std::size_t i = 0; i < n; ++i)
    tmp_[i] = y[i] + h * (a51 * k1[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
  rhs_(t + c5 * h, tmp_, k5_);
  for (std::size_t i = 0; i < n; ++i)
    tmp_[i] = y[i] + h * (a61 * k1[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                          a65 * k5_[i]);
  rhs_(t + h, tmp_, k6_);
  for (std::size_t i = 0; i < n; ++i)
    y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
  rhs_(t + h, y_new, k7);

  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                          e6 * k6_[i] + e7 * k7[i]);
    const double scale =
        config_.abs_tol + config_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
    err = std::max(err, std::abs(e) / scale);
  }
  return err;
}

void DormandPrince54::step(double t, std::span<const double> y, double h,
                           std::span<double> out) const {
  std::vector<double> k1(dim_), k7(dim_);
  rhs_(t, y, k1);
  attempt(t, y, k1, h, out, k7);
}

IntegrationStats DormandPrince54::integrate(double t0, std::vector<double>& y, double t1,
                                            const Observer& observer) {
  IntegrationStats stats;
  stats.t_final = t0;
  if (y.size() != dim_) throw DomainError("y", "state dimension mismatch");
  if (!(t1 > t0)) throw DomainError("t_end", "must exceed the start time");

  const bool grid = config_.sampler.kind == Sampler::Kind::grid;
  const double interval = config_.sampler.interval;
  std::size_t grid_index = 1;
  auto next_grid = [&] {
    return std::min(t1, t0 + static_cast<double>(grid_index) * interval);
  };

  if (observer && !observer(t0, y)) {
    stats.stopped_early = true;
    return stats;
  }

  std::vector<double> k1(dim_), k7(dim_), y_new(dim_);
  rhs_(t0, y, k1);

  // Initial step from the usual derivative-scale heuristic.
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double sc = config_.abs_tol + config_.rel_tol * std::abs(y[i]);
    d0 = std::max(d0, std::abs(y[i]) / sc);
    d1 = std::max(d1, std::abs(k1[i]) / sc);
  }
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h = std::min({h, config_.max_step, t1 - t0});

  double t = t0;
  double err_prev = 1e-4;
  while (t < t1) {
    if (stats.accepted + stats.rejected >= config_.max_steps)
      throw NumericalError("step budget exhausted", t);

    const double target = grid ? next_grid() : t1;
    bool hits_target = false;
    double h_try = std::min(h, config_.max_step);
    if (t + h_try >= target) {
      h_try = target - t;
      hits_target = true;
    }
    if (h_try < 1e-14 * std::max(1.0, std::abs(t)))
      throw NumericalError("step size underflow", t);

    const double err = attempt(t, y, k1, h_try, y_new, k7);
    if (!std::isfinite(err)) {
      ++stats.rejected;
      h = 0.25 * h_try;
      if (h < 1e-14 * std::max(1.0, std::abs(t))) throw NumericalError("non-finite state", t);
      continue;
    }

    if (err <= 1.0) {
      t = hits_target ? target : t + h_try;
      y.swap(y_new);
      k1.swap(k7);
      ++stats.accepted;
      stats.t_final = t;

      double factor = err == 0.0 ? kMaxFactor
                                 : kSafety * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta);
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      err_prev = std::max(err, 1e-4);
      // A step shortened to land on an output point says little about the
      // natural step size; keep the previous proposal in that case.
      const double proposal = h_try * factor;
      h = hits_target ? std::max(h, proposal) : proposal;

      const bool report = grid ? hits_target : true;
      if (hits_target && grid) ++grid_index;
      if (report && observer && !observer(t, y)) {
        stats.stopped_early = true;
        return stats;
      }
    } else {
      ++stats.rejected;
      h = h_try * std::max(kMinFactor, kSafety * std::pow(err, -0.2));
    }
  }
  return stats;
}

}  // namespace gpsearch
