#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace gpsearch {

/// Where integration results are reported.
struct Sampler {
  enum class Kind { grid, steps };
  Kind kind = Kind::steps;
  double interval = 0.0;  // grid spacing, used when kind == grid

  static Sampler every_step() { return {Kind::steps, 0.0}; }
  static Sampler uniform(double interval) { return {Kind::grid, interval}; }
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  Sampler sampler{};
  std::size_t max_steps = 50'000'000;

  void validate() const;
};

/// dy/dt = f(t, y) on a flat real vector.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Called at each output point; return false to stop early.
using Observer = std::function<bool(double t, std::span<const double> y)>;

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double t_final = 0.0;
  bool stopped_early = false;
};

/// Embedded Runge-Kutta 5(4) pair of Dormand and Prince with FSAL and a
/// PI step-size controller. Error norm is the max over components of
/// |err_i| / (abs_tol + rel_tol * max(|y_i|, |y_new_i|)).
class DormandPrince54 {
 public:
  DormandPrince54(Rhs rhs, std::size_t dim, IntegratorConfig config);

  /// Advances y from t0 to t1 in place. The observer is called at t0, then at
  /// every grid point (grid sampler) or accepted step (step sampler), and at
  /// t1. Throws NumericalError on step-size underflow or a non-finite state.
  IntegrationStats integrate(double t0, std::vector<double>& y, double t1,
                             const Observer& observer);

  /// One fixed step of size h from (t, y), fifth-order solution.
  void step(double t, std::span<const double> y, double h, std::span<double> out) const;

  const IntegratorConfig& config() const { return config_; }

 private:
  // Attempts a step, filling y_new and returning the scaled error norm.
  double attempt(double t, std::span<const double> y, std::span<const double> k1, double h,
                 std::span<double> y_new, std::span<double> k7) const;

  Rhs rhs_;
  std::size_t dim_;
  IntegratorConfig config_;
  mutable std::vector<double> k2_, k3_, k4_, k5_, k6_, tmp_;
};

}  // namespace gpsearch
