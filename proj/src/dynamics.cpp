#include "gpsearch/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "gpsearch/analytic.hpp"
#include "gpsearch/errors.hpp"

namespace gpsearch {
namespace {

constexpr Complex kI{0.0, 1.0};

ReducedState unpack(std::span<const double> y) {
  return {Complex(y[0], y[1]), Complex(y[2], y[3])};
}

std::vector<double> pack(const ReducedState& s) {
  return {s.alpha.real(), s.alpha.imag(), s.beta.real(), s.beta.imag()};
}

double gamma_at(const SearchParams& params, const GammaPolicy& policy, double t,
                const ReducedState& s) {
  return policy.evaluate(params, t, std::norm(s.alpha), std::norm(s.beta));
}

Rhs reduced_rhs(const SearchParams& params, const GammaPolicy& policy) {
  return [&params, &policy](double t, std::span<const double> y, std::span<double> dydt) {
    const ReducedState s = unpack(y);
    const ReducedState d = derivative_reduced(params, gamma_at(params, policy, t, s), s);
    dydt[0] = d.alpha.real();
    dydt[1] = d.alpha.imag();
    dydt[2] = d.beta.real();
    dydt[3] = d.beta.imag();
  };
}

void require_end(double t_end) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end", "must be positive");
}

// Walks the accepted steps of a reduced integration. For each step the
// callback gets the states at both ends; returning true stops the walk.
using StepVisitor = std::function<bool(double t_prev, std::span<const double> y_prev, double t,
                                       std::span<const double> y)>;

void scan_steps(DormandPrince54& stepper, const SearchParams& params, double t_max,
                const StepVisitor& visit) {
  std::vector<double> y = pack(ReducedState::equal_superposition(params));
  std::vector<double> y_prev = y;
  double t_prev = 0.0;
  bool first = true;
  stepper.integrate(0.0, y, t_max, [&](double t, std::span<const double> cur) {
    if (!first && visit(t_prev, y_prev, t, cur)) return false;
    first = false;
    t_prev = t;
    y_prev.assign(cur.begin(), cur.end());
    return true;
  });
}

// Smallest offset s in (lo, hi] from (t, y) with pred true, assuming pred is
// false at lo and true at hi. Each probe is a single step from y.
double bisect(const DormandPrince54& stepper, double t, std::span<const double> y, double lo,
              double hi, const std::function<bool(double, const ReducedState&)>& pred) {
  std::vector<double> probe(4);
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, t + hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    stepper.step(t, y, mid, probe);
    (pred(t + mid, unpack(probe)) ? hi : lo) = mid;
  }
  return hi;
}

ReducedState advance(const DormandPrince54& stepper, double t, std::span<const double> y,
                     double h) {
  std::vector<double> out(4);
  stepper.step(t, y, h, out);
  return unpack(out);
}

IntegratorConfig stepwise(IntegratorConfig config) {
  config.sampler = Sampler::every_step();
  return config;
}

}  // namespace

ReducedState derivative_reduced(const SearchParams& params, double gamma,
                                const ReducedState& s) {
  const Generator2x2 a = generator_matrix(params, gamma, std::norm(s.alpha), std::norm(s.beta));
  return {kI * (a.marked_diag * s.alpha + a.coupling * s.beta),
          kI * (a.coupling * s.alpha + a.unmarked_diag * s.beta)};
}

double success_rate(const SearchParams& params, double gamma, const ReducedState& s) {
  const ReducedState d = derivative_reduced(params, gamma, s);
  return 2.0 * (std::conj(s.alpha) * d.alpha).real();
}

Trajectory integrate_reduced(const SearchParams& params, const GammaPolicy& policy, double t_end,
                             const IntegratorConfig& config) {
  require_end(t_end);
  DormandPrince54 stepper(reduced_rhs(params, policy), 4, config);
  std::vector<double> y = pack(ReducedState::equal_superposition(params));
  Trajectory traj;
  stepper.integrate(0.0, y, t_end, [&](double t, std::span<const double> cur) {
    const ReducedState s = unpack(cur);
    traj.push(t, s, gamma_at(params, policy, t, s));
    return true;
  });
  return traj;
}

FullRun integrate_full(const SearchParams& params, std::vector<std::int64_t> marked,
                       const GammaPolicy& policy, double t_end, const IntegratorConfig& config) {
  require_end(t_end);
  marked = normalize_marked(params, std::move(marked));
  const auto n = static_cast<std::size_t>(params.n());

  std::vector<char> is_marked(n, 0);
  for (auto i : marked) is_marked[static_cast<std::size_t>(i)] = 1;

  auto probabilities = [&](std::span<const double> y) {
    double pm = 0.0, pu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = y[2 * i] * y[2 * i] + y[2 * i + 1] * y[2 * i + 1];
      (is_marked[i] ? pm : pu) += p;
    }
    return std::pair{pm, pu};
  };

  const double g = params.g();
  Rhs rhs = [&](double t, std::span<const double> y, std::span<double> dydt) {
    const auto [pm, pu] = probabilities(y);
    const double gamma = policy.evaluate(params, t, pm, pu);
    double sum_re = 0.0, sum_im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_re += y[2 * i];
      sum_im += y[2 * i + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double re = y[2 * i], im = y[2 * i + 1];
      const double diag = (is_marked[i] ? 1.0 : 0.0) + g * (re * re + im * im);
      // i * (gamma * sum + diag * psi_i)
      const double a_re = gamma * sum_re + diag * re;
      const double a_im = gamma * sum_im + diag * im;
      dydt[2 * i] = -a_im;
      dydt[2 * i + 1] = a_re;
    }
  };

  const FullState start = embed(params, ReducedState::equal_superposition(params), marked);
  std::vector<double> y(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    y[2 * i] = start.amplitudes[i].real();
    y[2 * i + 1] = start.amplitudes[i].imag();
  }

  FullRun run;
  FullState scratch{std::vector<Complex>(n), marked};
  DormandPrince54 stepper(rhs, 2 * n, config);
  stepper.integrate(0.0, y, t_end, [&](double t, std::span<const double> cur) {
    for (std::size_t i = 0; i < n; ++i) scratch.amplitudes[i] = Complex(cur[2 * i], cur[2 * i + 1]);
    const Projection proj = project(scratch);
    const auto [pm, pu] = probabilities(cur);
    const double residual = std::abs(pm + pu - 1.0);
    Trajectory& tr = run.trajectory;
    tr.times.push_back(t);
    tr.states.push_back(proj.reduced);
    tr.x.push_back(proj.reduced.x());
    tr.gamma.push_back(policy.evaluate(params, t, pm, pu));
    tr.norm_residual.push_back(residual);
    run.leakage.push_back(proj.leakage);
    run.max_leakage = std::max(run.max_leakage, proj.leakage);
    run.max_norm_residual = std::max(run.max_norm_residual, residual);
    return true;
  });
  return run;
}

DecoupledTrajectory integrate_decoupled(const SearchParams& params, double t_end,
                                        const IntegratorConfig& config) {
  require_end(t_end);
  const double floor = params.marked() / params.dim();
  const double slope0 = decoupled_rate_sq_derivative(params, floor);

  // x = k/N is a turning point of the first-order form; start just past it.
  double t0 = 0.0, x0 = 0.0;
  if (1.0 + params.G() * params.unmarked() > 0.0) {
    t0 = 1e-4 * runtime(params);
    const double eta = std::max(1e-12, success_probability(params, t0) - floor);
    x0 = floor + eta;
    t0 = time_to_probability(params, x0);
  } else {
    // No closed form; near the start x - k/N ~ f'(k/N) t^2 / 4.
    x0 = floor + 1e-12;
    t0 = 2.0 * std::sqrt(1e-12 / slope0);
  }
  if (!(t_end > t0)) throw DomainError("t_end", "must exceed the bootstrap time");

  Rhs rhs = [&params](double, std::span<const double> y, std::span<double> dydt) {
    dydt[0] = y[1];
    dydt[1] = 0.5 * decoupled_rate_sq_derivative(params, y[0]);
  };

  DecoupledTrajectory out;
  out.t_start = t0;
  out.x_start = x0;
  out.times.push_back(0.0);
  out.x.push_back(floor);
  out.rate.push_back(0.0);

  constexpr double kRangeTol = 1e-8;
  std::vector<double> y{x0, std::sqrt(std::max(0.0, decoupled_rate_sq(params, x0)))};
  DormandPrince54 stepper(rhs, 2, config);
  stepper.integrate(t0, y, t_end, [&](double t, std::span<const double> cur) {
    if (!(cur[0] >= floor - kRangeTol && cur[0] <= 1.0 + kRangeTol))
      throw NumericalError("decoupled success probability left [k/N, 1]", t);
    const double prev_rate = out.rate.back();
    if (out.times.size() > 1 && prev_rate != 0.0 && (prev_rate > 0.0) != (cur[1] > 0.0)) {
      // Linear interpolation of the sign change between samples.
      const double tp = out.times.back();
      out.branch_flips.push_back(tp + (t - tp) * prev_rate / (prev_rate - cur[1]));
    }
    out.times.push_back(t);
    out.x.push_back(cur[0]);
    out.rate.push_back(cur[1]);
    return true;
  });
  return out;
}

namespace {

// Cubic Hermite resample of a trajectory onto a uniform grid with the same
// number of samples, using the exact derivative at each node.
Trajectory resample_uniform(const Trajectory& tr, const SearchParams& params) {
  const std::size_t m = tr.size();
  const double t0 = tr.times.front(), t1 = tr.times.back();
  const double h = (t1 - t0) / static_cast<double>(m - 1);
  Trajectory out;
  std::size_t seg = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = (i + 1 == m) ? t1 : t0 + h * static_cast<double>(i);
    while (seg + 2 < m && tr.times[seg + 1] < t) ++seg;
    const double ta = tr.times[seg], tb = tr.times[seg + 1];
    const double span = tb - ta;
    const double u = (t - ta) / span;
    const double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
    const double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
    const ReducedState& a = tr.states[seg];
    const ReducedState& b = tr.states[seg + 1];
    const ReducedState da = derivative_reduced(params, tr.gamma[seg], a);
    const ReducedState db = derivative_reduced(params, tr.gamma[seg + 1], b);
    const ReducedState s{h00 * a.alpha + h10 * span * da.alpha + h01 * b.alpha + h11 * span * db.alpha,
                         h00 * a.beta + h10 * span * da.beta + h01 * b.beta + h11 * span * db.beta};
    out.push(t, s, critical_gamma(params, std::norm(s.alpha), std::norm(s.beta)));
  }
  return out;
}

bool is_uniform(const Trajectory& tr) {
  const std::size_t m = tr.size();
  const double h = (tr.times.back() - tr.times.front()) / static_cast<double>(m - 1);
  for (std::size_t i = 1; i < m; ++i)
    if (std::abs(tr.times[i] - tr.times[i - 1] - h) > 1e-9 * std::max(h, 1.0)) return false;
  return true;
}

}  // namespace

VerificationReport verify_identities(const Trajectory& trajectory, const SearchParams& params) {
  if (params.k() != 1)
    throw DomainError("k", "decoupling identities are derived for a single marked item");
  if (trajectory.size() < 5)
    throw DomainError("samples", "need at least 5 samples for finite differences, got " +
                                     std::to_string(trajectory.size()));

  const Trajectory tr = is_uniform(trajectory) ? trajectory : resample_uniform(trajectory, params);
  const std::size_t m = tr.size();
  const double n = params.dim(), G = params.G();
  const double root = std::sqrt(n - 1.0);
  const double h = (tr.times.back() - tr.times.front()) / static_cast<double>(m - 1);

  VerificationReport rep;
  double tau = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const ReducedState& s = tr.states[i];
    const double x = tr.x[i];
    const Complex ab = s.alpha * std::conj(s.beta);
    rep.max_norm_residual = std::max(rep.max_norm_residual, tr.norm_residual[i]);
    rep.max_y_identity_residual =
        std::max(rep.max_y_identity_residual, std::abs(ab.real() - (1.0 - x) / root));

    if (i > 0) tau += 0.5 * h * n * (tr.gamma[i] + tr.gamma[i - 1]);
    const double arg = tau / std::sqrt(n);
    const double linear = std::pow(std::sin(arg), 2) + std::pow(std::cos(arg), 2) / n;
    rep.max_rescaled_time_residual = std::max(rep.max_rescaled_time_residual, std::abs(x - linear));

    if (i == 0 || i + 1 == m) continue;
    const double dx = (tr.x[i + 1] - tr.x[i - 1]) / (2.0 * h);
    const double d2x = (tr.x[i + 1] - 2.0 * x + tr.x[i - 1]) / (h * h);
    rep.max_z_identity_residual = std::max(
        rep.max_z_identity_residual, std::abs(ab.imag() - dx / (2.0 * tr.gamma[i] * root)));

    const double shifted = 1.0 - G + n * G * x;  // gamma_c N
    if (shifted != 0.0) {
      const double rhs = n * G / shifted * dx * dx +
                         2.0 / (n * n) * shifted * shifted * (1.0 + n - 2.0 * n * x);
      rep.max_uncoupled_residual = std::max(rep.max_uncoupled_residual, std::abs(d2x - rhs));
    }
  }
  return rep;
}

std::optional<Event> find_first_peak(const SearchParams& params, const GammaPolicy& policy,
                                     double t_max, const IntegratorConfig& config) {
  require_end(t_max);
  DormandPrince54 stepper(reduced_rhs(params, policy), 4, stepwise(config));
  auto rate = [&](double t, const ReducedState& s) {
    return success_rate(params, gamma_at(params, policy, t, s), s);
  };
  auto falling = [&](double t, const ReducedState& s) { return rate(t, s) <= 0.0; };

  std::optional<Event> event;
  scan_steps(stepper, params, t_max, [&](double tp, auto yp, double t, auto y) {
    if (!(rate(tp, unpack(yp)) > 0.0 && falling(t, unpack(y)))) return false;
    const double s = bisect(stepper, tp, yp, 0.0, t - tp, falling);
    event = Event{tp + s, advance(stepper, tp, yp, s)};
    return true;
  });
  return event;
}

std::optional<Event> find_first_crossing(const SearchParams& params, const GammaPolicy& policy,
                                         double threshold, double t_max,
                                         const IntegratorConfig& config) {
  require_end(t_max);
  DormandPrince54 stepper(reduced_rhs(params, policy), 4, stepwise(config));
  auto rate = [&](double t, const ReducedState& s) {
    return success_rate(params, gamma_at(params, policy, t, s), s);
  };
  auto above = [threshold](double, const ReducedState& s) { return s.x() >= threshold; };
  auto falling = [&](double t, const ReducedState& s) { return rate(t, s) <= 0.0; };

  std::optional<Event> event;
  scan_steps(stepper, params, t_max, [&](double tp, auto yp, double t, auto y) {
    double hi = t - tp;
    if (!above(t, unpack(y))) {
      // A narrow peak can rise above the threshold and fall back inside one step.
      if (!(rate(tp, unpack(yp)) > 0.0 && falling(t, unpack(y)))) return false;
      hi = bisect(stepper, tp, yp, 0.0, hi, falling);
      if (!above(tp + hi, advance(stepper, tp, yp, hi))) return false;
    }
    const double s = bisect(stepper, tp, yp, 0.0, hi, above);
    event = Event{tp + s, advance(stepper, tp, yp, s)};
    return true;
  });
  return event;
}

}  // namespace gpsearch
