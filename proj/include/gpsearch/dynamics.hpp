#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gpsearch/integrator.hpp"
#include "gpsearch/model.hpp"

namespace gpsearch {

/// Time derivative i A (alpha, beta) of the reduced state at hopping rate gamma.
/// Evolution follows d psi/dt = +i A psi with A = -(H0 - V).
ReducedState derivative_reduced(const SearchParams& params, double gamma,
                                const ReducedState& state);

/// d|alpha|^2/dt at the given state and gamma.
double success_rate(const SearchParams& params, double gamma, const ReducedState& state);

/// Integrates the two-level system from the equal superposition to t_end.
/// Under the critical policy gamma is recomputed at every stage of every
/// step from the instantaneous state. The state is never renormalized.
Trajectory integrate_reduced(const SearchParams& params, const GammaPolicy& policy, double t_end,
                             const IntegratorConfig& config = {});

struct FullRun {
  Trajectory trajectory;  // projected onto the reduced basis
  std::vector<double> leakage;
  double max_leakage = 0.0;
  double max_norm_residual = 0.0;
};

/// Integrates the N-dimensional Gross-Pitaevskii state
///   d psi_i/dt = i [ gamma sum_j psi_j + [i in M] psi_i + g |psi_i|^2 psi_i ]
/// in O(N) per evaluation and projects every sample onto the reduced basis.
FullRun integrate_full(const SearchParams& params, std::vector<std::int64_t> marked,
                       const GammaPolicy& policy, double t_end,
                       const IntegratorConfig& config = {});

struct DecoupledTrajectory {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> rate;          // dx/dt, sign gives the active branch
  std::vector<double> branch_flips;  // times where dx/dt changed sign
  double t_start = 0.0;              // bootstrap time
  double x_start = 0.0;              // bootstrap value k/N + eta
};

/// Integrates the critical-policy success probability alone. The branch of
/// dx/dt = +/- sqrt(f(x)) is carried through the turning points at x = 1 and
/// x = k/N by integrating x'' = f'(x)/2 with x'(t0) = +sqrt(f(x0)).
DecoupledTrajectory integrate_decoupled(const SearchParams& params, double t_end,
                                        const IntegratorConfig& config = {});

struct VerificationReport {
  double max_norm_residual = 0.0;
  double max_subspace_leakage = 0.0;
  double max_y_identity_residual = 0.0;
  double max_z_identity_residual = 0.0;
  double max_uncoupled_residual = 0.0;
  double max_rescaled_time_residual = 0.0;
};

/// Residuals of the decoupling identities along a critical-policy trajectory
/// with one marked item:
///   Re(alpha beta*) = (1 - x)/sqrt(N-1)
///   Im(alpha beta*) = x' / (2 gamma_c sqrt(N-1))
///   x'' = N G/(1-G+N G x) x'^2 + 2/N^2 (1-G+N G x)^2 (1+N-2N x)
///   x = sin^2(tau/sqrt N) + cos^2(tau/sqrt N)/N,  tau = int gamma_c N dt
/// Derivatives use centered differences on a uniform grid; non-uniform
/// trajectories are resampled first.
VerificationReport verify_identities(const Trajectory& trajectory, const SearchParams& params);

struct Event {
  double time;
  ReducedState state;
};

/// First local maximum of x(t) on (0, t_max], located to ~1e-12 by bisection
/// on dx/dt within the step where it changes sign.
std::optional<Event> find_first_peak(const SearchParams& params, const GammaPolicy& policy,
                                     double t_max, const IntegratorConfig& config = {});

/// First time x(t) rises to `threshold`.
std::optional<Event> find_first_crossing(const SearchParams& params, const GammaPolicy& policy,
                                         double threshold, double t_max,
                                         const IntegratorConfig& config = {});

}  // namespace gpsearch
