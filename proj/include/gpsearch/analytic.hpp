#pragma once

#include <optional>

#include "gpsearch/model.hpp"

// Closed-form results for nonlinear search under the critical hopping rate.
//
// Throughout, c = 1 + G (N - k) and the angular rate of the success
// probability is omega = sqrt(k c / N). The closed forms require c > 0;
// below that the peak at x = 1 is unreachable (see stationary_points).

namespace gpsearch {

/// Real symmetric generator A of the reduced dynamics d(alpha, beta)/dt = i A (alpha, beta)
/// in the {marked, unmarked} basis.
struct Generator2x2 {
  double marked_diag;
  double coupling;
  double unmarked_diag;

  double trace() const { return marked_diag + unmarked_diag; }
  double det() const { return marked_diag * unmarked_diag - coupling * coupling; }
};

/// Builds A from the hopping rate and the current marked / unmarked
/// probabilities:
///   [ gamma k + 1 + G (N-k) |alpha|^2     gamma sqrt(k (N-k))       ]
///   [ gamma sqrt(k (N-k))                 gamma (N-k) + G k |beta|^2 ]
Generator2x2 generator_matrix(const SearchParams& params, double gamma, double marked_prob,
                              double unmarked_prob);

/// gamma_c = (1 + G delta) / N, delta = (N-k) |alpha|^2 - k |beta|^2.
double critical_gamma(const SearchParams& params, double marked_prob, double unmarked_prob);

/// Same, with |beta|^2 taken as 1 - x.
double critical_gamma(const SearchParams& params, double x);

struct Spectrum {
  double lambda_plus;
  double lambda_minus;
  double gap;
  /// Coefficient R of |w> in an eigenvector written as R |w> + |s>, for the
  /// upper and lower eigenvector. Equals +1 / -1 at the critical gamma.
  double w_ratio_plus;
  double w_ratio_minus;
  /// Squared overlaps of the normalized eigenvectors with |w> and |s>.
  double w_overlap_plus;
  double s_overlap_plus;
  double w_overlap_minus;
  double s_overlap_minus;
};

Spectrum spectrum(const SearchParams& params, double gamma, double x);

/// x(t) under the critical policy. Periodic with period 2 t*, even about t*.
double success_probability(const SearchParams& params, double t);

/// Smallest t >= 0 with success_probability(t) == x, for x in [k/N, 1].
double time_to_probability(const SearchParams& params, double x);

/// t* = pi sqrt(N) / (2 sqrt(k c)). Requires G > -1/(N-k).
double runtime(const SearchParams& params);

struct PeakWidth {
  double exact;
  double taylor_first_term;
  double remainder_bound;
  /// The remainder bound is only derived for one marked item; for k > 1 the
  /// k-substituted expression is used and this flag is set.
  bool remainder_extrapolated;
};

/// Width of the time window around t* where x >= 1 - epsilon.
PeakWidth peak_width(const SearchParams& params);

enum class CriticalPointKind { minimum, maximum, stationary };

struct StationaryPoints {
  double minimum;                    // 1/N
  double maximum;                    // 1
  std::optional<double> stationary;  // (G-1)/(N G), absent when G == 0
  /// True when the stationary point lies strictly inside (1/N, 1), which
  /// prevents x from reaching 1.
  bool blocks_peak;
};

/// Critical points of dx/dt for a single marked item.
StationaryPoints stationary_points(const SearchParams& params);

/// Right-hand side of the decoupled first-order form:
///   (dx/dt)^2 = f(x) = 4 k (N x - k)(1 - x)(1 + G (N x - k))^2 / N^2.
double decoupled_rate_sq(const SearchParams& params, double x);

/// df/dx, so that x'' = f'(x) / 2 along any solution.
double decoupled_rate_sq_derivative(const SearchParams& params, double x);

}  // namespace gpsearch
