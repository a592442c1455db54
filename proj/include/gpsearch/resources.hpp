#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gpsearch/model.hpp"

namespace gpsearch {

/// Time and space cost of running the search with G = N^kappa and
/// k = N^lambda marked items, where the measurement clock must resolve the
/// peak width.
struct ResourceProfile {
  double kappa;
  double lambda_exp;
  std::int64_t k;
  double G;
  double t_star;
  double delta_t;
  std::int64_t n_clock;
  double qubits;       // log2 N
  double space;        // n_clock + log2 N
  double st_product;   // space * t_star
};

inline constexpr double kDefaultClockConstant = 1.0;

/// k = round(N^lambda) clamped to [1, N-1].
std::int64_t marked_count(std::int64_t n, double lambda_exp);

ResourceProfile resource_profile(std::int64_t n, double lambda_exp, double kappa,
                                 double epsilon = SearchParams::kDefaultEpsilon,
                                 double clock_constant = kDefaultClockConstant);

struct KappaOptimum {
  double kappa;
  ResourceProfile profile;
};

/// Same quantities for an explicit k and G; kappa is reported as
/// log(G)/log(N) (-inf when G == 0).
ResourceProfile resource_profile_at(std::int64_t n, std::int64_t k, double G,
                                    double epsilon = SearchParams::kDefaultEpsilon,
                                    double clock_constant = kDefaultClockConstant);

/// Grid point minimizing space * time; ties go to the smallest kappa.
KappaOptimum optimize_kappa(std::int64_t n, double lambda_exp, std::span<const double> kappa_grid,
                            double epsilon = SearchParams::kDefaultEpsilon,
                            double clock_constant = kDefaultClockConstant);

/// Inclusive grid lo, lo + step, ..., hi (hi included when within step/2).
std::vector<double> make_grid(double lo, double hi, double step);

/// Lower bound on the condensate particle number implied by
/// (N0 log2 N) t*^2 >= N, i.e. max(1, N / (log2 N t*^2)) with t* at G = N^kappa.
double zalka_lower_bound(std::int64_t n, double kappa);

/// ln of the volume sqrt(N / 2^(N-1)) / (N-1)! of the unit regular (N-1)-simplex.
double log_simplex_volume(std::int64_t n);

struct ScalingFit {
  double exponent;
  double intercept;  // ln prefactor
  double r_squared;
};

/// Least-squares slope of ln(value) against ln(N).
ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> points);

}  // namespace gpsearch
