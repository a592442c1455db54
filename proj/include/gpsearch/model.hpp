#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace gpsearch {

using Complex = std::complex<double>;

/// Norm tolerance used when validating states handed to the model layer.
inline constexpr double kNormTolerance = 1e-9;

/// Nonlinearity coefficient as supplied by the caller: either the raw
/// Gross-Pitaevskii coefficient g or the rescaled G = g / (k (N - k)).
struct Coefficient {
  enum class Kind { raw, rescaled };
  Kind kind;
  double value;

  static Coefficient raw(double g) { return {Kind::raw, g}; }
  static Coefficient rescaled(double G) { return {Kind::rescaled, G}; }
};

/// A search instance: dimension, number of marked items, nonlinearity and
/// the peak-height deficit used by width queries.
class SearchParams {
 public:
  static constexpr double kDefaultEpsilon = 0.1;

  std::int64_t n() const { return n_; }
  std::int64_t k() const { return k_; }
  double g() const { return g_; }
  double G() const { return G_; }
  double epsilon() const { return epsilon_; }

  /// N and k as doubles, for formulas.
  double dim() const { return static_cast<double>(n_); }
  double marked() const { return static_cast<double>(k_); }
  double unmarked() const { return static_cast<double>(n_ - k_); }

  SearchParams with_epsilon(double epsilon) const;

 private:
  friend SearchParams make_params(std::int64_t, std::int64_t, Coefficient, double);
  SearchParams(std::int64_t n, std::int64_t k, double g, double G, double eps)
      : n_(n), k_(k), g_(g), G_(G), epsilon_(eps) {}

  std::int64_t n_;
  std::int64_t k_;
  double g_;
  double G_;
  double epsilon_;
};

/// Validates the bounds and fills in whichever of g / G was not given.
/// Throws DomainError naming the offending field.
SearchParams make_params(std::int64_t n, std::int64_t k, Coefficient coeff,
                         double epsilon = SearchParams::kDefaultEpsilon);

/// Amplitudes on the normalized marked superposition (alpha) and the
/// normalized unmarked superposition (beta).
struct ReducedState {
  Complex alpha;
  Complex beta;

  double x() const { return std::norm(alpha); }
  double norm_sq() const { return std::norm(alpha) + std::norm(beta); }

  /// The uniform superposition |s>: alpha = sqrt(k/N), beta = sqrt((N-k)/N).
  static ReducedState equal_superposition(const SearchParams& params);
};

struct FullState {
  std::vector<Complex> amplitudes;
  std::vector<std::int64_t> marked;  // sorted, distinct

  double norm_sq() const;
  /// Probability on the marked set.
  double marked_probability() const;
};

/// Checks a marked set against the dimension and k, returning it sorted.
std::vector<std::int64_t> normalize_marked(const SearchParams& params,
                                           std::vector<std::int64_t> marked);

FullState embed(const SearchParams& params, const ReducedState& reduced,
                std::vector<std::int64_t> marked);

struct Projection {
  ReducedState reduced;
  double leakage;  // norm of the component outside span{marked, unmarked}
};

Projection project(const FullState& full);

/// Control law for the hopping rate gamma(t).
class GammaPolicy {
 public:
  struct Constant {
    double value;
  };
  struct Critical {};
  struct Schedule {
    std::vector<std::pair<double, double>> knots;  // (t, gamma), t increasing
  };

  static GammaPolicy constant(double value);
  static GammaPolicy critical() { return GammaPolicy(Critical{}); }
  static GammaPolicy schedule(std::vector<std::pair<double, double>> knots);

  bool is_critical() const { return std::holds_alternative<Critical>(rule_); }
  const std::variant<Constant, Critical, Schedule>& rule() const { return rule_; }

  /// gamma at time t. Critical evaluates the instantaneous critical value
  /// from the marked / unmarked probabilities.
  double evaluate(const SearchParams& params, double t, double marked_prob,
                  double unmarked_prob) const;

 private:
  explicit GammaPolicy(std::variant<Constant, Critical, Schedule> rule)
      : rule_(std::move(rule)) {}

  std::variant<Constant, Critical, Schedule> rule_;
};

/// Time-ordered samples of an integration.
struct Trajectory {
  std::vector<double> times;
  std::vector<ReducedState> states;
  std::vector<double> x;
  std::vector<double> gamma;
  std::vector<double> norm_residual;

  std::size_t size() const { return times.size(); }
  void push(double t, const ReducedState& s, double g);
};

}  // namespace gpsearch
