#include "gpsearch/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpsearch/analytic.hpp"
#include "gpsearch/errors.hpp"

namespace gpsearch {

SearchParams make_params(std::int64_t n, std::int64_t k, Coefficient coeff, double epsilon) {
  if (n < 2) throw DomainError("N", "dimension must be at least 2, got " + std::to_string(n));
  if (k < 1 || k >= n)
    throw DomainError("k", "marked count must satisfy 1 <= k < N, got " + std::to_string(k));
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("epsilon", "must lie in (0, 1), got " + std::to_string(epsilon));
  if (!std::isfinite(coeff.value))
    throw DomainError(coeff.kind == Coefficient::Kind::raw ? "g" : "G", "must be finite");

  const double scale = static_cast<double>(k) * static_cast<double>(n - k);
  const double g = coeff.kind == Coefficient::Kind::raw ? coeff.value : coeff.value * scale;
  const double G = coeff.kind == Coefficient::Kind::raw ? coeff.value / scale : coeff.value;
  return SearchParams(n, k, g, G, epsilon);
}

SearchParams SearchParams::with_epsilon(double epsilon) const {
  return make_params(n_, k_, Coefficient::rescaled(G_), epsilon);
}

ReducedState ReducedState::equal_superposition(const SearchParams& params) {
  return {Complex(std::sqrt(params.marked() / params.dim()), 0.0),
          Complex(std::sqrt(params.unmarked() / params.dim()), 0.0)};
}

double FullState::norm_sq() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s;
}

double FullState::marked_probability() const {
  double s = 0.0;
  for (auto i : marked) s += std::norm(amplitudes[static_cast<std::size_t>(i)]);
  return s;
}

std::vector<std::int64_t> normalize_marked(const SearchParams& params,
                                           std::vector<std::int64_t> marked) {
  std::sort(marked.begin(), marked.end());
  if (std::adjacent_find(marked.begin(), marked.end()) != marked.end())
    throw DomainError("marked", "indices must be distinct");
  if (static_cast<std::int64_t>(marked.size()) != params.k())
    throw DomainError("marked", "expected " + std::to_string(params.k()) + " indices, got " +
                                    std::to_string(marked.size()));
  if (!marked.empty() && (marked.front() < 0 || marked.back() >= params.n()))
    throw DomainError("marked", "indices must lie in [0, N)");
  return marked;
}

FullState embed(const SearchParams& params, const ReducedState& reduced,
                std::vector<std::int64_t> marked) {
  marked = normalize_marked(params, std::move(marked));
  if (std::abs(reduced.norm_sq() - 1.0) > kNormTolerance)
    throw DomainError("reduced", "state is not normalized");

  const Complex on_marked = reduced.alpha / std::sqrt(params.marked());
  const Complex off_marked = reduced.beta / std::sqrt(params.unmarked());
  FullState full{std::vector<Complex>(static_cast<std::size_t>(params.n()), off_marked),
                 std::move(marked)};
  for (auto i : full.marked) full.amplitudes[static_cast<std::size_t>(i)] = on_marked;
  return full;
}

Projection project(const FullState& full) {
  const auto n = static_cast<std::int64_t>(full.amplitudes.size());
  const auto k = static_cast<std::int64_t>(full.marked.size());
  if (k < 1 || k >= n) throw DomainError("marked", "need 1 <= |marked| < N");

  Complex total{};
  for (const auto& a : full.amplitudes) total += a;
  Complex marked_sum{};
  for (auto i : full.marked) marked_sum += full.amplitudes[static_cast<std::size_t>(i)];
  const Complex unmarked_sum = total - marked_sum;

  const double kd = static_cast<double>(k);
  const double rest = static_cast<double>(n - k);
  ReducedState r{marked_sum / std::sqrt(kd), unmarked_sum / std::sqrt(rest)};

  // Residual after removing the in-subspace part, accumulated directly so
  // small leakage is not lost to cancellation.
  const Complex on_marked = r.alpha / std::sqrt(kd);
  const Complex off_marked = r.beta / std::sqrt(rest);
  double leak = 0.0;
  std::size_t next = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const bool is_marked = next < full.marked.size() && full.marked[next] == i;
    if (is_marked) ++next;
    leak += std::norm(full.amplitudes[static_cast<std::size_t>(i)] -
                      (is_marked ? on_marked : off_marked));
  }
  return {r, std::sqrt(leak)};
}

GammaPolicy GammaPolicy::constant(double value) {
  if (!std::isfinite(value) || value <= 0.0)
    throw DomainError("gamma", "constant gamma must be finite and positive");
  return GammaPolicy(Constant{value});
}

GammaPolicy GammaPolicy::schedule(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw DomainError("gamma", "schedule needs at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto [t, v] = knots[i];
    if (!std::isfinite(t) || !std::isfinite(v) || v <= 0.0)
      throw DomainError("gamma", "schedule values must be finite and positive");
    if (i > 0 && !(t > knots[i - 1].first))
      throw DomainError("gamma", "schedule times must be strictly increasing");
  }
  return GammaPolicy(Schedule{std::move(knots)});
}

double GammaPolicy::evaluate(const SearchParams& params, double t, double marked_prob,
                             double unmarked_prob) const {
  struct Visitor {
    const SearchParams& p;
    double t, xm, xu;
    double operator()(const Constant& c) const { return c.value; }
    double operator()(const Critical&) const { return critical_gamma(p, xm, xu); }
    double operator()(const Schedule& s) const {
      const auto& kn = s.knots;
      if (t <= kn.front().first) return kn.front().second;
      if (t >= kn.back().first) return kn.back().second;
      auto hi = std::upper_bound(kn.begin(), kn.end(), t,
                                 [](double v, const auto& knot) { return v < knot.first; });
      auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  };
  return std::visit(Visitor{params, t, marked_prob, unmarked_prob}, rule_);
}

void Trajectory::push(double t, const ReducedState& s, double g) {
  times.push_back(t);
  states.push_back(s);
  x.push_back(s.x());
  gamma.push_back(g);
  norm_residual.push_back(std::abs(s.norm_sq() - 1.0));
}

}  // namespace gpsearch
