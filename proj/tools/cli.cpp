#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include "gpsearch/analytic.hpp"
#include "gpsearch/csv.hpp"
#include "gpsearch/dynamics.hpp"
#include "gpsearch/errors.hpp"
#include "gpsearch/resources.hpp"
#include "svg.hpp"

namespace gpsearch::cli {
namespace {

double parse_real(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw DomainError(field, "expected a number, got '" + text + "'");
  }
}

struct Range3 {
  double lo, hi;
  double third;
};

Range3 parse_triple(const std::string& text, const std::string& field) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos) throw DomainError(field, "expected a:b:c, got '" + text + "'");
  return {parse_real(text.substr(0, a), field), parse_real(text.substr(a + 1, b - a - 1), field),
          parse_real(text.substr(b + 1), field)};
}

// Flags shared by several subcommands.
struct Common {
  std::string n;
  std::int64_t k = 1;
  std::optional<double> g;
  std::optional<double> G;
  double eps = SearchParams::kDefaultEpsilon;
  std::string out;
  std::string format = "csv";

  void add_problem(CLI::App* app, bool need_n = true) {
    auto* opt = app->add_option("--n", n, "Dimension N (integer or 2^a)");
    if (need_n) opt->required();
    app->add_option("--k", k, "Number of marked items")->capture_default_str();
    auto* og = app->add_option("--g", g, "Raw nonlinearity g");
    auto* oG = app->add_option("--G", G, "Rescaled nonlinearity G = g/(k(N-k))");
    og->excludes(oG);
    oG->excludes(og);
    app->add_option("--eps", eps, "Peak-height deficit epsilon")->capture_default_str();
  }
  void add_output(CLI::App* app) {
    app->add_option("--out", out, "Output file (default: stdout)");
    app->add_option("--format", format, "csv or svg")
        ->check(CLI::IsMember({"csv", "svg"}))
        ->capture_default_str();
  }

  SearchParams params() const {
    const Coefficient c = g ? Coefficient::raw(*g) : Coefficient::rescaled(G.value_or(0.0));
    return make_params(parse_count(n), k, c, eps);
  }
};

// Writes a table to --out (atomically) or the stream.
void emit(const Common& common, const CsvTable& table, std::ostream& out,
          const std::vector<std::size_t>& y_columns, const std::string& title) {
  auto write = [&](std::ostream& os) {
    if (common.format == "svg")
      write_svg_chart(os, table, 0, y_columns, title);
    else
      table.write(os);
  };
  if (common.out.empty()) {
    write(out);
    return;
  }
  const std::filesystem::path target(common.out);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw DomainError("out", "cannot open '" + tmp.string() + "' for writing");
    write(file);
    if (!file.flush()) throw DomainError("out", "write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

double peak_factor(const SearchParams& p) { return 1.0 + p.G() * p.unmarked(); }

double auto_t_end(const SearchParams& p, const GammaPolicy& policy) {
  const double linear_period = std::numbers::pi * std::sqrt(p.dim());
  if (!policy.is_critical()) return linear_period;
  // Blocked repulsive runs have no t*; give the plateau time to settle.
  if (!(peak_factor(p) > 0.0)) return 4.0 * linear_period;
  return 2.0 * runtime(p);
}

double parse_t_end(const std::string& text, const SearchParams& p, const GammaPolicy& policy) {
  if (text == "auto") return auto_t_end(p, policy);
  return parse_real(text, "t-end");
}

// --- simulate --------------------------------------------------------------

struct SimulateOptions {
  Common common;
  std::string gamma = "critical";
  std::string engine = "reduced";
  std::string t_end = "auto";
  std::size_t samples = 2000;
  std::vector<std::int64_t> marked;
  bool compare = false;
  double rtol = 1e-10;
  double atol = 1e-12;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const SearchParams p = o.common.params();
  const GammaPolicy policy = parse_gamma(o.gamma, p.n());
  const double t_end = parse_t_end(o.t_end, p, policy);
  if (o.samples < 1) throw DomainError("samples", "must be at least 1");

  IntegratorConfig cfg;
  cfg.rel_tol = o.rtol;
  cfg.abs_tol = o.atol;
  cfg.sampler = Sampler::uniform(t_end / static_cast<double>(o.samples));

  if (o.compare && !(policy.is_critical() && peak_factor(p) > 0.0))
    throw DomainError("compare-analytic",
                      "the closed form needs --gamma critical and G > -1/(N-k)");

  CsvTable table{{"t", "x", "gamma", "norm_residual"}, {}, {}};
  if (o.engine == "reduced") {
    const Trajectory tr = integrate_reduced(p, policy, t_end, cfg);
    for (std::size_t i = 0; i < tr.size(); ++i)
      table.rows.push_back({tr.times[i], tr.x[i], tr.gamma[i], tr.norm_residual[i]});
  } else if (o.engine == "full") {
    std::vector<std::int64_t> marked = o.marked;
    if (marked.empty())
      for (std::int64_t i = 0; i < p.k(); ++i) marked.push_back(i);
    const FullRun run = integrate_full(p, marked, policy, t_end, cfg);
    const Trajectory& tr = run.trajectory;
    table.header.push_back("leakage");
    for (std::size_t i = 0; i < tr.size(); ++i)
      table.rows.push_back(
          {tr.times[i], tr.x[i], tr.gamma[i], tr.norm_residual[i], run.leakage[i]});
  } else {
    if (!policy.is_critical()) throw DomainError("engine", "decoupled engine needs --gamma critical");
    const DecoupledTrajectory tr = integrate_decoupled(p, t_end, cfg);
    // norm_residual column holds the first-integral residual |x'^2 - f(x)|.
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      table.rows.push_back(
          {tr.times[i], tr.x[i], critical_gamma(p, std::clamp(tr.x[i], 0.0, 1.0)),
           std::abs(tr.rate[i] * tr.rate[i] - decoupled_rate_sq(p, tr.x[i]))});
  }

  if (o.compare) {
    table.header.push_back("x_closed");
    table.header.push_back("residual");
    for (auto& row : table.rows) {
      const double closed = success_probability(p, row[0]);
      const double x = row[1];
      row.push_back(closed);
      row.push_back(x - closed);
    }
  }
  std::vector<std::size_t> ys{1};
  if (o.compare) ys.push_back(table.header.size() - 2);
  emit(o.common, table, out, ys, "success probability, N = " + std::to_string(p.n()));
  return kSuccess;
}

// --- analytic --------------------------------------------------------------

struct AnalyticOptions {
  Common common;
  std::optional<double> t;
  std::string t_range;
  std::optional<double> x;
  std::string gamma_range;
};

std::vector<double> linspace(const Range3& r, const std::string& field) {
  if (r.third < 0 || r.third != std::floor(r.third))
    throw DomainError(field, "step count must be a non-negative integer");
  const auto steps = static_cast<std::size_t>(r.third);
  std::vector<double> v;
  for (std::size_t i = 0; i <= steps; ++i)
    v.push_back(steps == 0 ? r.lo : r.lo + (r.hi - r.lo) * static_cast<double>(i) / r.third);
  return v;
}

int cmd_analytic(const std::string& query, const AnalyticOptions& o, std::ostream& out) {
  const SearchParams p = o.common.params();
  CsvTable table;
  std::vector<std::size_t> ys{1};
  std::string title = query;
  if (query == "x-of-t") {
    std::vector<double> times;
    if (!o.t_range.empty())
      times = linspace(parse_triple(o.t_range, "t-range"), "t-range");
    else if (o.t)
      times = {*o.t};
    else
      throw DomainError("t", "give --t or --t-range");
    table.header = {"t", "x"};
    for (double t : times) table.rows.push_back({t, success_probability(p, t)});
  } else if (query == "t-of-x") {
    if (!o.x) throw DomainError("x", "--x is required");
    table.header = {"x", "t"};
    table.rows.push_back({*o.x, time_to_probability(p, *o.x)});
  } else if (query == "runtime") {
    table.header = {"N", "k", "G", "t_star"};
    table.rows.push_back({p.dim(), p.marked(), p.G(), runtime(p)});
    ys = {3};
  } else if (query == "width") {
    const PeakWidth w = peak_width(p);
    table.header = {"eps", "exact", "taylor_first_term", "remainder_bound", "remainder_extrapolated"};
    table.rows.push_back({p.epsilon(), w.exact, w.taylor_first_term, w.remainder_bound,
                          w.remainder_extrapolated ? 1.0 : 0.0});
  } else {  // spectrum
    if (o.gamma_range.empty()) throw DomainError("gamma-range", "--gamma-range a:b:steps is required");
    const double x = o.x.value_or(p.marked() / p.dim());
    table.header = {"gamma",          "lambda_plus",     "lambda_minus",   "gap",
                    "w_overlap_plus", "s_overlap_plus",  "w_overlap_minus", "s_overlap_minus",
                    "w_ratio_plus",   "w_ratio_minus"};
    for (double gamma : linspace(parse_triple(o.gamma_range, "gamma-range"), "gamma-range")) {
      const Spectrum s = spectrum(p, gamma, x);
      table.rows.push_back({gamma, s.lambda_plus, s.lambda_minus, s.gap, s.w_overlap_plus,
                            s.s_overlap_plus, s.w_overlap_minus, s.s_overlap_minus,
                            s.w_ratio_plus, s.w_ratio_minus});
    }
    ys = {3, 4, 5, 6, 7};
    title = "gap and overlaps, N = " + std::to_string(p.n());
  }
  emit(o.common, table, out, ys, title);
  return kSuccess;
}

// --- sweep -----------------------------------------------------------------

struct SweepOptions {
  Common common;
  std::vector<std::string> n_values;
  std::string n_range;
  std::optional<double> kappa;
  double lambda = 0.0;
  double clock = kDefaultClockConstant;
  bool fit = false;
  std::size_t workers = 0;
};

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  std::vector<std::int64_t> ns;
  for (const auto& v : o.n_values) ns.push_back(parse_count(v));
  if (!o.n_range.empty()) {
    const auto r = parse_power_range(o.n_range);
    ns.insert(ns.end(), r.begin(), r.end());
  }
  if (ns.empty()) throw DomainError("n", "give --n values or --n-range");
  if (o.kappa.has_value() == (o.common.G.has_value() || o.common.g.has_value()))
    throw DomainError("kappa", "give exactly one of --kappa or --G/--g");

  std::vector<ResourceProfile> rows(ns.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < ns.size(); i = next++) {
      try {
        if (o.kappa) {
          rows[i] = resource_profile(ns[i], o.lambda, *o.kappa, o.common.eps, o.clock);
        } else {
          const std::int64_t k = marked_count(ns[i], o.lambda);
          const double nd = static_cast<double>(ns[i]);
          const double G = o.common.G ? *o.common.G : *o.common.g / (k * (nd - k));
          rows[i] = resource_profile_at(ns[i], k, G, o.common.eps, o.clock);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t pool = std::min(ns.size(), o.workers ? o.workers : hw);
  std::vector<std::jthread> threads;
  for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(work);
  threads.clear();
  if (failure) std::rethrow_exception(failure);

  CsvTable table{{"N", "k", "G", "t_star", "delta_t", "n_clock", "st_product"}, {}, {}};
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto& r = rows[i];
    table.rows.push_back({static_cast<double>(ns[i]), static_cast<double>(r.k), r.G, r.t_star,
                          r.delta_t, static_cast<double>(r.n_clock), r.st_product});
  }
  if (o.fit) {
    for (std::size_t col = 3; col < table.header.size(); ++col) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& row : table.rows) pts.emplace_back(row[0], row[col]);
      const ScalingFit f = fit_scaling_exponent(pts);
      table.comments.push_back(" fit," + table.header[col] + "," + format_number(f.exponent) +
                               "," + format_number(f.r_squared));
    }
  }
  emit(o.common, table, out, {3, 4}, "resource sweep");
  return kSuccess;
}

// --- resources -------------------------------------------------------------

struct ResourcesOptions {
  Common common;
  std::optional<double> kappa;
  double lambda = 0.0;
  double clock = kDefaultClockConstant;
  bool optimize = false;
  std::string grid = "-1:0:0.01";
  bool zalka = false;
  bool simplex = false;
};

int cmd_resources(const ResourcesOptions& o, std::ostream& out) {
  const std::int64_t n = parse_count(o.common.n);
  CsvTable table{{"N"}, {{static_cast<double>(n)}}, {}};
  auto add = [&](const std::string& name, double v) {
    table.header.push_back(name);
    table.rows[0].push_back(v);
  };

  std::optional<double> kappa = o.kappa;
  std::optional<ResourceProfile> profile;
  if (o.optimize) {
    const Range3 g = parse_triple(o.grid, "grid");
    const auto grid = make_grid(g.lo, g.hi, g.third);
    const KappaOptimum best = optimize_kappa(n, o.lambda, grid, o.common.eps, o.clock);
    kappa = best.kappa;
    profile = best.profile;
  } else if (kappa) {
    profile = resource_profile(n, o.lambda, *kappa, o.common.eps, o.clock);
  }
  if (profile) {
    add("lambda", profile->lambda_exp);
    add("kappa", profile->kappa);
    add("k", static_cast<double>(profile->k));
    add("G", profile->G);
    add("t_star", profile->t_star);
    add("delta_t", profile->delta_t);
    add("n_clock", static_cast<double>(profile->n_clock));
    add("qubits", profile->qubits);
    add("space", profile->space);
    add("st_product", profile->st_product);
  }
  if (o.zalka) {
    if (!kappa) throw DomainError("kappa", "--zalka needs --kappa or --optimize");
    add("zalka_bound", zalka_lower_bound(n, *kappa));
  }
  if (o.simplex) add("log_simplex_volume", log_simplex_volume(n));
  if (table.header.size() == 1)
    throw DomainError("kappa", "nothing to report: give --kappa, --optimize or --simplex");
  emit(o.common, table, out, {1}, "resources");
  return kSuccess;
}

// --- verify ----------------------------------------------------------------

struct VerifyOptions {
  Common common;
  std::size_t samples = 2000;
  double tol = 1e-5;
  double rtol = 1e-10;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  if (o.samples < 5)
    throw DomainError("samples", "need at least 5 samples, got " + std::to_string(o.samples));
  const SearchParams p = o.common.params();
  const GammaPolicy policy = GammaPolicy::critical();
  const double t_end = auto_t_end(p, policy);
  IntegratorConfig cfg;
  cfg.rel_tol = o.rtol;
  cfg.sampler = Sampler::uniform(t_end / static_cast<double>(o.samples - 1));
  const Trajectory tr = integrate_reduced(p, policy, t_end, cfg);
  const VerificationReport r = verify_identities(tr, p);

  const std::vector<std::pair<std::string, double>> checks{
      {"max_norm_residual", r.max_norm_residual},
      {"max_subspace_leakage", r.max_subspace_leakage},
      {"max_y_identity_residual", r.max_y_identity_residual},
      {"max_z_identity_residual", r.max_z_identity_residual},
      {"max_uncoupled_residual", r.max_uncoupled_residual},
      {"max_rescaled_time_residual", r.max_rescaled_time_residual}};
  CsvTable table{{}, {{}}, {}};
  bool ok = true;
  for (const auto& [name, v] : checks) {
    table.header.push_back(name);
    table.rows[0].push_back(v);
    if (!(v < o.tol)) {
      ok = false;
      err << "identity failed: " << name << " = " << format_number(v)
          << " >= tol " << format_number(o.tol) << '\n';
    }
  }
  emit(o.common, table, out, {0}, "verification");
  return ok ? kSuccess : kVerificationFailure;
}

}  // namespace

std::int64_t parse_count(const std::string& text) {
  if (text.empty()) throw DomainError("N", "empty value");
  const auto caret = text.find('^');
  if (caret != std::string::npos) {
    const std::string base = text.substr(0, caret), exp = text.substr(caret + 1);
    if (base != "2" || exp.empty() || !std::all_of(exp.begin(), exp.end(), ::isdigit))
      throw DomainError("N", "power notation must be 2^a, got '" + text + "'");
    const int a = std::stoi(exp);
    if (a > 62) throw DomainError("N", "2^" + exp + " overflows");
    return std::int64_t{1} << a;
  }
  if (!std::all_of(text.begin(), text.end(), ::isdigit) || text.size() > 18)
    throw DomainError("N", "expected a positive integer or 2^a, got '" + text + "'");
  return std::stoll(text);
}

std::vector<std::int64_t> parse_power_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw DomainError("n-range", "expected 2^a:2^b");
  const std::int64_t lo = parse_count(text.substr(0, colon));
  const std::int64_t hi = parse_count(text.substr(colon + 1));
  if (hi < lo) throw DomainError("n-range", "upper end below lower end");
  std::vector<std::int64_t> out;
  for (std::int64_t v = lo; v <= hi; v *= 2) {
    out.push_back(v);
    if (v > (std::int64_t{1} << 61)) break;
  }
  return out;
}

GammaPolicy parse_gamma(const std::string& text, std::int64_t n) {
  if (text == "critical") return GammaPolicy::critical();
  if (text.rfind("const:", 0) == 0) {
    const std::string v = text.substr(6);
    if (v == "1/N") return GammaPolicy::constant(1.0 / static_cast<double>(n));
    return GammaPolicy::constant(parse_real(v, "gamma"));
  }
  if (text.rfind("file:", 0) == 0) {
    const std::string path = text.substr(5);
    std::ifstream in(path);
    if (!in) throw DomainError("gamma", "cannot read schedule '" + path + "'");
    return GammaPolicy::schedule(read_schedule(in));
  }
  throw DomainError("gamma", "expected critical, const:<v> or file:<path>, got '" + text + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlinear continuous-time quantum search toolkit", "gpsearch"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Integrate the dynamics and emit x(t)");
  sim.common.add_problem(simulate);
  sim.common.add_output(simulate);
  simulate->add_option("--gamma", sim.gamma, "critical | const:<v> | const:1/N | file:<path>")
      ->capture_default_str();
  simulate->add_option("--engine", sim.engine, "reduced | full | decoupled")
      ->check(CLI::IsMember({"reduced", "full", "decoupled"}))
      ->capture_default_str();
  simulate->add_option("--t-end", sim.t_end, "End time or 'auto'")->capture_default_str();
  simulate->add_option("--samples", sim.samples, "Uniform output intervals")->capture_default_str();
  simulate->add_option("--marked", sim.marked, "Marked indices for the full engine")
      ->delimiter(',');
  simulate->add_flag("--compare-analytic", sim.compare, "Append closed-form x and residual");
  simulate->add_option("--rtol", sim.rtol)->capture_default_str();
  simulate->add_option("--atol", sim.atol)->capture_default_str();

  AnalyticOptions ana;
  auto* analytic = app.add_subcommand("analytic", "Evaluate closed forms");
  analytic->require_subcommand(1);
  std::string query;
  for (const char* name : {"x-of-t", "t-of-x", "runtime", "width", "spectrum"}) {
    auto* q = analytic->add_subcommand(name);
    ana.common.add_problem(q);
    ana.common.add_output(q);
    q->callback([&query, name] { query = name; });
    if (std::string(name) == "x-of-t") {
      q->add_option("--t", ana.t);
      q->add_option("--t-range", ana.t_range, "a:b:steps");
    }
    if (std::string(name) == "t-of-x" || std::string(name) == "spectrum")
      q->add_option("--x", ana.x);
    if (std::string(name) == "spectrum")
      q->add_option("--gamma-range", ana.gamma_range, "a:b:steps");
  }

  SweepOptions swp;
  auto* sweep = app.add_subcommand("sweep", "Closed-form resource quantities over N");
  {
    auto* og = sweep->add_option("--g", swp.common.g);
    auto* oG = sweep->add_option("--G", swp.common.G);
    og->excludes(oG);
    oG->excludes(og);
  }
  sweep->add_option("--n", swp.n_values, "N values (integer or 2^a)")->delimiter(',');
  sweep->add_option("--n-range", swp.n_range, "2^a:2^b");
  sweep->add_option("--kappa", swp.kappa, "G = N^kappa");
  sweep->add_option("--lambda", swp.lambda, "k = N^lambda")->capture_default_str();
  sweep->add_option("--eps", swp.common.eps)->capture_default_str();
  sweep->add_option("--clock", swp.clock, "Clock constant")->capture_default_str();
  sweep->add_option("--workers", swp.workers, "Worker threads (0 = hardware)");
  sweep->add_flag("--fit", swp.fit, "Append log-log exponents");
  swp.common.add_output(sweep);

  ResourcesOptions res;
  auto* resources = app.add_subcommand("resources", "Resource accounting");
  resources->add_option("--n", res.common.n)->required();
  resources->add_option("--kappa", res.kappa);
  resources->add_option("--lambda", res.lambda)->capture_default_str();
  resources->add_option("--eps", res.common.eps)->capture_default_str();
  resources->add_option("--clock", res.clock)->capture_default_str();
  resources->add_flag("--optimize", res.optimize);
  resources->add_option("--grid", res.grid, "lo:hi:step")->capture_default_str();
  resources->add_flag("--zalka", res.zalka);
  resources->add_flag("--simplex", res.simplex);
  res.common.add_output(resources);

  VerifyOptions ver;
  auto* verify = app.add_subcommand("verify", "Check the decoupling identities");
  ver.common.add_problem(verify);
  ver.common.add_output(verify);
  verify->add_option("--samples", ver.samples)->capture_default_str();
  verify->add_option("--tol", ver.tol)->capture_default_str();
  verify->add_option("--rtol", ver.rtol)->capture_default_str();

  std::vector<const char*> argv{"gpsearch"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (analytic->parsed()) return cmd_analytic(query, ana, out);
    if (sweep->parsed()) return cmd_sweep(swp, out);
    if (resources->parsed()) return cmd_resources(res, out);
    return cmd_verify(ver, out, err);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace gpsearch::cli
