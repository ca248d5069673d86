#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "berman/error.hpp"
#include "berman/evt_limits.hpp"
#include "berman/format.hpp"
#include "report.hpp"
#include "svg.hpp"

#ifndef BERMAN_VERSION
#define BERMAN_VERSION "0.0.0"
#endif

namespace berman::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Metadata metadata(const RunContext& ctx, std::optional<std::uint64_t> seed) {
  return {ctx.config_hash, seed, BERMAN_VERSION};
}

std::uint64_t resolve_seed(const RunContext& ctx, const Section& s) {
  if (ctx.seed_override) return *ctx.seed_override;
  if (!s.has("seed")) throw ConfigError("missing key 'seed' (or pass --seed)");
  return s.count("seed");
}

std::size_t require_reps(const Section& s, std::string_view key = "reps") {
  const auto reps = s.count(key);
  if (reps == 0) throw ConfigError(s.path(key) + ": must be at least 1");
  return reps;
}

void emit(const RunContext& ctx, const std::string& name, const CsvTable& table, std::optional<std::uint64_t> seed) {
  write_text(ctx.out_dir / (name + ".csv"), table.render(metadata(ctx, seed)));
}

void emit_plot(const RunContext& ctx, const std::string& name, const PlotSpec& spec, const std::vector<Series>& series) {
  if (ctx.plot) write_text(ctx.out_dir / (name + ".svg"), render_svg(spec, series));
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Empirical P–P points (target(x_(i)), i/m) of a sorted sample.
Series pp_series(const std::string& label, const std::vector<double>& xs, const std::function<double(double)>& cdf) {
  Series s{label, {}, {}};
  const std::size_t m = xs.size();
  const std::size_t stride = std::max<std::size_t>(1, m / 500);
  for (std::size_t i = 0; i < m; i += stride) {
    s.x.push_back(cdf(xs[i]));
    s.y.push_back(static_cast<double>(i + 1) / static_cast<double>(m));
  }
  return s;
}

BoundReport bound_for(const std::string& family, const PairTerms& terms, double w, const ScalingModel* scaling,
                      double eps, double w_min, double a, double b, const std::string& path) {
  if (family == "classical") return berman_bound_classical(terms, w);
  if (family == "uniform-scaling") return bound_uniform_scaling(terms, w);
  if (family == "exponential-scaling") return bound_exponential_scaling(terms, w, a, b);
  if (!scaling) throw ConfigError("family '" + family + "' needs a 'scaling' section");
  if (family == "independent") return theorem_bound(terms, w, *scaling, Coupling::Independent, eps, w_min);
  if (family == "comonotone") return theorem_bound(terms, w, *scaling, Coupling::Comonotone, eps, w_min);
  if (family == "A-independent") return bound_A_independent(terms, w, *scaling, eps, w_min);
  if (family == "A-comonotone") return bound_A_comonotone(terms, w, *scaling, eps, w_min);
  if (family == "B-independent") return bound_B_independent(terms, w, *scaling, eps, w_min);
  if (family == "B-comonotone") return bound_B_comonotone(terms, w, *scaling, eps, w_min);
  throw ConfigError(path + ": unknown bound family '" + family + "'");
}

}  // namespace

int cmd_bound(const RunContext& ctx, std::ostream& log) {
  const Section s(ctx.config, "", {"subcommand", "correlation", "correlation2", "scaling", "w_grid", "families",
                                   "epsilon", "w_min", "exponential_ab"});
  std::vector<std::string> families{"classical", "uniform-scaling", "exponential-scaling", "independent", "comonotone"};
  if (s.has("families")) {
    families.clear();
    const auto& f = s.raw("families");
    if (!f.is_array() || f.empty()) throw ConfigError("families: expected a non-empty array of names");
    for (const auto& name : f) {
      if (!name.is_string()) throw ConfigError("families: expected strings");
      families.push_back(name.get<std::string>());
    }
  }
  const auto w_grid = s.numbers("w_grid");
  if (w_grid.empty()) throw ConfigError("w_grid: must not be empty");
  const double eps = s.number_or("epsilon", kDefaultEpsilon);
  const double w_min = s.number_or("w_min", kDefaultWMin);
  std::vector<double> ab{0.5, 0.5};
  if (s.has("exponential_ab")) {
    ab = s.numbers("exponential_ab");
    if (ab.size() != 2) throw ConfigError("exponential_ab: expected [a, b]");
  }
  std::optional<ScalingModel> scaling;
  if (s.has("scaling")) scaling = parse_scaling(s.raw("scaling"), "scaling");
  const auto terms = pairwise_terms(parse_correlation(s.raw("correlation"), "correlation"),
                                    parse_correlation(s.raw("correlation2"), "correlation2"));

  CsvTable table({"family", "regime", "coupling", "w", "epsilon", "w_min", "advisory", "pairs", "value"});
  std::vector<Series> series;
  for (const auto& family : families) {
    Series line{family, {}, {}};
    for (double w : w_grid) {
      const auto r = bound_for(family, terms, w, scaling ? &*scaling : nullptr, eps, w_min, ab[0], ab[1], "families");
      table.cell(std::string(to_string(r.family)))
          .cell(r.regime)
          .cell(std::string(to_string(r.coupling)))
          .cell(r.w)
          .cell(r.epsilon)
          .cell(r.w_min)
          .cell(yes_no(r.advisory))
          .cell(static_cast<std::uint64_t>(r.contributions.size()))
          .cell(r.value);
      table.end_row();
      line.x.push_back(w);
      line.y.push_back(r.value);
    }
    series.push_back(std::move(line));
  }
  emit(ctx, "bound", table, std::nullopt);
  emit_plot(ctx, "bound", {"Comparison bounds", "w", "bound", false, true, false}, series);
  log << "bound: " << table.rows() << " rows, " << terms.pairs.size() << " differing pairs\n";
  return kExitOk;
}

int cmd_delta(const RunContext& ctx, std::ostream& log) {
  const Section s(ctx.config, "", {"subcommand", "correlation", "correlation2", "scaling", "thresholds", "reps", "seed",
                                   "tol", "antithetic", "epsilon", "w_min"});
  const auto L1 = parse_correlation(s.raw("correlation"), "correlation");
  const auto L2 = parse_correlation(s.raw("correlation2"), "correlation2");
  if (L1.dim() != L2.dim()) {
    throw ConfigError("correlation and correlation2 differ in dimension (" + std::to_string(L1.dim()) + " vs " +
                      std::to_string(L2.dim()) + ")");
  }
  const auto scaling = s.has("scaling") ? parse_scaling(s.raw("scaling"), "scaling") : ScalingModel::degenerate();
  const auto spec = parse_thresholds(s.raw("thresholds"), "thresholds", L1.dim());
  const auto reps = require_reps(s);
  const auto seed = resolve_seed(ctx, s);
  const double tol = s.number_or("tol", 1e-6);
  const double eps = s.number_or("epsilon", kDefaultEpsilon);
  const double w_min = s.number_or("w_min", kDefaultWMin);
  const MCOptions opts{ctx.workers, s.flag_or("antithetic", false)};

  const auto mc = mc_delta(L1, L2, scaling, spec, reps, seed, opts);
  double oracle = NAN, oracle_err = NAN;
  if (L1.dim() <= kMaxQuadDim) {
    const auto q = quad_delta(L1, L2, scaling, spec, tol);
    oracle = q.value;
    oracle_err = q.error;
  }
  const auto terms = pairwise_terms(L1, L2);
  const double w = spec.w();
  const auto classical = berman_bound_classical(terms, w);
  const auto scaled = theorem_bound(terms, w, scaling, spec.coupling, eps, w_min);
  const bool violation = std::abs(mc.estimate) - 3.0 * mc.std_error > scaled.value;

  CsvTable table({"dim", "w", "estimate", "stderr", "oracle", "oracle_error", "bound_classical", "bound_scaled",
                  "violation"});
  table.cell(static_cast<std::uint64_t>(L1.dim()))
      .cell(w)
      .cell(mc.estimate)
      .cell(mc.std_error)
      .cell(oracle)
      .cell(oracle_err)
      .cell(classical.value)
      .cell(scaled.value)
      .cell(yes_no(violation));
  table.end_row();
  emit(ctx, "delta", table, seed);
  log << "delta: estimate " << format_double(mc.estimate) << " ± " << format_double(mc.std_error)
      << (violation ? " VIOLATES " : " within ") << "bound " << format_double(scaled.value) << "\n";
  return kExitOk;
}

namespace {

int limit_array(const RunContext& ctx, std::ostream& log) {
  const Section s(ctx.config, "", {"subcommand", "model", "delta", "cutoff", "scaling", "n", "reps", "seed", "coupling",
                                   "theta_reps"});
  const auto delta = s.has("delta") ? s.numbers("delta") : std::vector<double>{};
  const auto J = s.count_or("cutoff", delta.size());
  const auto scaling = parse_scaling(s.raw("scaling"), "scaling");
  const auto n = s.count("n");
  const auto reps = require_reps(s);
  const auto seed = resolve_seed(ctx, s);
  const auto coupling = s.has("coupling") ? parse_coupling(s.raw("coupling"), "coupling") : Coupling::Comonotone;

  if (delta.size() < J) throw ConfigError("cutoff: exceeds the number of delta values");
  double theta = 1.0, theta_se = 0.0;
  if (J == 1) {
    theta = extremal_index_quad({{delta[0]}, 2}).value;
  } else if (J >= 2) {
    const auto t = extremal_index_mc({std::vector<double>(delta.begin(), delta.begin() + static_cast<long>(J)), J + 1},
                                     s.count_or("theta_reps", 1000000), seed, ctx.workers);
    theta = t.value;
    theta_se = t.std_error;
  }
  const auto sample = simulate_array_maxima(delta, J, scaling, n, reps, seed, ctx.workers, coupling);
  auto target = [theta](double x) { return std::exp(-theta * std::exp(-x)); };
  const auto xs = sorted(sample.values);
  const double ks = ks_distance(xs, target);
  double mean = 0.0;
  for (double v : sample.values) mean += v;
  mean /= static_cast<double>(reps);

  CsvTable rows({"rep", "value"});
  for (std::size_t r = 0; r < reps; ++r) {
    rows.cell(static_cast<std::uint64_t>(r)).cell(sample.values[r]);
    rows.end_row();
  }
  CsvTable summary({"statistic", "value"});
  auto stat = [&](const char* name, double v) {
    summary.cell(std::string(name)).cell(v);
    summary.end_row();
  };
  stat("n", static_cast<double>(n));
  stat("reps", static_cast<double>(reps));
  stat("a_n", sample.norming.a);
  stat("b_n", sample.norming.b);
  stat("theta", theta);
  stat("theta_stderr", theta_se);
  stat("clamp_events", static_cast<double>(sample.clamp_events));
  stat("mean", mean);
  stat("ks", ks);
  emit(ctx, "limit", rows, seed);
  emit(ctx, "limit_summary", summary, seed);
  emit_plot(ctx, "limit", {"P-P plot against exp(-theta e^-x)", "target CDF", "empirical CDF", false, false, true},
            {pp_series("normalized maxima", xs, target)});
  log << "limit: KS " << format_double(ks) << " against theta = " << format_double(theta) << "\n";
  return kExitOk;
}

int limit_bivariate(const RunContext& ctx, std::ostream& log) {
  const Section s(ctx.config, "", {"subcommand", "model", "lambda", "scaling", "mask", "n", "reps", "seed", "grid"});
  const double lambda = s.extended("lambda");
  const auto scaling = parse_scaling(s.raw("scaling"), "scaling");
  MissingDataSpec miss{MaskKind::Bernoulli, 1.0};
  if (s.has("mask")) {
    const auto m = s.child("mask", {"kind", "eta"});
    const auto kind = m.text_or("kind", "bernoulli");
    if (kind != "bernoulli" && kind != "deterministic") throw ConfigError("mask.kind: expected bernoulli or deterministic");
    miss.kind = kind == "bernoulli" ? MaskKind::Bernoulli : MaskKind::Deterministic;
    miss.eta = m.number("eta");
  }
  const auto n = s.count("n");
  const auto reps = require_reps(s);
  const auto seed = resolve_seed(ctx, s);

  struct Point {
    std::array<double, 4> x, y;
  };
  std::vector<Point> grid;
  if (s.has("grid")) {
    const auto& g = s.raw("grid");
    if (!g.is_array()) throw ConfigError("grid: expected an array of {x, y} points");
    for (std::size_t k = 0; k < g.size(); ++k) {
      const std::string path = "grid[" + std::to_string(k) + "]";
      const Section p(g[k], path, {"x", "y"});
      const auto x = p.numbers("x"), y = p.numbers("y");
      if (x.size() != 4 || y.size() != 4) throw ConfigError(path + ": x and y need four entries");
      if (!(x[0] <= x[2] && x[1] <= x[3] && y[0] <= y[2] && y[1] <= y[3])) {
        throw ConfigError(path + ": observed-subset thresholds must not exceed the full-sample ones");
      }
      grid.push_back({{x[0], x[1], x[2], x[3]}, {y[0], y[1], y[2], y[3]}});
    }
  }

  const auto sample = simulate_bivariate_missing({lambda}, scaling, miss, n, reps, seed, ctx.workers);
  std::vector<std::string> header{"rep"};
  for (const char* c : kBivariateColumns) header.emplace_back(c);
  CsvTable rows(header);
  for (std::size_t r = 0; r < reps; ++r) {
    rows.cell(static_cast<std::uint64_t>(r));
    for (double v : sample.rows[r]) rows.cell(v);
    rows.end_row();
  }

  CsvTable summary({"statistic", "value"});
  auto stat = [&](const std::string& name, double v) {
    summary.cell(name).cell(v);
    summary.end_row();
  };
  stat("n", static_cast<double>(n));
  stat("reps", static_cast<double>(reps));
  stat("a_n", sample.norming.a);
  stat("b_n", sample.norming.b);
  stat("lambda0", sample.lambda0);
  stat("eta", sample.eta);
  std::vector<double> col(reps);
  std::vector<Series> pp;
  for (std::size_t c = 4; c < 8; ++c) {
    for (std::size_t r = 0; r < reps; ++r) col[r] = sample.rows[r][c];
    const auto xs = sorted(col);
    stat(std::string("ks_") + kBivariateColumns[c], ks_distance(xs, gumbel));
    pp.push_back(pp_series(kBivariateColumns[c], xs, gumbel));
  }
  double sup = grid.empty() ? NAN : 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double emp = empirical_missing_cdf(sample, grid[k].x, grid[k].y);
    const double tgt = missing_mixture_cdf(grid[k].x, grid[k].y, lambda, sample.eta);
    stat("grid_" + std::to_string(k) + "_empirical", emp);
    stat("grid_" + std::to_string(k) + "_target", tgt);
    sup = std::max(sup, std::abs(emp - tgt));
  }
  stat("grid_sup", sup);
  emit(ctx, "limit", rows, seed);
  emit(ctx, "limit_summary", summary, seed);
  emit_plot(ctx, "limit", {"P-P plot of full-sample margins against Gumbel", "target CDF", "empirical CDF", false, false,
                           true},
            pp);
  log << "limit: " << reps << " bivariate replications, grid sup " << format_double(sup) << "\n";
  return kExitOk;
}

}  // namespace

int cmd_limit(const RunContext& ctx, std::ostream& log) {
  if (!ctx.config.is_object() || !ctx.config.contains("model")) throw ConfigError("missing key 'model'");
  const auto& m = ctx.config["model"];
  if (m == "array-maxima") return limit_array(ctx, log);
  if (m == "bivariate-missing") return limit_bivariate(ctx, log);
  throw ConfigError("model: expected \"array-maxima\" or \"bivariate-missing\"");
}

int cmd_theta(const RunContext& ctx, std::ostream& log) {
  const Section s(ctx.config, "", {"subcommand", "delta", "k_max", "reps", "seed", "tol"});
  const auto delta = s.has("delta") ? s.numbers("delta") : std::vector<double>{};
  std::vector<std::size_t> sweep;
  if (s.has("k_max")) {
    for (double k : s.numbers("k_max")) {
      if (!(k >= 1.0) || std::floor(k) != k) throw ConfigError("k_max: entries must be positive integers");
      if (k > static_cast<double>(delta.size() + 1)) {
        throw ConfigError("k_max: " + format_double(k) + " needs " + format_double(k - 1) + " delta values");
      }
      sweep.push_back(static_cast<std::size_t>(k));
    }
  } else {
    for (std::size_t k : {2, 5, 10, 25})
      if (k <= delta.size() + 1) sweep.push_back(k);
    if (sweep.empty()) sweep.push_back(1);
  }
  const bool random = std::any_of(sweep.begin(), sweep.end(), [](std::size_t k) { return k >= 2; });
  const std::size_t reps = random ? require_reps(s) : 0;
  const std::optional<std::uint64_t> seed = random ? std::optional(resolve_seed(ctx, s)) : std::nullopt;
  const double tol = s.number_or("tol", 1e-10);

  CsvTable table({"k_max", "method", "estimate", "stderr", "reps"});
  Series line{"monte carlo", {}, {}};
  for (std::size_t k : sweep) {
    ExtremalIndexSpec spec{std::vector<double>(delta.begin(), delta.begin() + static_cast<long>(k - 1)), k};
    if (k == 1) {
      table.cell(std::uint64_t{1}).cell(std::string("exact")).cell(1.0).cell(0.0).cell(std::uint64_t{0});
      table.end_row();
      continue;
    }
    const auto t = extremal_index_mc(spec, reps, *seed, ctx.workers);
    table.cell(static_cast<std::uint64_t>(k)).cell(std::string("mc")).cell(t.value).cell(t.std_error).cell(
        static_cast<std::uint64_t>(reps));
    table.end_row();
    line.x.push_back(static_cast<double>(k));
    line.y.push_back(t.value);
    if (k == 2) {
      const auto q = extremal_index_quad(spec, tol);
      table.cell(std::uint64_t{2}).cell(std::string("quad1d")).cell(q.value).cell(q.std_error).cell(std::uint64_t{0});
      table.end_row();
    }
  }
  emit(ctx, "theta", table, seed);
  emit_plot(ctx, "theta", {"Extremal index truncation sweep", "k_max", "theta", false, false, false}, {line});
  log << "theta: " << table.rows() << " rows\n";
  return kExitOk;
}

int cmd_check_conditions(const RunContext& ctx, std::ostream& log) {
  const Section s(ctx.config, "", {"subcommand", "delta", "cutoff", "tau", "n_grid", "schedule", "m"});
  const auto delta = s.has("delta") ? s.numbers("delta") : std::vector<double>{};
  const auto J = s.count_or("cutoff", delta.size());
  const double tau = s.number("tau");
  const auto grid = s.numbers("n_grid");
  Schedule schedule;
  if (s.has("schedule")) {
    const auto sc = s.child("schedule", {"rho_l", "rho_r"});
    schedule.rho_l = sc.number("rho_l");
    schedule.rho_r = sc.number("rho_r");
  }
  const auto m = s.count_or("m", 2);
  const auto d = check_array_conditions(delta, J, tau, grid, schedule, m);

  CsvTable table({"n", "r_n", "l_n", "c_n", "l_over_r", "r_over_n", "expr_ii", "expr_iii"});
  std::vector<Series> series{{"l_n/r_n", {}, {}}, {"r_n/n", {}, {}}, {"(ii)", {}, {}}, {"(iii)", {}, {}}};
  for (const auto& r : d.rows) {
    table.cell(r.n)
        .cell(static_cast<std::uint64_t>(r.r_n))
        .cell(static_cast<std::uint64_t>(r.l_n))
        .cell(r.c_n)
        .cell(r.l_over_r)
        .cell(r.r_over_n)
        .cell(r.expr_ii)
        .cell(r.expr_iii);
    table.end_row();
    const double vals[] = {r.l_over_r, r.r_over_n, r.expr_ii, r.expr_iii};
    for (std::size_t k = 0; k < 4; ++k) {
      series[k].x.push_back(r.n);
      series[k].y.push_back(vals[k]);
    }
  }
  CsvTable trend({"series", "slope"});
  const std::pair<const char*, double> slopes[] = {{"l_over_r", d.slope_l_over_r},
                                                   {"r_over_n", d.slope_r_over_n},
                                                   {"expr_ii", d.slope_ii},
                                                   {"expr_iii", d.slope_iii}};
  for (const auto& [name, v] : slopes) {
    trend.cell(std::string(name)).cell(v);
    trend.end_row();
  }
  emit(ctx, "conditions", table, std::nullopt);
  emit(ctx, "conditions_trend", trend, std::nullopt);
  emit_plot(ctx, "conditions", {"Array condition trends", "n", "value", true, true, false}, series);
  log << "check-conditions: " << d.rows.size() << " grid points\n";
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Comparison bounds and extremes of randomly scaled Gaussian vectors"};
  app.name("berman");
  app.require_subcommand(1, 1);

  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_dir = ".";
  bool plot = false;
  using Command = int (*)(const RunContext&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {{"bound", cmd_bound},
                                                      {"delta", cmd_delta},
                                                      {"limit", cmd_limit},
                                                      {"theta", cmd_theta},
                                                      {"check-conditions", cmd_check_conditions}};
  const std::pair<const char*, const char*> help[] = {
      {"bound", "bound families over a w-grid"},
      {"delta", "Monte Carlo and quadrature rectangle-probability difference against the bounds"},
      {"limit", "simulate normalized array maxima or bivariate maxima under missing data"},
      {"theta", "extremal index over a truncation sweep"},
      {"check-conditions", "trend diagnostics for the array conditions"}};
  std::vector<std::pair<CLI::App*, CLI::Option*>> subs;
  for (std::size_t k = 0; k < std::size(commands); ++k) {
    auto* sub = app.add_subcommand(commands[k].first, help[k].second);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    auto* seed_opt = sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--workers", workers, "worker threads (0: $BERMAN_SCALE_WORKERS or hardware)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--plot", plot, "also write an SVG diagnostic plot");
    subs.emplace_back(sub, seed_opt);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::size_t which = 0;
  while (!subs[which].first->parsed()) ++which;
  const std::string name = commands[which].first;
  try {
    RunContext ctx;
    ctx.config = load_config(config_path);
    if (ctx.config.is_object() && ctx.config.contains("subcommand") && ctx.config["subcommand"] != name) {
      throw ConfigError("config is for subcommand " + ctx.config["subcommand"].dump() + ", not '" + name + "'");
    }
    ctx.config_hash = hex64(config_hash(ctx.config));
    if (subs[which].second->count() > 0) ctx.seed_override = seed;
    ctx.workers = static_cast<unsigned>(workers);
    ctx.out_dir = out_dir;
    ctx.plot = plot;
    std::filesystem::create_directories(ctx.out_dir);
    return commands[which].second(ctx, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MathError& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::BadSpec:
      case ErrorKind::ScheduleInvalid:
      case ErrorKind::DimensionMismatch: return kExitConfig;
      default: return kExitMath;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace berman::cli
