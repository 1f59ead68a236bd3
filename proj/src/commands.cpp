#include "solitons/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "solitons/integrand.hpp"
#include "solitons/manifest.hpp"
#include "solitons/parallel.hpp"

namespace solitons {

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Tolerances tolerances(const CommandOptions& opts) {
  Tolerances tol;
  if (opts.tol) {
    if (!(*opts.tol > 0.0)) throw UsageError("--tol must be positive");
    tol.pointwise = tol.integral = tol.hypothesis = *opts.tol;
  }
  return tol;
}

GridSpec grid_of(const CommandOptions& opts, const Manifest& m, const Chart& chart) {
  return grid_for(chart, opts.grid.empty() ? m.grid : opts.grid);
}

Json chart_json(const Chart& chart) {
  Json coords = Json::array();
  for (int i = 0; i < chart.dim(); ++i) {
    const auto d = chart.domain(i);
    const auto s = chart.sampled(i);
    coords.push_back({{"name", chart.coords()[i]},
                      {"domain", {d.lo, d.hi}},
                      {"sampled", {s.lo, s.hi}},
                      {"periodic", chart.periodic(i)},
                      {"exclusion_margin", chart.exclusion_margin(i)}});
  }
  return {{"name", chart.name()}, {"dim", chart.dim()}, {"coords", coords}};
}

Json header(const std::string& command, const Chart& chart) {
  Json out;
  out["command"] = command;
  out["manifold"] = chart_json(chart);
  return out;
}

struct DescribeSample {
  double r = 0.0, deviation = 0.0;
};

CommandResult describe(const CommandOptions& opts, const Manifest& m, const Chart& chart) {
  const GridSpec spec = grid_of(opts, m, chart);
  const Grid grid(chart, spec);
  const auto samples = parallel_map<DescribeSample>(grid.size(), [&](std::size_t k) {
    const PointFrame fr(chart, grid.point(k));
    const int n = fr.dim();
    const double r = fr.scalar_curvature().value();
    Mat<Jet3> dev{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dev[i][j] = fr.ricci()[i][j] - fr.g()[i][j] * (r / n);
    return DescribeSample{r, std::sqrt(std::max(0.0, norm2(dev, fr).value()))};
  });
  double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin, dmax = 0.0, volume = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    rmin = std::min(rmin, samples[k].r);
    rmax = std::max(rmax, samples[k].r);
    dmax = std::max(dmax, samples[k].deviation);
  }
  volume = integrate([](std::span<const double>) { return 1.0; }, chart, grid);
  CommandResult res;
  res.report = header("describe", chart);
  res.report["grid"] = to_json(spec);
  res.report["volume"] = volume;
  res.report["scalar_curvature"] = {{"min", rmin}, {"max", rmax}};
  res.report["einstein_deviation_max"] = dmax;
  return res;
}

SolitonSpec require_soliton(const Manifest& m, const std::string& command) {
  if (!m.soliton) throw ManifestError("soliton", "missing (required by " + command + ")");
  return *m.soliton;
}

Json run_checks(const std::vector<std::string>& ids, SolitonEvaluation& ev, const Tolerances& tol,
                bool& violated) {
  Json reports = Json::array();
  for (const auto& id : ids) {
    const CheckReport r = run_check(id, ev, tol);
    violated = violated || r.verdict == Verdict::Violated;
    reports.push_back(to_json(r));
  }
  return reports;
}

Json verdict_summary(const Json& reports) {
  Json s = {{"identity-holds", 0}, {"hypothesis-not-met", 0}, {"violated", 0}};
  for (const auto& r : reports) s[r["verdict"].get<std::string>()] = s[r["verdict"].get<std::string>()].get<int>() + 1;
  return s;
}

std::vector<std::string> default_checks(const SolitonSpec& spec) {
  std::vector<std::string> ids;
  for (const auto& id : check_ids())
    if (spec.is_gradient() || !requires_gradient(id)) ids.push_back(id);
  return ids;
}

CommandResult check(const CommandOptions& opts, const Manifest& m, const Chart& chart) {
  for (const auto& id : opts.checks) {
    if (is_check_id(id)) continue;
    std::string valid;
    for (const auto& v : check_ids()) valid += (valid.empty() ? "" : ", ") + v;
    throw UsageError("unknown check id '" + id + "'; valid ids: " + valid);
  }
  const Tolerances tol = tolerances(opts);
  const SolitonSpec spec = require_soliton(m, "check");
  const auto ids = opts.checks.empty() ? default_checks(spec) : opts.checks;
  for (const auto& id : ids) {
    if (!spec.is_gradient() && requires_gradient(id)) {
      throw CheckError("check '" + id + "' requires a gradient potential (xi = grad f)");
    }
  }
  const GridSpec grid = grid_of(opts, m, chart);
  SolitonEvaluation ev(spec, chart, grid);
  bool violated = false;
  CommandResult res;
  res.report = header("check", chart);
  res.report["soliton"] = to_json(spec, chart.coords());
  res.report["tolerances"] = to_json(tol);
  res.report["grid"] = to_json(grid);
  res.report["checks"] = run_checks(ids, ev, tol, violated);
  res.report["summary"] = verdict_summary(res.report["checks"]);
  res.exit_code = violated ? 1 : 0;
  return res;
}

CommandResult integrate_cmd(const CommandOptions& opts, const Manifest& m, const Chart& chart) {
  if (opts.expression.empty()) throw UsageError("integrate needs an integrand expression");
  const Integrand phi = Integrand::parse(opts.expression, chart, m.soliton);
  const GridSpec spec = grid_of(opts, m, chart);
  const Grid grid(chart, spec);
  const double value = integrate([&](std::span<const double> x) { return phi(x); }, chart, grid);
  CommandResult res;
  res.report = header("integrate", chart);
  res.report["expression"] = phi.source();
  res.report["value"] = value;
  res.report["grid"] = to_json(spec);
  return res;
}

CommandResult fit_cmd(const CommandOptions& opts, const Manifest& m, const Chart& chart) {
  if (!m.fit) throw ManifestError("fit", "missing (required by fit)");
  const FitBlock& fb = *m.fit;
  const Tolerances tol = tolerances(opts);
  BasisExpansion basis = fb.families.empty() ? BasisExpansion::automatic(chart, fb.degree)
                                             : BasisExpansion::build(chart, fb.families, fb.degree);
  FitResult init;
  init.lambda = fb.init_lambda;
  init.mu = fb.init_mu;
  if (!fb.init_coefficients.empty()) {
    if (fb.init_coefficients.size() != basis.size()) {
      throw ManifestError("fit.init.coefficients", "expected " + std::to_string(basis.size()) +
                                                       " entries (one per basis function)");
    }
    init.coefficients = fb.init_coefficients;
  } else if (fb.init_seed) {
    std::mt19937_64 rng(*fb.init_seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (std::size_t b = 0; b < basis.size(); ++b) init.coefficients.push_back(u(rng));
  } else {
    init.coefficients.assign(basis.size(), 0.0);
  }

  const GridSpec full = grid_of(opts, m, chart);
  const GridSpec coarse = full.coarsened(2);
  const FitResult result = fit_potential(chart, fb.kind, basis, init, coarse, fb.options);
  basis.coefficients = result.coefficients;
  const double recomputed = fit_objective(chart, fb.kind, basis, result, coarse);
  const double full_objective = fit_objective(chart, fb.kind, basis, result, full);

  SolitonSpec fitted;
  fitted.kind = fb.kind;
  fitted.potential = basis.field(chart);
  fitted.lambda = result.lambda;
  fitted.mu = result.mu;

  CommandResult res;
  res.report = header("fit", chart);
  Json families = Json::array();
  for (auto f : basis.families) families.push_back(to_string(f));
  res.report["kind"] = to_string(fb.kind);
  res.report["basis"] = {{"families", families}, {"degree", basis.degree}, {"labels", basis.labels}};
  res.report["fit_grid"] = to_json(coarse);
  res.report["verification_grid"] = to_json(full);
  res.report["result"] = to_json(result);
  res.report["objective_recomputed"] = recomputed;
  res.report["objective_full_grid"] = full_objective;
  if (result.lambda_clamped) {
    res.report["warnings"] = Json::array({"lambda clamp active: |lambda| held at " +
                                          Json(fb.options.lambda_clamp).dump()});
  }
  res.report["fitted_soliton"] = to_json(fitted, chart.coords());

  SolitonEvaluation ev(fitted, chart, full);
  bool violated = false;
  res.report["tolerances"] = to_json(tol);
  res.report["checks"] = run_checks(check_ids(), ev, tol, violated);
  res.report["summary"] = verdict_summary(res.report["checks"]);
  res.exit_code = violated ? 1 : 0;
  return res;
}

}  // namespace

CommandResult execute(const CommandOptions& opts, std::ostream& err) {
  CommandResult fail;
  fail.exit_code = 2;
  try {
    const Manifest m = load_manifest(opts.manifest);
    const Chart chart(m.chart);
    if (opts.command == "describe") return describe(opts, m, chart);
    if (opts.command == "check") return check(opts, m, chart);
    if (opts.command == "integrate") return integrate_cmd(opts, m, chart);
    if (opts.command == "fit") return fit_cmd(opts, m, chart);
    err << "error: unknown command '" << opts.command
        << "' (expected describe, check, integrate or fit)\n";
  } catch (const ManifestError& e) {
    err << "schema error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return fail;
}

int run_command(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const CommandResult res = execute(opts, err);
  if (res.report.is_null()) return res.exit_code;
  const std::string text = dump_report(res.report);
  out << text;
  if (!opts.out.empty()) {
    std::ofstream f(opts.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << opts.out << "\n";
      return 2;
    }
    f << text;
  }
  return res.exit_code;
}

}  // namespace solitons
