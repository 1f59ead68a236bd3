#include "solitons/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "solitons/parallel.hpp"

namespace solitons {

std::string to_string(SolitonKind kind) {
  return kind == SolitonKind::HyperbolicRicci ? "hyperbolic_ricci" : "hyperbolic_yamabe";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::IdentityHolds: return "identity-holds";
    case Verdict::HypothesisNotMet: return "hypothesis-not-met";
    case Verdict::Violated: return "violated";
  }
  return "";
}

const Measure* CheckReport::residual(const std::string& name) const {
  for (const auto& m : residuals)
    if (m.name == name) return &m;
  return nullptr;
}

const Measure* CheckReport::hypothesis(const std::string& name) const {
  for (const auto& m : hypotheses)
    if (m.name == name) return &m;
  return nullptr;
}

std::optional<double> CheckReport::integral(const std::string& name) const {
  for (const auto& [k, v] : integrals)
    if (k == name) return v;
  return std::nullopt;
}

std::optional<double> CheckReport::value(const std::string& name) const {
  for (const auto& [k, v] : values)
    if (k == name) return v;
  return std::nullopt;
}

namespace {

template <int K>
Vec<Jet<K>> potential_jets(const SolitonSpec& spec, const Frame<K>& fr, Jet<K>* f_out) {
  const auto x = fr.point();
  if (const auto* f = std::get_if<ScalarField>(&spec.potential)) {
    Jet<K> fj = f->jet<K>(x);
    if (f_out) *f_out = fj;
    return gradient(fj, fr);
  }
  return std::get<VectorField>(spec.potential).jet<K>(x);
}

template <int K>
Mat<Jet<K>> residual_jets(const SolitonSpec& spec, const Frame<K>& fr,
                          const Mat<Jet<K>>& lie, const Mat<Jet<K>>& lie2) {
  const int n = fr.dim();
  Mat<Jet<K>> out{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet<K> rhs;
      if (spec.kind == SolitonKind::HyperbolicRicci) {
        rhs = fr.ricci()[i][j] - fr.g()[i][j] * spec.mu;
      } else {
        rhs = fr.g()[i][j] * (fr.scalar_curvature() - spec.mu);
      }
      out[i][j] = lie2[i][j] + lie[i][j] * spec.lambda + rhs;
    }
  return out;
}

template <int K>
NodeSample sample_node(const SolitonSpec& spec, const Chart& chart, std::span<const double> x,
                       double coordinate_weight) {
  const Frame<K> fr(chart, x);
  const int n = fr.dim();
  NodeSample s;
  for (int i = 0; i < n; ++i) s.x[i] = x[i];
  s.weight = coordinate_weight * fr.sqrt_det();

  const auto& ric = fr.ricci();
  const Jet<K>& r = fr.scalar_curvature();
  s.r = r.value();
  const auto dr = differential(r, n);
  const auto grad_r = raise(dr, fr);
  for (int j = 0; j < n; ++j) s.dr[j] = dr[j].value();
  s.grad_r_norm2 = inner(grad_r, grad_r, fr).value();
  const auto div_ric = div_tensor(ric, fr);
  for (int j = 0; j < n; ++j) s.div_ric[j] = div_ric[j].value();
  for (int j = 0; j < n; ++j) {
    double a = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double c = std::fabs(ric[k][j].d(i));
        for (int l = 0; l < n; ++l) {
          c += std::fabs(fr.christoffel()[l][i][k].value() * ric[l][j].value());
          c += std::fabs(fr.christoffel()[l][i][j].value() * ric[k][l].value());
        }
        a += std::fabs(fr.ginv()[i][k].value()) * c;
      }
    s.div_ric_scale = std::max(s.div_ric_scale, a);
  }
  {
    Mat<Jet<K>> traceless{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) traceless[i][j] = ric[i][j] - fr.g()[i][j] * (r.value() / n);
    s.einstein_deviation = std::sqrt(std::max(0.0, norm2(traceless, fr).value()));
  }

  Jet<K> f;
  const auto xi = potential_jets(spec, fr, &f);
  const auto lie = lie_metric(xi, fr);
  const auto lie2 = lie_derivative(xi, lie, n);
  const auto res = residual_jets(spec, fr, lie, lie2);
  s.residual_norm = std::sqrt(std::max(0.0, norm2(res, fr).value()));
  s.residual_trace = trace_g(res, fr).value();
  const Jet<K> tr2 = trace_g(lie2, fr);
  s.trace_lie2 = tr2.value();
  // L_{grad f} L_{grad f} g is exact through order K-3; its derivatives
  // need K >= 4. A vector potential keeps one more order.
  const bool lie2_derivatives = !spec.is_gradient() || K >= 4;
  if (lie2_derivatives) {
    const auto dtr = differential(tr2, n);
    s.grad_trace_lie2_norm = std::sqrt(std::max(0.0, inner(raise(dtr, fr), raise(dtr, fr), fr).value()));
    const auto dl2 = div_tensor(lie2, fr);
    s.div_lie2_norm = std::sqrt(std::max(0.0, inner(raise(dl2, fr), raise(dl2, fr), fr).value()));
  }
  s.div_xi = div_vector(xi, fr).value();
  s.killing_norm = std::sqrt(std::max(0.0, norm2(lie, fr).value()));
  s.ric_xi_xi = contract(ric, xi, xi, n).value();
  s.norm2_nabla_xi = norm2_covariant_derivative(xi, fr).value();
  s.div_accel = div_vector(cov_accel(xi, fr), fr).value();

  if (spec.is_gradient()) {
    const Jet<K> lap = laplacian(f, fr);
    s.laplacian_f = lap.value();
    s.hess_norm2 = norm2(hessian(f, fr), fr).value();
    s.half_lap_grad_norm2 = 0.5 * laplacian(inner(xi, xi, fr), fr).value();
    const auto grad_lap = gradient(lap, fr);
    s.grad_lap_dot_grad = inner(grad_lap, xi, fr).value();
    s.ric_grad_grad = s.ric_xi_xi;
    s.grad_f_dot_grad_r = inner(xi, grad_r, fr).value();
    s.ric_grad_f_grad_r = contract(ric, xi, grad_r, n).value();
    const auto dl = div_tensor(lie, fr);
    for (int j = 0; j < n; ++j) {
      s.div_lie[j] = dl[j].value();
      s.d_lap[j] = lap.derivative(j).value();
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += ric[j][k].value() * xi[k].value();
      s.ric_grad[j] = acc;
    }
  }
  return s;
}

// |lhs - rhs| relative to the magnitude of the terms involved (at least 1).
double mismatch(double lhs, double rhs, std::initializer_list<double> terms = {}) {
  double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
  for (double t : terms) scale = std::max(scale, std::fabs(t));
  return std::fabs(lhs - rhs) / scale;
}

template <class Fn>
double max_over(const std::vector<NodeSample>& s, Fn&& fn) {
  double m = 0.0;
  for (const auto& node : s) {
    const double v = fn(node);
    if (std::isnan(v)) return v;
    m = std::max(m, v);
  }
  return m;
}

template <class Fn>
double max_deviation_from_mean(const std::vector<NodeSample>& s, Fn&& fn) {
  double wsum = 0.0, acc = 0.0;
  for (const auto& node : s) {
    wsum += node.weight;
    acc += node.weight * fn(node);
  }
  const double mean = acc / wsum;
  double m = 0.0;
  for (const auto& node : s) m = std::max(m, std::fabs(fn(node) - mean));
  return m;
}

class ReportBuilder {
 public:
  ReportBuilder(std::string id, const GridSpec& grid) {
    rep_.id = std::move(id);
    rep_.grid = grid;
  }

  void unconditional(const std::string& name, double v, double tol) {
    rep_.residuals.push_back({name, v, tol});
    unconditional_.push_back(rep_.residuals.size() - 1);
  }
  void conclusion(const std::string& name, double v, double tol) {
    rep_.residuals.push_back({name, v, tol});
  }
  void hypothesis(const std::string& name, double v, double tol) {
    rep_.hypotheses.push_back({name, v, tol});
  }
  /// Hypothesis lhs >= rhs with slack; records both sides and the deficit.
  void at_least(const std::string& name, double lhs, double rhs, double slack) {
    rep_.values.push_back({name + ".lhs", lhs});
    rep_.values.push_back({name + ".rhs", rhs});
    rep_.hypotheses.push_back({name, std::max(0.0, rhs - lhs), slack});
    if (std::fabs(lhs - rhs) <= slack) rep_.notes.push_back(name + ": boundary case");
  }
  void integral(const std::string& name, double v) { rep_.integrals.push_back({name, v}); }
  void value(const std::string& name, double v) { rep_.values.push_back({name, v}); }
  void note(const std::string& text) { rep_.notes.push_back(text); }
  void not_applicable(const std::string& why) {
    rep_.applicable = false;
    rep_.notes.push_back("not applicable: " + why);
  }

  CheckReport finish() {
    auto failed = [](const Measure& m) { return !(m.value <= m.tolerance); };
    bool uncond_fail = false;
    for (std::size_t idx : unconditional_) uncond_fail |= failed(rep_.residuals[idx]);
    bool hyp_fail = false;
    for (const auto& m : rep_.hypotheses) hyp_fail |= failed(m);
    bool concl_fail = false;
    rep_.max_residual = 0.0;
    for (const auto& m : rep_.residuals) {
      concl_fail |= failed(m);
      rep_.max_residual = std::isnan(m.value) ? m.value : std::max(rep_.max_residual, m.value);
    }
    if (uncond_fail) {
      rep_.verdict = Verdict::Violated;
    } else if (hyp_fail) {
      rep_.verdict = Verdict::HypothesisNotMet;
    } else if (concl_fail) {
      rep_.verdict = rep_.applicable ? Verdict::Violated : Verdict::HypothesisNotMet;
    } else {
      rep_.verdict = Verdict::IdentityHolds;
    }
    return std::move(rep_);
  }

 private:
  CheckReport rep_;
  std::vector<std::size_t> unconditional_;
};

void require_gradient(const SolitonEvaluation& ev, const std::string& id) {
  if (!ev.spec().is_gradient()) {
    throw CheckError("check '" + id + "' requires a gradient potential (xi = grad f)");
  }
}

void require_lambda(const SolitonEvaluation& ev, const std::string& id) {
  if (ev.spec().lambda == 0.0) throw CheckError("check '" + id + "' requires lambda != 0");
}

bool is_yamabe(const SolitonEvaluation& ev) {
  return ev.spec().kind == SolitonKind::HyperbolicYamabe;
}

// Common hypothesis: the soliton equation holds at every node.
void soliton_hypothesis(ReportBuilder& b, const std::vector<NodeSample>& s,
                        const Tolerances& tol) {
  b.hypothesis("soliton_residual", max_over(s, [](const NodeSample& n) { return n.residual_norm; }),
               tol.hypothesis);
}

void trace_free_hypothesis(ReportBuilder& b, const std::vector<NodeSample>& s,
                           const Tolerances& tol) {
  b.hypothesis("trace_lie2",
               max_over(s, [](const NodeSample& n) { return std::fabs(n.trace_lie2); }),
               tol.hypothesis);
}

void divergence_free_hypothesis(ReportBuilder& b, const std::vector<NodeSample>& s,
                                const Tolerances& tol) {
  b.hypothesis("div_lie2", max_over(s, [](const NodeSample& n) { return n.div_lie2_norm; }),
               tol.hypothesis);
}

// ---------------------------------------------------------------------------
// unconditional identities

double schur_mismatch(const NodeSample& p, int n) {
  double m = 0.0;
  for (int j = 0; j < n; ++j)
    m = std::max(m, mismatch(p.div_ric[j], 0.5 * p.dr[j], {p.div_ric_scale}));
  return m;
}

double trace_formula_mismatch(const NodeSample& p) {
  const double rhs = 2.0 * (p.norm2_nabla_xi + p.div_accel - p.ric_xi_xi);
  return mismatch(p.trace_lie2, rhs, {2 * p.norm2_nabla_xi, 2 * p.div_accel, 2 * p.ric_xi_xi});
}

double bochner_mismatch(const NodeSample& p) {
  const double rhs = p.hess_norm2 + p.ric_grad_grad + p.grad_lap_dot_grad;
  return mismatch(p.half_lap_grad_norm2, rhs, {p.hess_norm2, p.ric_grad_grad, p.grad_lap_dot_grad});
}

double div_lie_mismatch(const NodeSample& p, int n) {
  double m = 0.0;
  for (int j = 0; j < n; ++j) {
    const double rhs = 2 * p.d_lap[j] + 2 * p.ric_grad[j];
    m = std::max(m, mismatch(p.div_lie[j], rhs, {2 * p.d_lap[j], 2 * p.ric_grad[j]}));
  }
  return m;
}

CheckReport check_schur(SolitonEvaluation& ev, const Tolerances& tol) {
  const int n = ev.dim();
  const auto& s = ev.samples();
  ReportBuilder b("schur", ev.grid().spec());
  b.unconditional("div_ric_minus_half_dr",
                  max_over(s, [n](const NodeSample& p) { return schur_mismatch(p, n); }),
                  tol.pointwise);
  return b.finish();
}

CheckReport check_trace_lie2(SolitonEvaluation& ev, const Tolerances& tol) {
  const auto& s = ev.samples();
  ReportBuilder b("trace_lie2", ev.grid().spec());
  b.unconditional("trace_formula", max_over(s, trace_formula_mismatch), tol.pointwise);
  b.value("max_abs_trace_lie2",
          max_over(s, [](const NodeSample& p) { return std::fabs(p.trace_lie2); }));
  return b.finish();
}

CheckReport check_bochner(SolitonEvaluation& ev, const Tolerances& tol) {
  require_gradient(ev, "bochner");
  const auto& s = ev.samples();
  ReportBuilder b("bochner", ev.grid().spec());
  b.unconditional("bochner_formula", max_over(s, bochner_mismatch), tol.pointwise);
  return b.finish();
}

// ---------------------------------------------------------------------------
// conditional lemmas

CheckReport check_lemma_hessian(SolitonEvaluation& ev, const Tolerances& tol) {
  require_gradient(ev, "lemma_hessian");
  require_lambda(ev, "lemma_hessian");
  const auto& s = ev.samples();
  const int n = ev.dim();
  const auto& spec = ev.spec();
  const double c = (is_yamabe(ev) ? n : 1.0) / (2.0 * spec.lambda);
  ReportBuilder b("lemma_hessian", ev.grid().spec());
  soliton_hypothesis(b, s, tol);
  trace_free_hypothesis(b, s, tol);
  b.conclusion("hessian_form", max_over(s, [c](const NodeSample& p) {
                 const double t = c * p.grad_f_dot_grad_r;
                 return mismatch(p.half_lap_grad_norm2, p.hess_norm2 + p.ric_grad_grad - t,
                                 {p.hess_norm2, p.ric_grad_grad, t});
               }),
               tol.pointwise);
  b.conclusion("hessian_divergence_form", max_over(s, [c](const NodeSample& p) {
                 const double t = c * p.grad_f_dot_grad_r;
                 return mismatch(p.half_lap_grad_norm2, 2 * p.hess_norm2 + p.div_accel - t,
                                 {2 * p.hess_norm2, p.div_accel, t});
               }),
               tol.pointwise);
  b.conclusion("ricci_divergence_form", max_over(s, [c](const NodeSample& p) {
                 const double t = c * p.grad_f_dot_grad_r;
                 return mismatch(p.half_lap_grad_norm2, 2 * p.ric_grad_grad - p.div_accel - t,
                                 {2 * p.ric_grad_grad, p.div_accel, t});
               }),
               tol.pointwise);
  const bool yamabe = is_yamabe(ev);
  b.conclusion("contracted_trace", max_over(s, [&](const NodeSample& p) {
                 const double lhs = 2 * spec.lambda * p.laplacian_f;
                 const double rhs = yamabe ? n * (spec.mu - p.r) : n * spec.mu - p.r;
                 return mismatch(lhs, rhs);
               }),
               tol.pointwise);
  return b.finish();
}

CheckReport check_div_lie(SolitonEvaluation& ev, const Tolerances& tol) {
  require_gradient(ev, "div_lie");
  require_lambda(ev, "div_lie");
  const auto& s = ev.samples(true);
  const int n = ev.dim();
  const auto& spec = ev.spec();
  const double c = is_yamabe(ev) ? (n - 1) / (2.0 * spec.lambda) : 1.0 / (4.0 * spec.lambda);
  ReportBuilder b("div_lie", ev.grid().spec());
  b.unconditional("div_lie_formula",
                  max_over(s, [n](const NodeSample& p) { return div_lie_mismatch(p, n); }),
                  tol.pointwise);
  soliton_hypothesis(b, s, tol);
  b.hypothesis("grad_trace_lie2",
               max_over(s, [](const NodeSample& p) { return p.grad_trace_lie2_norm; }),
               tol.hypothesis);
  divergence_free_hypothesis(b, s, tol);
  auto conclusion = [&](const NodeSample& p) {
    double m = 0.0;
    for (int j = 0; j < n; ++j) m = std::max(m, mismatch(p.ric_grad[j], c * p.dr[j], {2 * c * p.div_ric_scale}));
    return m;
  };
  const double concl = max_over(s, conclusion);
  b.conclusion("ricci_gradient_relation", concl, tol.pointwise);

  // Connected-manifold variant: gated on divergence-free only; the trace
  // deviation is reported, not assumed.
  const double trace_dev =
      max_deviation_from_mean(s, [](const NodeSample& p) { return p.trace_lie2; });
  b.value("remark.trace_lie2_deviation", trace_dev);
  b.value("remark.ricci_gradient_relation", concl);
  const double soliton = max_over(s, [](const NodeSample& p) { return p.residual_norm; });
  const double divfree = max_over(s, [](const NodeSample& p) { return p.div_lie2_norm; });
  const bool remark_hyp = soliton <= tol.hypothesis && divfree <= tol.hypothesis;
  std::string remark = !remark_hyp            ? "hypothesis-not-met"
                       : concl <= tol.pointwise ? "identity-holds"
                                                : "conclusion-not-reproduced";
  b.note("remark variant (divergence-free only): " + remark);
  return b.finish();
}

CheckReport check_prop_p2(SolitonEvaluation& ev, const Tolerances& tol) {
  require_gradient(ev, "prop_p2");
  require_lambda(ev, "prop_p2");
  const auto& s = ev.samples(true);
  const int n = ev.dim();
  const bool yamabe = is_yamabe(ev);
  ReportBuilder b("prop_p2", ev.grid().spec());
  soliton_hypothesis(b, s, tol);
  trace_free_hypothesis(b, s, tol);
  divergence_free_hypothesis(b, s, tol);
  b.conclusion("laplacian_gradient_norm", max_over(s, [&](const NodeSample& p) {
                 if (yamabe) {
                   const double a = (n - 2.0) / (n - 1.0) * p.hess_norm2;
                   const double d = p.div_accel / (n - 1.0);
                   return mismatch(p.half_lap_grad_norm2, a - d, {a, d});
                 }
                 return mismatch(p.half_lap_grad_norm2, -p.div_accel);
               }),
               tol.pointwise);
  if (yamabe && n == 2) b.note("n = 2: Hessian coefficient (n-2)/(n-1) vanishes");
  return b.finish();
}

CheckReport check_contracted_trace(SolitonEvaluation& ev, const Tolerances& tol) {
  require_gradient(ev, "contracted_trace");
  require_lambda(ev, "contracted_trace");
  const auto& s = ev.samples();
  const int n = ev.dim();
  const auto& spec = ev.spec();
  const bool yamabe = is_yamabe(ev);
  ReportBuilder b("contracted_trace", ev.grid().spec());
  soliton_hypothesis(b, s, tol);
  trace_free_hypothesis(b, s, tol);
  double max_lhs = 0.0, max_rhs = 0.0;
  const double m = max_over(s, [&](const NodeSample& p) {
    const double lhs = 2 * spec.lambda * p.laplacian_f;
    const double rhs = yamabe ? n * (spec.mu - p.r) : n * spec.mu - p.r;
    max_lhs = std::max(max_lhs, std::fabs(lhs));
    max_rhs = std::max(max_rhs, std::fabs(rhs));
    return mismatch(lhs, rhs);
  });
  b.conclusion("trace_relation", m, tol.pointwise);
  b.value("max_abs_lhs", max_lhs);
  b.value("max_abs_rhs", max_rhs);
  return b.finish();
}

CheckReport check_remark_csc(SolitonEvaluation& ev, const Tolerances& tol) {
  const auto& s = ev.samples();
  ReportBuilder b("remark_csc", ev.grid().spec());
  soliton_hypothesis(b, s, tol);
  b.hypothesis("div_xi_deviation",
               max_deviation_from_mean(s, [](const NodeSample& p) { return p.div_xi; }),
               tol.hypothesis);
  b.hypothesis("trace_lie2_deviation",
               max_deviation_from_mean(s, [](const NodeSample& p) { return p.trace_lie2; }),
               tol.hypothesis);
  b.conclusion("scalar_curvature_deviation",
               max_deviation_from_mean(s, [](const NodeSample& p) { return p.r; }),
               tol.hypothesis);
  return b.finish();
}

// ---------------------------------------------------------------------------
// theorem verdicts

// Triviality conclusions shared by the gradient theorems.
void gradient_conclusions(ReportBuilder& b, SolitonEvaluation& ev, const Tolerances& tol) {
  const auto& s = ev.samples();
  const auto& spec = ev.spec();
  const double hess = ev.integrate([](const NodeSample& p) { return p.hess_norm2; });
  b.integral("norm2_hessian", hess);
  b.conclusion("integral_norm2_hessian", hess, tol.integral);
  b.conclusion("killing_residual",
               max_over(s, [](const NodeSample& p) { return p.killing_norm; }), tol.integral);
  const double target = is_yamabe(ev) ? spec.mu : ev.dim() * spec.mu;
  b.value("scalar_curvature_target", target);
  b.conclusion("scalar_curvature_vs_target",
               max_over(s, [target](const NodeSample& p) { return std::fabs(p.r - target); }),
               tol.integral);
}

CheckReport check_theorem_c(SolitonEvaluation& ev, const Tolerances& tol) {
  require_lambda(ev, "T-C");
  const auto& s = ev.samples();
  ReportBuilder b("T-C", ev.grid().spec());
  soliton_hypothesis(b, s, tol);
  trace_free_hypothesis(b, s, tol);
  const double ric = ev.integrate([](const NodeSample& p) { return p.ric_xi_xi; });
  b.integral("ric_xi_xi", ric);
  b.at_least("nonpositive_ricci_integral", 0.0, ric, tol.integral);
  b.conclusion("killing_residual",
               max_over(s, [](const NodeSample& p) { return p.killing_norm; }), tol.integral);
  b.value("max_norm2_nabla_xi",
          max_over(s, [](const NodeSample& p) { return p.norm2_nabla_xi; }));
  return b.finish();
}

CheckReport check_theorem_ricci_bound(SolitonEvaluation& ev, const std::string& id,
                                      const Tolerances& tol) {
  require_gradient(ev, id);
  require_lambda(ev, id);
  const bool yamabe = is_yamabe(ev);
  const auto& s = ev.samples();
  const int n = ev.dim();
  ReportBuilder b(id, ev.grid().spec());
  if (id == "T-1" && !yamabe) b.not_applicable("T-1 is stated for hyperbolic Yamabe solitons; evaluated with the hyperbolic Ricci coefficient 1/(2 lambda)");
  if (id == "T-2" && yamabe) b.not_applicable("T-2 is stated for hyperbolic Ricci solitons; evaluated with the hyperbolic Yamabe coefficient n/(2 lambda)");
  soliton_hypothesis(b, s, tol);
  trace_free_hypothesis(b, s, tol);
  const double c = (yamabe ? n : 1.0) / (2.0 * ev.spec().lambda);
  const double ric = ev.integrate([](const NodeSample& p) { return p.ric_grad_grad; });
  const double gfr = ev.integrate([](const NodeSample& p) { return p.grad_f_dot_grad_r; });
  b.integral("ric_grad_f_grad_f", ric);
  b.integral("g_grad_f_grad_r", gfr);
  b.at_least("ricci_bound", ric, c * gfr, tol.integral);
  gradient_conclusions(b, ev, tol);
  return b.finish();
}

CheckReport check_corollary(SolitonEvaluation& ev, const Tolerances& tol) {
  require_gradient(ev, "T-COR");
  require_lambda(ev, "T-COR");
  const auto& s = ev.samples();
  ReportBuilder b("T-COR", ev.grid().spec());
  soliton_hypothesis(b, s, tol);
  trace_free_hypothesis(b, s, tol);
  const double gfr = ev.integrate([](const NodeSample& p) { return p.grad_f_dot_grad_r; });
  b.integral("g_grad_f_grad_r", gfr);
  b.at_least("lambda_times_integral_nonpositive", 0.0, ev.spec().lambda * gfr, tol.integral);
  gradient_conclusions(b, ev, tol);
  return b.finish();
}

CheckReport check_theorem_sq(SolitonEvaluation& ev, const Tolerances& tol) {
  require_gradient(ev, "T-SQ");
  require_lambda(ev, "T-SQ");
  const auto& s = ev.samples();
  const auto& spec = ev.spec();
  const int n = ev.dim();
  const bool yamabe = is_yamabe(ev);
  ReportBuilder b("T-SQ", ev.grid().spec());
  soliton_hypothesis(b, s, tol);
  trace_free_hypothesis(b, s, tol);
  const double ric = ev.integrate([](const NodeSample& p) { return p.ric_grad_grad; });
  const double deficit = ev.integrate([&](const NodeSample& p) {
    const double d = yamabe ? spec.mu - p.r : n * spec.mu - p.r;
    return d * d;
  });
  const double coef = (yamabe ? double(n) * n : 1.0) / (4.0 * spec.lambda * spec.lambda);
  b.integral("ric_grad_f_grad_f", ric);
  b.integral("squared_deficit", deficit);
  b.at_least("squared_deficit_bound", ric, coef * deficit, tol.integral);
  gradient_conclusions(b, ev, tol);
  return b.finish();
}

CheckReport check_theorem_n2(SolitonEvaluation& ev, const Tolerances& tol) {
  require_gradient(ev, "T-N2");
  require_lambda(ev, "T-N2");
  const auto& s = ev.samples(true);
  ReportBuilder b("T-N2", ev.grid().spec());
  if (!is_yamabe(ev)) b.not_applicable("T-N2 is stated for hyperbolic Yamabe solitons");
  if (ev.dim() <= 2) b.not_applicable("T-N2 requires n > 2");
  soliton_hypothesis(b, s, tol);
  trace_free_hypothesis(b, s, tol);
  divergence_free_hypothesis(b, s, tol);
  gradient_conclusions(b, ev, tol);
  return b.finish();
}

CheckReport check_prop_csc(SolitonEvaluation& ev, const Tolerances& tol) {
  require_gradient(ev, "P-CSC");
  require_lambda(ev, "P-CSC");
  const auto& s = ev.samples(true);
  const auto& spec = ev.spec();
  const int n = ev.dim();
  const bool yamabe = is_yamabe(ev);
  ReportBuilder b("P-CSC", ev.grid().spec());
  soliton_hypothesis(b, s, tol);
  divergence_free_hypothesis(b, s, tol);
  const double ric = ev.integrate([](const NodeSample& p) { return p.ric_grad_f_grad_r; });
  b.integral("ric_grad_f_grad_r", ric);
  b.at_least("lambda_times_integral_nonpositive", 0.0, spec.lambda * ric, tol.integral);
  const double c = yamabe ? (n - 1) / 2.0 : 0.25;
  b.conclusion("ricci_gradient_norm_identity", max_over(s, [&](const NodeSample& p) {
                 return mismatch(spec.lambda * p.ric_grad_f_grad_r, c * p.grad_r_norm2);
               }),
               tol.pointwise);
  b.conclusion("scalar_curvature_deviation",
               max_deviation_from_mean(s, [](const NodeSample& p) { return p.r; }),
               tol.integral);
  return b.finish();
}

}  // namespace

template <int K>
Mat<double> residual(const SolitonSpec& spec, const Frame<K>& fr) {
  const auto xi = potential_jets<K>(spec, fr, nullptr);
  const auto lie = lie_metric(xi, fr);
  const auto lie2 = lie_derivative(xi, lie, fr.dim());
  return values(residual_jets(spec, fr, lie, lie2), fr.dim());
}

template <int K>
std::pair<double, double> contracted_trace(const SolitonSpec& spec, const Frame<K>& fr) {
  const auto* f = std::get_if<ScalarField>(&spec.potential);
  if (!f) throw CheckError("contracted_trace requires a gradient potential");
  const int n = fr.dim();
  const double lap = laplacian(f->jet<K>(fr.point()), fr).value();
  const double r = fr.scalar_curvature().value();
  const double rhs = spec.kind == SolitonKind::HyperbolicYamabe ? n * (spec.mu - r) : n * spec.mu - r;
  return {2.0 * spec.lambda * lap, rhs};
}

template Mat<double> residual<3>(const SolitonSpec&, const Frame<3>&);
template Mat<double> residual<4>(const SolitonSpec&, const Frame<4>&);
template std::pair<double, double> contracted_trace<3>(const SolitonSpec&, const Frame<3>&);
template std::pair<double, double> contracted_trace<4>(const SolitonSpec&, const Frame<4>&);

SolitonEvaluation::SolitonEvaluation(SolitonSpec spec, const Chart& chart, GridSpec grid)
    : spec_(std::move(spec)), chart_(chart), grid_(chart, std::move(grid)) {
  if (const auto* v = std::get_if<VectorField>(&spec_.potential)) {
    if (static_cast<int>(v->components.size()) != chart.dim()) {
      throw CheckError("vector potential has " + std::to_string(v->components.size()) +
                       " components, chart dimension is " + std::to_string(chart.dim()));
    }
  }
}

const std::vector<NodeSample>& SolitonEvaluation::samples(bool need_lie2_derivatives) {
  const bool want4 = need_lie2_derivatives && spec_.is_gradient();
  if (have_ && (!want4 || have_lie2_derivatives_)) return samples_;
  samples_ = parallel_map<NodeSample>(grid_.size(), [&](std::size_t k) {
    const auto x = grid_.point(k);
    const double w = grid_.coordinate_weight(k);
    return want4 ? sample_node<4>(spec_, chart_, x, w) : sample_node<3>(spec_, chart_, x, w);
  });
  have_ = true;
  have_lie2_derivatives_ = want4 || !spec_.is_gradient();
  return samples_;
}

const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids = {
      "trace_lie2", "bochner", "lemma_hessian", "div_lie", "prop_p2", "contracted_trace",
      "remark_csc", "schur",   "T-C",           "T-1",     "T-2",     "T-COR",
      "T-SQ",       "T-N2",    "P-CSC"};
  return ids;
}

bool is_check_id(const std::string& id) {
  const auto& ids = check_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool requires_gradient(const std::string& id) {
  return is_check_id(id) && id != "trace_lie2" && id != "remark_csc" && id != "schur" &&
         id != "T-C";
}

UnconditionalResiduals unconditional_residuals(SolitonEvaluation& ev) {
  const auto& s = ev.samples();
  const int n = ev.dim();
  UnconditionalResiduals out;
  out.trace_formula = max_over(s, trace_formula_mismatch);
  out.schur = max_over(s, [n](const NodeSample& p) { return schur_mismatch(p, n); });
  if (ev.spec().is_gradient()) {
    out.bochner = max_over(s, bochner_mismatch);
    out.div_lie = max_over(s, [n](const NodeSample& p) { return div_lie_mismatch(p, n); });
  }
  return out;
}

CheckReport run_check(const std::string& id, SolitonEvaluation& ev, const Tolerances& tol) {
  if (id == "trace_lie2") return check_trace_lie2(ev, tol);
  if (id == "bochner") return check_bochner(ev, tol);
  if (id == "lemma_hessian") return check_lemma_hessian(ev, tol);
  if (id == "div_lie") return check_div_lie(ev, tol);
  if (id == "prop_p2") return check_prop_p2(ev, tol);
  if (id == "contracted_trace") return check_contracted_trace(ev, tol);
  if (id == "remark_csc") return check_remark_csc(ev, tol);
  if (id == "schur") return check_schur(ev, tol);
  if (id == "T-C") return check_theorem_c(ev, tol);
  if (id == "T-1" || id == "T-2") return check_theorem_ricci_bound(ev, id, tol);
  if (id == "T-COR") return check_corollary(ev, tol);
  if (id == "T-SQ") return check_theorem_sq(ev, tol);
  if (id == "T-N2") return check_theorem_n2(ev, tol);
  if (id == "P-CSC") return check_prop_csc(ev, tol);
  std::string valid;
  for (const auto& v : check_ids()) valid += (valid.empty() ? "" : ", ") + v;
  throw CheckError("unknown check id '" + id + "'; valid ids: " + valid);
}

namespace {
SolitonSpec field_only(Potential p) {
  SolitonSpec spec;
  spec.kind = SolitonKind::HyperbolicYamabe;
  spec.potential = std::move(p);
  spec.lambda = 1.0;
  spec.mu = 0.0;
  return spec;
}
}  // namespace

double killing_residual(const Potential& xi, const Chart& chart, const GridSpec& grid) {
  SolitonEvaluation ev(field_only(xi), chart, grid);
  return max_over(ev.samples(), [](const NodeSample& p) { return p.killing_norm; });
}

CheckReport identity_trace_lie2(const Potential& xi, const Chart& chart, const GridSpec& grid,
                                const Tolerances& tol) {
  SolitonEvaluation ev(field_only(xi), chart, grid);
  return check_trace_lie2(ev, tol);
}

CheckReport identity_bochner(const ScalarField& f, const Chart& chart, const GridSpec& grid,
                             const Tolerances& tol) {
  SolitonEvaluation ev(field_only(f), chart, grid);
  return check_bochner(ev, tol);
}

CheckReport identity_schur(const Chart& chart, const GridSpec& grid, const Tolerances& tol) {
  SolitonEvaluation ev(field_only(ScalarField{Expr::constant(0.0, chart.dim())}), chart, grid);
  return check_schur(ev, tol);
}

CheckReport evaluate_check(const std::string& id, const SolitonSpec& spec, const Chart& chart,
                           const GridSpec& grid, const Tolerances& tol) {
  SolitonEvaluation ev(spec, chart, grid);
  return run_check(id, ev, tol);
}

}  // namespace solitons
