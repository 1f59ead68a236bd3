#include "solitons/fit.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "solitons/parallel.hpp"

namespace solitons {

std::string to_string(BasisFamily family) {
  return family == BasisFamily::Fourier ? "fourier" : "cos_poly";
}

namespace {

struct Factor {
  std::string label;  // empty for the constant
  int degree;
};

std::vector<Factor> axis_basis(BasisFamily family, const std::string& x, int degree) {
  std::vector<Factor> out{{"", 0}};
  for (int k = 1; k <= degree; ++k) {
    if (family == BasisFamily::Fourier) {
      const std::string arg = k == 1 ? x : std::to_string(k) + "*" + x;
      out.push_back({"cos(" + arg + ")", k});
      out.push_back({"sin(" + arg + ")", k});
    } else {
      out.push_back({k == 1 ? "cos(" + x + ")" : "cos(" + x + ")^" + std::to_string(k), k});
    }
  }
  return out;
}

std::string format_coefficient(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

BasisExpansion BasisExpansion::build(const Chart& chart, std::vector<BasisFamily> families,
                                     int degree) {
  const int n = chart.dim();
  if (static_cast<int>(families.size()) != n) {
    throw FitError("basis needs one family per coordinate");
  }
  if (degree < 0) throw FitError("basis degree must be nonnegative");
  std::vector<std::vector<Factor>> axes;
  for (int i = 0; i < n; ++i) axes.push_back(axis_basis(families[i], chart.coords()[i], degree));

  BasisExpansion b;
  b.families = std::move(families);
  b.degree = degree;
  std::vector<std::size_t> pick(n, 0);
  std::function<void(int, int, std::string)> rec = [&](int axis, int used, std::string label) {
    if (axis == n) {
      b.labels.push_back(label.empty() ? "1" : label);
      return;
    }
    for (const auto& f : axes[axis]) {
      if (used + f.degree > degree) continue;
      std::string next = label;
      if (!f.label.empty()) next = next.empty() ? f.label : next + "*" + f.label;
      rec(axis + 1, used + f.degree, next);
    }
  };
  rec(0, 0, "");
  for (const auto& l : b.labels) b.functions.push_back(Expr::parse(l, chart.coords()));
  b.coefficients.assign(b.labels.size(), 0.0);
  return b;
}

BasisExpansion BasisExpansion::automatic(const Chart& chart, int degree) {
  std::vector<BasisFamily> fam;
  for (int i = 0; i < chart.dim(); ++i)
    fam.push_back(chart.periodic(i) ? BasisFamily::Fourier : BasisFamily::CosPolynomial);
  return build(chart, std::move(fam), degree);
}

std::string BasisExpansion::source() const {
  std::string s;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    if (b) s += " + ";
    s += "(" + format_coefficient(coefficients[b]) + ")*(" + labels[b] + ")";
  }
  return s.empty() ? "0" : s;
}

ScalarField BasisExpansion::field(const Chart& chart) const {
  return ScalarField{Expr::parse(source(), chart.coords())};
}

FitProblem::FitProblem(const Chart& chart, SolitonKind kind, BasisExpansion basis,
                       const GridSpec& grid_spec)
    : n_(chart.dim()), kind_(kind), basis_(std::move(basis)) {
  if (basis_.size() == 0) throw FitError("empty basis");
  if (basis_.coefficients.size() != basis_.size()) {
    throw FitError("basis has " + std::to_string(basis_.size()) + " functions but " +
                   std::to_string(basis_.coefficients.size()) + " coefficients");
  }
  free_count_ = basis_.size() - 1;
  const Grid grid(chart, grid_spec);
  residual_count_ = grid.size() * static_cast<std::size_t>(n_ * n_);
  nodes_ = parallel_map<NodeData>(grid.size(), [&](std::size_t k) {
    const auto x = grid.point(k);
    const PointFrame fr(chart, x);
    NodeData d;
    d.g = fr.g();
    d.ginv = fr.ginv();
    d.ric = values(fr.ricci(), n_);
    d.r = fr.scalar_curvature().value();
    d.sqrt_weight = std::sqrt(grid.coordinate_weight(k) * fr.sqrt_det());
    Eigen::MatrixXd gi(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) gi(i, j) = fr.inverse_metric(i, j);
    const Eigen::MatrixXd m = gi.llt().matrixL();
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) d.frame[i][j] = m(i, j);
    for (const auto& phi : basis_.functions) d.basis.push_back(phi.eval_jet<3>(x));
    return d;
  });
}

Eigen::VectorXd FitProblem::pack(const std::vector<double>& coefficients, double lambda,
                                 double mu) const {
  if (coefficients.size() != basis_.size()) throw FitError("coefficient count mismatch");
  Eigen::VectorXd p(parameter_count());
  for (std::size_t b = 1; b < coefficients.size(); ++b) p(b - 1) = coefficients[b];
  p(free_count_) = lambda;
  p(free_count_ + 1) = mu;
  return p;
}

void FitProblem::unpack(const Eigen::VectorXd& p, std::vector<double>& coefficients,
                        double& lambda, double& mu) const {
  coefficients.assign(basis_.size(), 0.0);
  coefficients[0] = basis_.coefficients[0];
  for (std::size_t b = 1; b < basis_.size(); ++b) coefficients[b] = p(b - 1);
  lambda = p(free_count_);
  mu = p(free_count_ + 1);
}

Eigen::VectorXd FitProblem::residuals(const Eigen::VectorXd& p) const {
  const int n = n_;
  const double lambda = p(free_count_);
  const double mu = p(free_count_ + 1);
  Eigen::VectorXd out(residual_count_);
  parallel_for(nodes_.size(), [&](std::size_t k) {
    const NodeData& d = nodes_[k];
    Jet3 f = d.basis[0] * basis_.coefficients[0];
    for (std::size_t b = 1; b < d.basis.size(); ++b) f += d.basis[b] * p(b - 1);
    Vec<Jet3> xi{};
    for (int i = 0; i < n; ++i) {
      Jet3 s = Jet3::constant(n, 0.0);
      for (int j = 0; j < n; ++j) s += d.ginv[i][j] * f.derivative(j);
      xi[i] = s;
    }
    const auto lie = lie_derivative(xi, d.g, n);
    const auto lie2 = lie_derivative(xi, lie, n);
    Eigen::MatrixXd res(n, n), m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double g = d.g[i][j].value();
        const double rhs = kind_ == SolitonKind::HyperbolicRicci ? d.ric[i][j] - mu * g
                                                                 : (d.r - mu) * g;
        res(i, j) = lie2[i][j].value() + lambda * lie[i][j].value() + rhs;
        m(i, j) = d.frame[i][j];
      }
    const Eigen::MatrixXd s = m.transpose() * res * m;
    const std::size_t off = k * static_cast<std::size_t>(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(off + i * n + j) = d.sqrt_weight * s(i, j);
  });
  return out;
}

Eigen::MatrixXd FitProblem::jacobian(const Eigen::VectorXd& p, const Eigen::VectorXd& r,
                                     double step) const {
  Eigen::MatrixXd jac(r.size(), p.size());
  for (int k = 0; k < p.size(); ++k) {
    Eigen::VectorXd q = p;
    const double h = step * std::max(1.0, std::fabs(p(k)));
    q(k) += h;
    const double actual = q(k) - p(k);
    jac.col(k) = (residuals(q) - r) / actual;
  }
  return jac;
}

Eigen::VectorXd FitProblem::gradient(const Eigen::VectorXd& p, double step) const {
  const Eigen::VectorXd r = residuals(p);
  return 2.0 * jacobian(p, r, step).transpose() * r;
}

FitResult fit_potential(const Chart& chart, SolitonKind kind, const BasisExpansion& basis,
                        const FitResult& init, const GridSpec& grid, const FitOptions& opts) {
  BasisExpansion b = basis;
  if (!init.coefficients.empty()) {
    if (init.coefficients.size() != b.size()) {
      throw FitError("initial coefficients: expected " + std::to_string(b.size()) + ", got " +
                     std::to_string(init.coefficients.size()));
    }
    b.coefficients = init.coefficients;
  }
  const FitProblem problem(chart, kind, b, grid);

  FitResult out;
  Eigen::VectorXd p = problem.pack(b.coefficients, init.lambda, init.mu);
  const int lam = problem.parameter_count() - 2;
  auto clamp_lambda = [&](Eigen::VectorXd& q, double sign_hint) {
    if (std::fabs(q(lam)) < opts.lambda_clamp) {
      const double sign = q(lam) != 0.0 ? (q(lam) > 0 ? 1.0 : -1.0) : (sign_hint < 0 ? -1.0 : 1.0);
      q(lam) = sign * opts.lambda_clamp;
      out.lambda_clamped = true;
    }
  };
  clamp_lambda(p, init.lambda);

  Eigen::VectorXd r = problem.residuals(p);
  double cost = r.squaredNorm();
  out.history.push_back(cost);
  double damping = -1.0;
  out.termination = "max_iterations";
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const Eigen::MatrixXd jac = problem.jacobian(p, r, opts.jacobian_step);
    const Eigen::VectorXd g = jac.transpose() * r;
    out.gradient_norm = 2.0 * g.norm();
    if (out.gradient_norm <= opts.gradient_tolerance) {
      out.converged = true;
      out.termination = "gradient";
      break;
    }
    const Eigen::MatrixXd a = jac.transpose() * jac;
    if (damping < 0.0) damping = opts.initial_damping * std::max(1e-12, a.diagonal().maxCoeff());
    bool accepted = false;
    bool small_step = false;
    while (!accepted) {
      Eigen::MatrixXd damped = a;
      damped.diagonal().array() += damping;
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      if (!delta.allFinite()) throw FitError("normal equations could not be solved");
      if (delta.norm() <= opts.step_tolerance * (1.0 + p.norm())) {
        small_step = true;
        break;
      }
      Eigen::VectorXd q = p + delta;
      clamp_lambda(q, p(lam));
      const Eigen::VectorXd rq = problem.residuals(q);
      const double cq = rq.squaredNorm();
      if (std::isfinite(cq) && cq < cost) {
        p = q;
        r = rq;
        cost = cq;
        out.history.push_back(cost);
        damping = std::max(damping / 3.0, 1e-300);
        accepted = true;
      } else {
        damping *= 4.0;
        if (damping > 1e30) break;
      }
    }
    if (small_step) {
      out.converged = true;
      out.termination = "step";
      ++iter;
      break;
    }
    if (!accepted) {
      out.termination = "damping_exhausted";
      ++iter;
      break;
    }
  }
  out.iterations = iter;
  problem.unpack(p, out.coefficients, out.lambda, out.mu);
  out.objective = cost;
  if (out.termination == "max_iterations" || out.termination == "damping_exhausted") {
    const Eigen::VectorXd g = problem.gradient(p, opts.jacobian_step);
    out.gradient_norm = g.norm();
    // A zero-residual minimum reached to rounding is still a converged fit.
    out.converged = cost <= 1e-24;
  }
  return out;
}

double fit_objective(const Chart& chart, SolitonKind kind, const BasisExpansion& basis,
                     const FitResult& at, const GridSpec& grid) {
  BasisExpansion b = basis;
  b.coefficients = at.coefficients;
  const FitProblem problem(chart, kind, b, grid);
  return problem.objective(problem.pack(at.coefficients, at.lambda, at.mu));
}

}  // namespace solitons
