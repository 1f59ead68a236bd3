#pragma once

// Hyperbolic Ricci / Yamabe soliton residuals, the identity catalog and the
// triviality verdicts.
//
//   hyperbolic Ricci:   L_xi L_xi g + lambda L_xi g + Ric = mu g
//   hyperbolic Yamabe:  L_xi L_xi g + lambda L_xi g      = (mu - r) g
//
// A soliton is trivial when xi is Killing (L_xi g = 0).

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "solitons/geometry.hpp"
#include "solitons/quadrature.hpp"

namespace solitons {

enum class SolitonKind { HyperbolicRicci, HyperbolicYamabe };

std::string to_string(SolitonKind kind);

using Potential = std::variant<ScalarField, VectorField>;

struct SolitonSpec {
  SolitonKind kind = SolitonKind::HyperbolicYamabe;
  Potential potential;  // ScalarField f means xi = grad f
  double lambda = 1.0;
  double mu = 0.0;

  bool is_gradient() const { return std::holds_alternative<ScalarField>(potential); }
};

class CheckError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Verdict { IdentityHolds, HypothesisNotMet, Violated };

std::string to_string(Verdict v);

struct Tolerances {
  double pointwise = 1e-8;
  double integral = 1e-7;
  double hypothesis = 1e-7;
};

/// A named quantity compared against a tolerance.
struct Measure {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool ok() const { return value <= tolerance; }
};

struct CheckReport {
  std::string id;
  /// Largest asserted residual (identity lines or theorem conclusions).
  double max_residual = 0.0;
  std::vector<Measure> residuals;
  std::vector<Measure> hypotheses;
  std::vector<std::pair<std::string, double>> integrals;
  std::vector<std::pair<std::string, double>> values;  // informational
  std::vector<std::string> notes;
  bool applicable = true;
  Verdict verdict = Verdict::IdentityHolds;
  GridSpec grid;

  const Measure* residual(const std::string& name) const;
  const Measure* hypothesis(const std::string& name) const;
  std::optional<double> integral(const std::string& name) const;
  std::optional<double> value(const std::string& name) const;
};

/// Soliton equation left-minus-right at a frame.
template <int K>
Mat<double> residual(const SolitonSpec& spec, const Frame<K>& fr);

/// (2 lambda Delta f, n (mu - r)) for Yamabe, (2 lambda Delta f, n mu - r)
/// for Ricci. Requires a gradient potential.
template <int K>
std::pair<double, double> contracted_trace(const SolitonSpec& spec, const Frame<K>& fr);

/// Everything the checks need at one quadrature node.
struct NodeSample {
  static constexpr double kUnavailable = std::numeric_limits<double>::quiet_NaN();

  std::array<double, kMaxDim> x{};
  double weight = 0.0;  // quadrature weight times sqrt(det g)

  double r = 0.0;
  Vec<double> dr{};  // d_j r
  double grad_r_norm2 = 0.0;
  Vec<double> div_ric{};
  double div_ric_scale = 1.0;  // largest sum of |summands| in div Ric (= d r / 2)
  double einstein_deviation = 0.0;  // |Ric - (r/n) g|

  double residual_norm = 0.0;
  double residual_trace = 0.0;
  double trace_lie2 = 0.0;
  double grad_trace_lie2_norm = kUnavailable;  // |d trace(L L g)|
  double div_lie2_norm = kUnavailable;         // |div(L L g)|
  double div_xi = 0.0;
  double killing_norm = 0.0;
  double ric_xi_xi = 0.0;
  double norm2_nabla_xi = 0.0;
  double div_accel = 0.0;

  // gradient potentials only
  double laplacian_f = 0.0;
  double hess_norm2 = 0.0;
  double half_lap_grad_norm2 = 0.0;
  double grad_lap_dot_grad = 0.0;
  double ric_grad_grad = 0.0;
  double grad_f_dot_grad_r = 0.0;
  double ric_grad_f_grad_r = 0.0;
  Vec<double> div_lie{};   // div(L_{grad f} g)_j
  Vec<double> d_lap{};     // d_j Delta f
  Vec<double> ric_grad{};  // Ric(d_j, grad f)
};

/// Node samples for one (spec, chart, grid), computed lazily. Derivatives of
/// L_{grad f} L_{grad f} g need order-4 jets; they are computed only when a
/// check asks for them.
class SolitonEvaluation {
 public:
  SolitonEvaluation(SolitonSpec spec, const Chart& chart, GridSpec grid);

  const SolitonSpec& spec() const { return spec_; }
  const Chart& chart() const { return chart_; }
  const Grid& grid() const { return grid_; }
  int dim() const { return chart_.dim(); }

  const std::vector<NodeSample>& samples(bool need_lie2_derivatives = false);

  /// Integral of a per-node quantity.
  template <class Fn>
  double integrate(Fn&& fn) {
    const auto& s = samples();
    double acc = 0.0;
    for (const auto& node : s) acc += node.weight * fn(node);
    return acc;
  }

 private:
  SolitonSpec spec_;
  const Chart& chart_;
  Grid grid_;
  std::vector<NodeSample> samples_;
  bool have_ = false;
  bool have_lie2_derivatives_ = false;
};

/// Check ids accepted by run_check, in canonical order.
const std::vector<std::string>& check_ids();
bool is_check_id(const std::string& id);
/// Checks that need xi = grad f.
bool requires_gradient(const std::string& id);

/// Largest relative residuals of the four unconditional identities, from
/// order-3 samples. bochner and div_lie need a gradient potential (NaN
/// otherwise).
struct UnconditionalResiduals {
  double trace_formula = 0.0;
  double bochner = NodeSample::kUnavailable;
  double div_lie = NodeSample::kUnavailable;
  double schur = 0.0;
};
UnconditionalResiduals unconditional_residuals(SolitonEvaluation& ev);

CheckReport run_check(const std::string& id, SolitonEvaluation& ev,
                      const Tolerances& tol = Tolerances{});

// Convenience entry points mirroring the individual checks.

/// max over nodes of |L_xi g| (metric norm).
double killing_residual(const Potential& xi, const Chart& chart, const GridSpec& grid);

CheckReport identity_trace_lie2(const Potential& xi, const Chart& chart, const GridSpec& grid,
                                const Tolerances& tol = Tolerances{});
CheckReport identity_bochner(const ScalarField& f, const Chart& chart, const GridSpec& grid,
                             const Tolerances& tol = Tolerances{});
CheckReport identity_schur(const Chart& chart, const GridSpec& grid,
                           const Tolerances& tol = Tolerances{});
CheckReport evaluate_check(const std::string& id, const SolitonSpec& spec, const Chart& chart,
                           const GridSpec& grid, const Tolerances& tol = Tolerances{});

extern template Mat<double> residual<3>(const SolitonSpec&, const Frame<3>&);
extern template Mat<double> residual<4>(const SolitonSpec&, const Frame<4>&);
extern template std::pair<double, double> contracted_trace<3>(const SolitonSpec&,
                                                              const Frame<3>&);
extern template std::pair<double, double> contracted_trace<4>(const SolitonSpec&,
                                                              const Frame<4>&);

}  // namespace solitons
