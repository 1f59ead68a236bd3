#pragma once

// Coordinate charts and the Riemannian operators used by the soliton checks.
//
// Every quantity is carried as a jet. Taking a coordinate derivative lowers
// the order through which a jet is exact by one, so with metric jets of order
// K:
//   g, g^-1          exact through K
//   Christoffel      exact through K-1
//   Ric, r           exact through K-2
// K = 3 covers Ric, grad r and div(Ric). Quantities that differentiate
// L_{grad f} L_{grad f} g need K = 4.

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "solitons/expr.hpp"
#include "solitons/jet.hpp"

namespace solitons {

template <class T>
using Vec = std::array<T, kMaxDim>;
template <class T>
using Mat = std::array<Vec<T>, kMaxDim>;
/// Rank-3 array indexed [k][i][j] (Christoffel symbols Gamma^k_ij).
template <class T>
using Tri = std::array<Mat<T>, kMaxDim>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ChartSpec {
  std::string name;
  std::vector<std::string> coords;
  std::vector<Interval> domain;
  std::vector<bool> periodic;
  std::vector<double> exclusion_margin;
  /// Full n x n table of metric components; both symmetric slots present.
  std::vector<std::vector<Expr>> metric;
};

class Chart {
 public:
  explicit Chart(ChartSpec spec);

  int dim() const { return n_; }
  const std::string& name() const { return spec_.name; }
  const std::vector<std::string>& coords() const { return spec_.coords; }
  const Interval& domain(int i) const { return spec_.domain[i]; }
  bool periodic(int i) const { return spec_.periodic[i]; }
  double exclusion_margin(int i) const { return spec_.exclusion_margin[i]; }
  const Expr& metric_expr(int i, int j) const { return spec_.metric[i][j]; }

  /// Sampled interval of coordinate i (domain shrunk by the exclusion margin).
  Interval sampled(int i) const;
  bool contains(std::span<const double> x) const;

  template <int K>
  Mat<Jet<K>> metric_jets(std::span<const double> x) const;

 private:
  ChartSpec spec_;
  int n_ = 0;
  std::vector<std::vector<bool>> mirrored_;  // g_ij read from g_ji
};

template <int K>
class Frame {
 public:
  Frame(const Chart& chart, std::span<const double> x);

  int dim() const { return n_; }
  std::span<const double> point() const { return {x_.data(), static_cast<std::size_t>(n_)}; }

  const Mat<Jet<K>>& g() const { return g_; }
  const Mat<Jet<K>>& ginv() const { return ginv_; }
  /// Gamma^k_ij as christoffel()[k][i][j].
  const Tri<Jet<K>>& christoffel() const { return gamma_; }
  const Mat<Jet<K>>& ricci() const { return ric_; }
  const Jet<K>& scalar_curvature() const { return r_; }
  double sqrt_det() const { return sqrt_det_; }

  double metric(int i, int j) const { return g_[i][j].value(); }
  double inverse_metric(int i, int j) const { return ginv_[i][j].value(); }

 private:
  int n_;
  std::array<double, kMaxDim> x_{};
  Mat<Jet<K>> g_, ginv_, ric_;
  Tri<Jet<K>> gamma_;
  Jet<K> r_;
  double sqrt_det_ = 0.0;
};

using PointFrame = Frame<3>;

struct ScalarField {
  Expr expr;
  template <int K>
  Jet<K> jet(std::span<const double> x) const {
    return expr.eval_jet<K>(x);
  }
};

struct VectorField {
  std::vector<Expr> components;  // contravariant
  template <int K>
  Vec<Jet<K>> jet(std::span<const double> x) const {
    Vec<Jet<K>> v{};
    for (std::size_t i = 0; i < components.size(); ++i) v[i] = components[i].eval_jet<K>(x);
    return v;
  }
};

/// Symmetric 2-tensor given by its upper-triangular components, row major.
struct SymTensorField {
  int n = 0;
  std::vector<Expr> upper;
  template <int K>
  Mat<Jet<K>> jet(std::span<const double> x) const {
    Mat<Jet<K>> t{};
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        t[i][j] = upper[k++].eval_jet<K>(x);
        t[j][i] = t[i][j];
      }
    return t;
  }
};

// ---------------------------------------------------------------------------
// Operators. Vector fields are contravariant, covectors covariant.

/// d f as a covector, (df)_i = d_i f.
template <int K>
Vec<Jet<K>> differential(const Jet<K>& f, int n);

/// (grad f)^i = g^ij d_j f
template <int K>
Vec<Jet<K>> gradient(const Jet<K>& f, const Frame<K>& fr);

/// (Hess f)_ij = d_i d_j f - Gamma^k_ij d_k f
template <int K>
Mat<Jet<K>> hessian(const Jet<K>& f, const Frame<K>& fr);

/// Delta f = g^ij (Hess f)_ij  (Delta = div grad)
template <int K>
Jet<K> laplacian(const Jet<K>& f, const Frame<K>& fr);

/// Lie derivative of a symmetric covariant 2-tensor along xi:
/// (L_xi T)_ij = xi^k d_k T_ij + T_kj d_i xi^k + T_ik d_j xi^k
template <int K>
Mat<Jet<K>> lie_derivative(const Vec<Jet<K>>& xi, const Mat<Jet<K>>& t, int n);

template <int K>
Mat<Jet<K>> lie_metric(const Vec<Jet<K>>& xi, const Frame<K>& fr);

/// L_xi (L_xi g)
template <int K>
Mat<Jet<K>> lie2_metric(const Vec<Jet<K>>& xi, const Frame<K>& fr);

/// (nabla xi)[i][k] = nabla_i xi^k = d_i xi^k + Gamma^k_ij xi^j
template <int K>
Mat<Jet<K>> covariant_derivative(const Vec<Jet<K>>& xi, const Frame<K>& fr);

/// (nabla_xi xi)^k = xi^i d_i xi^k + Gamma^k_ij xi^i xi^j
template <int K>
Vec<Jet<K>> cov_accel(const Vec<Jet<K>>& xi, const Frame<K>& fr);

/// div xi = d_i xi^i + Gamma^i_ik xi^k
template <int K>
Jet<K> div_vector(const Vec<Jet<K>>& xi, const Frame<K>& fr);

/// (div T)_j = g^ik nabla_i T_kj. T must be a jet field (one derivative is
/// consumed).
template <int K>
Vec<Jet<K>> div_tensor(const Mat<Jet<K>>& t, const Frame<K>& fr);

template <int K>
Jet<K> trace_g(const Mat<Jet<K>>& t, const Frame<K>& fr);

/// |T|^2 = g^ia g^jb T_ij T_ab
template <int K>
Jet<K> norm2(const Mat<Jet<K>>& t, const Frame<K>& fr);

/// g(u, v) for contravariant u, v.
template <int K>
Jet<K> inner(const Vec<Jet<K>>& u, const Vec<Jet<K>>& v, const Frame<K>& fr);

/// T(u, v) = T_ij u^i v^j
template <int K>
Jet<K> contract(const Mat<Jet<K>>& t, const Vec<Jet<K>>& u, const Vec<Jet<K>>& v, int n);

/// |nabla xi|^2 = g_ka g^ib nabla_i xi^k nabla_b xi^a
template <int K>
Jet<K> norm2_covariant_derivative(const Vec<Jet<K>>& xi, const Frame<K>& fr);

/// Covector with upper index: v^i = g^ij w_j.
template <int K>
Vec<Jet<K>> raise(const Vec<Jet<K>>& w, const Frame<K>& fr);

/// Values of a jet matrix / vector.
template <int K>
Mat<double> values(const Mat<Jet<K>>& m, int n) {
  Mat<double> r{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r[i][j] = m[i][j].value();
  return r;
}
template <int K>
Vec<double> values(const Vec<Jet<K>>& v, int n) {
  Vec<double> r{};
  for (int i = 0; i < n; ++i) r[i] = v[i].value();
  return r;
}

}  // namespace solitons
