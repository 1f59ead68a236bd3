#include "solitons/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace solitons {

namespace {

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

Chart::Chart(ChartSpec spec) : spec_(std::move(spec)) {
  n_ = static_cast<int>(spec_.coords.size());
  if (n_ < 2 || n_ > kMaxDim) {
    throw GeometryError("chart dimension must be in 2..4, got " + std::to_string(n_));
  }
  const auto n = static_cast<std::size_t>(n_);
  if (spec_.domain.size() != n || spec_.periodic.size() != n ||
      spec_.exclusion_margin.size() != n || spec_.metric.size() != n) {
    throw GeometryError("chart '" + spec_.name + "': per-coordinate arrays must have length " +
                        std::to_string(n_));
  }
  mirrored_.assign(n, std::vector<bool>(n, false));
  for (int i = 0; i < n_; ++i) {
    if (spec_.metric[i].size() != n) {
      throw GeometryError("chart '" + spec_.name + "': metric row " + std::to_string(i) +
                          " must have " + std::to_string(n_) + " entries");
    }
    const auto& dom = spec_.domain[i];
    if (!(dom.hi > dom.lo)) {
      throw GeometryError("chart '" + spec_.name + "': empty domain for coordinate " +
                          spec_.coords[i]);
    }
    if (spec_.exclusion_margin[i] < 0.0 || 2 * spec_.exclusion_margin[i] >= dom.hi - dom.lo) {
      throw GeometryError("chart '" + spec_.name + "': invalid exclusion margin for " +
                          spec_.coords[i]);
    }
  }
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      auto& e = spec_.metric[i][j];
      if (!e.empty()) continue;
      if (i > j && !spec_.metric[j][i].empty()) {
        mirrored_[i][j] = true;
      } else {
        throw GeometryError("chart '" + spec_.name + "': metric[" + std::to_string(i) + "][" +
                            std::to_string(j) + "] missing");
      }
    }
  }
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (!mirrored_[j][i] &&
          structurally_equal(spec_.metric[i][j].root(), spec_.metric[j][i].root())) {
        mirrored_[j][i] = true;
      }
}

Interval Chart::sampled(int i) const {
  const auto& d = spec_.domain[i];
  const double m = spec_.exclusion_margin[i];
  return {d.lo + m, d.hi - m};
}

bool Chart::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_) return false;
  for (int i = 0; i < n_; ++i) {
    if (!std::isfinite(x[i])) return false;
    if (spec_.periodic[i]) continue;
    const auto s = sampled(i);
    if (x[i] < s.lo || x[i] > s.hi) return false;
  }
  return true;
}

template <int K>
Mat<Jet<K>> Chart::metric_jets(std::span<const double> x) const {
  Mat<Jet<K>> g{};
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      g[i][j] = spec_.metric[i][j].eval_jet<K>(x);
      if (i == j) continue;
      if (mirrored_[j][i]) {
        g[j][i] = g[i][j];
        continue;
      }
      const Jet<K> other = spec_.metric[j][i].eval_jet<K>(x);
      const double scale = std::max(1.0, std::fabs(g[i][j].value()));
      if (std::fabs(other.value() - g[i][j].value()) > 1e-14 * scale) {
        throw GeometryError("metric not symmetric: g[" + std::to_string(i) + "][" +
                            std::to_string(j) + "] != g[" + std::to_string(j) + "][" +
                            std::to_string(i) + "] at " + format_point(x));
      }
      g[j][i] = g[i][j];
    }
  }
  return g;
}

template <int K>
Frame<K>::Frame(const Chart& chart, std::span<const double> x) : n_(chart.dim()) {
  if (!chart.contains(x)) {
    throw GeometryError("point " + format_point(x) + " outside the domain of chart '" +
                        chart.name() + "'");
  }
  const int n = n_;
  for (int i = 0; i < n; ++i) x_[i] = x[i];
  g_ = chart.metric_jets<K>(x);

  Eigen::MatrixXd g0(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g0(i, j) = g_[i][j].value();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g0);
  const Eigen::VectorXd pivots = ldlt.vectorD();
  double det = 1.0;
  for (int i = 0; i < n; ++i) {
    if (!(pivots(i) > 0.0) || ldlt.info() != Eigen::Success) {
      throw GeometryError("metric not positive definite at " + format_point(x));
    }
    det *= pivots(i);
  }
  sqrt_det_ = std::sqrt(det);
  const Eigen::MatrixXd g0inv = ldlt.solve(Eigen::MatrixXd::Identity(n, n));

  // g^-1 = sum_m (-A)^m g0^-1 with A = g0^-1 (g - g0); A has no constant
  // term so the series terminates at m = K.
  Mat<Jet<K>> a{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet<K> s = Jet<K>::constant(n, 0.0);
      for (int l = 0; l < n; ++l) {
        Jet<K> h = g_[l][j];
        h.coeff(0) = 0.0;
        s += h * (-g0inv(i, l));
      }
      a[i][j] = s;
    }
  Mat<Jet<K>> power{}, series{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      power[i][j] = Jet<K>::constant(n, i == j ? 1.0 : 0.0);
      series[i][j] = power[i][j];
    }
  for (int m = 1; m <= K; ++m) {
    Mat<Jet<K>> next{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet<K> s = Jet<K>::constant(n, 0.0);
        for (int l = 0; l < n; ++l) s += power[i][l] * a[l][j];
        next[i][j] = s;
      }
    power = next;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) series[i][j] += power[i][j];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet<K> s = Jet<K>::constant(n, 0.0);
      for (int l = 0; l < n; ++l) s += series[i][l] * g0inv(l, j);
      ginv_[i][j] = s;
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Jet<K> avg = (ginv_[i][j] + ginv_[j][i]) * 0.5;
      ginv_[i][j] = avg;
      ginv_[j][i] = avg;
    }

  // dg[a][b][c] = d_a g_bc
  Tri<Jet<K>> dg{};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        dg[a][b][c] = g_[b][c].derivative(a);
        dg[a][c][b] = dg[a][b][c];
      }
  // first kind: Gamma_lij = (d_i g_jl + d_j g_il - d_l g_ij) / 2
  Tri<Jet<K>> first{};
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        first[l][i][j] = (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]) * 0.5;
        first[l][j][i] = first[l][i][j];
      }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet<K> s = Jet<K>::constant(n, 0.0);
        for (int l = 0; l < n; ++l) s += ginv_[k][l] * first[l][i][j];
        gamma_[k][i][j] = s;
        gamma_[k][j][i] = s;
      }

  // Ric_ij = d_k G^k_ij - d_i G^k_kj + G^k_kl G^l_ij - G^k_il G^l_kj
  Vec<Jet<K>> trace_gamma{};  // G^k_kj
  for (int j = 0; j < n; ++j) {
    Jet<K> s = Jet<K>::constant(n, 0.0);
    for (int k = 0; k < n; ++k) s += gamma_[k][k][j];
    trace_gamma[j] = s;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet<K> s = Jet<K>::constant(n, 0.0);
      for (int k = 0; k < n; ++k) s += gamma_[k][i][j].derivative(k);
      s -= trace_gamma[j].derivative(i);
      for (int l = 0; l < n; ++l) s += trace_gamma[l] * gamma_[l][i][j];
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s -= gamma_[k][i][l] * gamma_[l][k][j];
      ric_[i][j] = s;
      ric_[j][i] = s;
    }
  r_ = trace_g(ric_, *this);
}

template <int K>
Vec<Jet<K>> differential(const Jet<K>& f, int n) {
  Vec<Jet<K>> df{};
  for (int i = 0; i < n; ++i) df[i] = f.derivative(i);
  return df;
}

template <int K>
Vec<Jet<K>> raise(const Vec<Jet<K>>& w, const Frame<K>& fr) {
  const int n = fr.dim();
  Vec<Jet<K>> v{};
  for (int i = 0; i < n; ++i) {
    Jet<K> s = Jet<K>::constant(n, 0.0);
    for (int j = 0; j < n; ++j) s += fr.ginv()[i][j] * w[j];
    v[i] = s;
  }
  return v;
}

template <int K>
Vec<Jet<K>> gradient(const Jet<K>& f, const Frame<K>& fr) {
  return raise(differential(f, fr.dim()), fr);
}

template <int K>
Mat<Jet<K>> hessian(const Jet<K>& f, const Frame<K>& fr) {
  const int n = fr.dim();
  const auto df = differential(f, n);
  Mat<Jet<K>> h{};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet<K> s = df[j].derivative(i);
      for (int k = 0; k < n; ++k) s -= fr.christoffel()[k][i][j] * df[k];
      h[i][j] = s;
      h[j][i] = s;
    }
  return h;
}

template <int K>
Jet<K> laplacian(const Jet<K>& f, const Frame<K>& fr) {
  return trace_g(hessian(f, fr), fr);
}

template <int K>
Mat<Jet<K>> lie_derivative(const Vec<Jet<K>>& xi, const Mat<Jet<K>>& t, int n) {
  Mat<Jet<K>> dxi{};  // dxi[i][k] = d_i xi^k
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) dxi[i][k] = xi[k].derivative(i);
  Mat<Jet<K>> out{};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet<K> s = Jet<K>::constant(n, 0.0);
      for (int k = 0; k < n; ++k) {
        s += xi[k] * t[i][j].derivative(k);
        s += t[k][j] * dxi[i][k];
        s += t[i][k] * dxi[j][k];
      }
      out[i][j] = s;
      out[j][i] = s;
    }
  return out;
}

template <int K>
Mat<Jet<K>> lie_metric(const Vec<Jet<K>>& xi, const Frame<K>& fr) {
  return lie_derivative(xi, fr.g(), fr.dim());
}

template <int K>
Mat<Jet<K>> lie2_metric(const Vec<Jet<K>>& xi, const Frame<K>& fr) {
  return lie_derivative(xi, lie_metric(xi, fr), fr.dim());
}

template <int K>
Mat<Jet<K>> covariant_derivative(const Vec<Jet<K>>& xi, const Frame<K>& fr) {
  const int n = fr.dim();
  Mat<Jet<K>> out{};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      Jet<K> s = xi[k].derivative(i);
      for (int j = 0; j < n; ++j) s += fr.christoffel()[k][i][j] * xi[j];
      out[i][k] = s;
    }
  return out;
}

template <int K>
Vec<Jet<K>> cov_accel(const Vec<Jet<K>>& xi, const Frame<K>& fr) {
  const int n = fr.dim();
  Vec<Jet<K>> out{};
  for (int k = 0; k < n; ++k) {
    Jet<K> s = Jet<K>::constant(n, 0.0);
    for (int i = 0; i < n; ++i) {
      s += xi[i] * xi[k].derivative(i);
      Jet<K> gx = Jet<K>::constant(n, 0.0);
      for (int j = 0; j < n; ++j) gx += fr.christoffel()[k][i][j] * xi[j];
      s += gx * xi[i];
    }
    out[k] = s;
  }
  return out;
}

template <int K>
Jet<K> div_vector(const Vec<Jet<K>>& xi, const Frame<K>& fr) {
  const int n = fr.dim();
  Jet<K> s = Jet<K>::constant(n, 0.0);
  for (int i = 0; i < n; ++i) {
    s += xi[i].derivative(i);
    for (int k = 0; k < n; ++k) s += fr.christoffel()[i][i][k] * xi[k];
  }
  return s;
}

template <int K>
Vec<Jet<K>> div_tensor(const Mat<Jet<K>>& t, const Frame<K>& fr) {
  const int n = fr.dim();
  const auto& gam = fr.christoffel();
  Vec<Jet<K>> out{};
  for (int j = 0; j < n; ++j) {
    Jet<K> s = Jet<K>::constant(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        // nabla_i T_kj = d_i T_kj - G^l_ik T_lj - G^l_ij T_kl
        Jet<K> cov = t[k][j].derivative(i);
        for (int l = 0; l < n; ++l) {
          cov -= gam[l][i][k] * t[l][j];
          cov -= gam[l][i][j] * t[k][l];
        }
        s += fr.ginv()[i][k] * cov;
      }
    out[j] = s;
  }
  return out;
}

template <int K>
Jet<K> trace_g(const Mat<Jet<K>>& t, const Frame<K>& fr) {
  const int n = fr.dim();
  Jet<K> s = Jet<K>::constant(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += fr.ginv()[i][j] * t[i][j];
  return s;
}

template <int K>
Jet<K> norm2(const Mat<Jet<K>>& t, const Frame<K>& fr) {
  const int n = fr.dim();
  // mixed[i][b] = g^ia T_ab, |T|^2 = mixed[i][b] mixed[b][i]
  Mat<Jet<K>> mixed{};
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < n; ++b) {
      Jet<K> s = Jet<K>::constant(n, 0.0);
      for (int a = 0; a < n; ++a) s += fr.ginv()[i][a] * t[a][b];
      mixed[i][b] = s;
    }
  Jet<K> s = Jet<K>::constant(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < n; ++b) s += mixed[i][b] * mixed[b][i];
  return s;
}

template <int K>
Jet<K> inner(const Vec<Jet<K>>& u, const Vec<Jet<K>>& v, const Frame<K>& fr) {
  return contract(fr.g(), u, v, fr.dim());
}

template <int K>
Jet<K> contract(const Mat<Jet<K>>& t, const Vec<Jet<K>>& u, const Vec<Jet<K>>& v, int n) {
  Jet<K> s = Jet<K>::constant(n, 0.0);
  for (int i = 0; i < n; ++i) {
    Jet<K> tv = Jet<K>::constant(n, 0.0);
    for (int j = 0; j < n; ++j) tv += t[i][j] * v[j];
    s += u[i] * tv;
  }
  return s;
}

template <int K>
Jet<K> norm2_covariant_derivative(const Vec<Jet<K>>& xi, const Frame<K>& fr) {
  const int n = fr.dim();
  const auto nab = covariant_derivative(xi, fr);  // nab[i][k] = nabla_i xi^k
  // lowered[i][a] = g_ak nabla_i xi^k ; |nabla xi|^2 = g^ib lowered[i][a] nab[b][a]
  Mat<Jet<K>> lowered{};
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) {
      Jet<K> s = Jet<K>::constant(n, 0.0);
      for (int k = 0; k < n; ++k) s += fr.g()[a][k] * nab[i][k];
      lowered[i][a] = s;
    }
  Jet<K> s = Jet<K>::constant(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < n; ++b) {
      Jet<K> row = Jet<K>::constant(n, 0.0);
      for (int a = 0; a < n; ++a) row += lowered[i][a] * nab[b][a];
      s += fr.ginv()[i][b] * row;
    }
  return s;
}

#define SOLITONS_INSTANTIATE(K)                                                           \
  template class Frame<K>;                                                                \
  template Mat<Jet<K>> Chart::metric_jets<K>(std::span<const double>) const;              \
  template Vec<Jet<K>> differential(const Jet<K>&, int);                                  \
  template Vec<Jet<K>> raise(const Vec<Jet<K>>&, const Frame<K>&);                        \
  template Vec<Jet<K>> gradient(const Jet<K>&, const Frame<K>&);                          \
  template Mat<Jet<K>> hessian(const Jet<K>&, const Frame<K>&);                           \
  template Jet<K> laplacian(const Jet<K>&, const Frame<K>&);                              \
  template Mat<Jet<K>> lie_derivative(const Vec<Jet<K>>&, const Mat<Jet<K>>&, int);       \
  template Mat<Jet<K>> lie_metric(const Vec<Jet<K>>&, const Frame<K>&);                   \
  template Mat<Jet<K>> lie2_metric(const Vec<Jet<K>>&, const Frame<K>&);                  \
  template Mat<Jet<K>> covariant_derivative(const Vec<Jet<K>>&, const Frame<K>&);         \
  template Vec<Jet<K>> cov_accel(const Vec<Jet<K>>&, const Frame<K>&);                    \
  template Jet<K> div_vector(const Vec<Jet<K>>&, const Frame<K>&);                        \
  template Vec<Jet<K>> div_tensor(const Mat<Jet<K>>&, const Frame<K>&);                   \
  template Jet<K> trace_g(const Mat<Jet<K>>&, const Frame<K>&);                           \
  template Jet<K> norm2(const Mat<Jet<K>>&, const Frame<K>&);                             \
  template Jet<K> inner(const Vec<Jet<K>>&, const Vec<Jet<K>>&, const Frame<K>&);         \
  template Jet<K> contract(const Mat<Jet<K>>&, const Vec<Jet<K>>&, const Vec<Jet<K>>&, int); \
  template Jet<K> norm2_covariant_derivative(const Vec<Jet<K>>&, const Frame<K>&);

template Mat<Jet<1>> Chart::metric_jets<1>(std::span<const double>) const;
SOLITONS_INSTANTIATE(2)
SOLITONS_INSTANTIATE(3)
SOLITONS_INSTANTIATE(4)

#undef SOLITONS_INSTANTIATE

}  // namespace solitons
