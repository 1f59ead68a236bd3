#pragma once

// Truncated multivariate Taylor jets.
//
// A Jet<K> over `dim` coordinates stores the Taylor coefficients
//   c_alpha = (d^alpha f)(x) / alpha!
// for every multi-index alpha with |alpha| <= K. Arithmetic is exact
// truncated-series arithmetic, so all partials up to order K come out with
// rounding error only.
//
// A jet of dimension 0 is a plain constant and combines with jets of any
// dimension.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace solitons {

inline constexpr int kMaxDim = 4;

/// Raised when an elementary function is applied outside its domain.
class JetDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

constexpr int binomial(int n, int k) {
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

using MultiIndex = std::array<int, kMaxDim>;

// Coefficient layout for a fixed (dim, order): graded enumeration of
// multi-indices plus product and derivative tables.
struct JetLayout {
  struct Product {
    std::uint8_t a, b, c;
  };
  struct DerivTerm {
    std::uint8_t target, source;
    double factor;
  };

  int dim = 0;
  int order = 0;
  int size = 0;
  std::vector<MultiIndex> alpha;
  std::vector<int> degree;
  std::vector<double> alpha_factorial;
  std::vector<Product> products;
  std::array<std::vector<DerivTerm>, kMaxDim> deriv;
  std::vector<int> lookup;  // base-(order+1) encoding -> index, -1 if absent

  int encode(const MultiIndex& a) const {
    int code = 0;
    for (int i = kMaxDim - 1; i >= 0; --i) code = code * (order + 1) + a[i];
    return code;
  }

  int index(const MultiIndex& a) const {
    int total = 0;
    for (int i = 0; i < kMaxDim; ++i) {
      if (a[i] < 0 || (i >= dim && a[i] != 0)) return -1;
      total += a[i];
    }
    if (total > order) return -1;
    return lookup[encode(a)];
  }

  JetLayout(int d, int k) : dim(d), order(k) {
    // graded enumeration: degree 0, then 1, ...; lexicographic within degree
    for (int deg = 0; deg <= k; ++deg) {
      MultiIndex a{};
      enumerate(a, 0, deg);
    }
    size = static_cast<int>(alpha.size());
    int codes = 1;
    for (int i = 0; i < kMaxDim; ++i) codes *= (k + 1);
    lookup.assign(codes, -1);
    for (int idx = 0; idx < size; ++idx) {
      lookup[encode(alpha[idx])] = idx;
      int deg = 0;
      double fact = 1.0;
      for (int i = 0; i < kMaxDim; ++i) {
        deg += alpha[idx][i];
        for (int m = 2; m <= alpha[idx][i]; ++m) fact *= m;
      }
      degree.push_back(deg);
      alpha_factorial.push_back(fact);
    }
    for (int a = 0; a < size; ++a) {
      for (int b = 0; b < size; ++b) {
        if (degree[a] + degree[b] > k) continue;
        MultiIndex s{};
        for (int i = 0; i < kMaxDim; ++i) s[i] = alpha[a][i] + alpha[b][i];
        products.push_back({static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                            static_cast<std::uint8_t>(index(s))});
      }
    }
    for (int i = 0; i < d; ++i) {
      for (int t = 0; t < size; ++t) {
        if (degree[t] >= k) continue;
        MultiIndex s = alpha[t];
        s[i] += 1;
        deriv[i].push_back({static_cast<std::uint8_t>(t), static_cast<std::uint8_t>(index(s)),
                            static_cast<double>(s[i])});
      }
    }
  }

 private:
  void enumerate(MultiIndex& a, int pos, int remaining) {
    if (pos == dim - 1 || dim == 0) {
      if (dim == 0) {
        if (remaining == 0) alpha.push_back(a);
        return;
      }
      a[pos] = remaining;
      alpha.push_back(a);
      a[pos] = 0;
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      a[pos] = v;
      enumerate(a, pos + 1, remaining - v);
    }
    a[pos] = 0;
  }
};

template <int K>
inline const std::array<JetLayout, kMaxDim + 1> layouts{JetLayout(0, K), JetLayout(1, K),
                                                        JetLayout(2, K), JetLayout(3, K),
                                                        JetLayout(4, K)};

template <int K>
inline const JetLayout& layout(int dim) {
  return layouts<K>[dim];
}

}  // namespace detail

template <int K>
class Jet {
  static_assert(K >= 1 && K <= 4, "supported jet orders are 1..4");

 public:
  static constexpr int kOrder = K;
  static constexpr int kCapacity = detail::binomial(kMaxDim + K, K);

  Jet() { c_.fill(0.0); }

  static Jet constant(int dim, double v) {
    check_dim(dim);
    Jet j;
    j.dim_ = dim;
    j.c_[0] = v;
    return j;
  }

  /// Jet of the i-th coordinate function at x.
  static Jet seed(std::span<const double> x, int i) {
    const int dim = static_cast<int>(x.size());
    check_dim(dim);
    if (i < 0 || i >= dim) {
      throw std::out_of_range("Jet::seed: variable index " + std::to_string(i) +
                              " out of range for dimension " + std::to_string(dim));
    }
    Jet j = constant(dim, x[i]);
    j.c_[j.layout().index(unit(i))] = 1.0;
    return j;
  }

  int dim() const { return dim_; }
  int size() const { return layout().size; }
  double value() const { return c_[0]; }

  /// Raw Taylor coefficient by graded index.
  double coeff(int idx) const { return c_[idx]; }
  double& coeff(int idx) { return c_[idx]; }

  /// Taylor coefficient of a multi-index (0 if |alpha| > K).
  double taylor(const detail::MultiIndex& a) const {
    const int idx = layout().index(a);
    return idx < 0 ? 0.0 : c_[idx];
  }

  /// Partial derivative d^alpha f.
  double partial(const detail::MultiIndex& a) const {
    const auto& L = layout();
    const int idx = L.index(a);
    return idx < 0 ? 0.0 : c_[idx] * L.alpha_factorial[idx];
  }
  double d(int i) const { return partial(unit(i)); }
  double d(int i, int j) const {
    auto a = unit(i);
    a[j] += 1;
    return partial(a);
  }
  double d(int i, int j, int k) const {
    auto a = unit(i);
    a[j] += 1;
    a[k] += 1;
    return partial(a);
  }

  /// Jet of the partial derivative along coordinate i. The top-order
  /// coefficients of the result are unknown and set to zero, so the result
  /// is exact only through order K-1.
  Jet derivative(int i) const {
    if (i < 0 || i >= dim_) {
      throw std::out_of_range("Jet::derivative: index " + std::to_string(i) + " out of range");
    }
    Jet r;
    r.dim_ = dim_;
    for (const auto& t : layout().deriv[i]) r.c_[t.target] = t.factor * c_[t.source];
    return r;
  }

  Jet operator-() const {
    Jet r = *this;
    for (int k = 0; k < size(); ++k) r.c_[k] = -r.c_[k];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    adopt(o);
    const int n = layout_for(dim_).size;
    const int m = o.size();
    for (int k = 0; k < std::min(n, m); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    adopt(o);
    const int n = layout_for(dim_).size;
    const int m = o.size();
    for (int k = 0; k < std::min(n, m); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator+=(double v) {
    c_[0] += v;
    return *this;
  }
  Jet& operator-=(double v) {
    c_[0] -= v;
    return *this;
  }
  Jet& operator*=(double v) {
    for (int k = 0; k < size(); ++k) c_[k] *= v;
    return *this;
  }
  Jet& operator/=(double v) {
    for (int k = 0; k < size(); ++k) c_[k] /= v;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator-(double a, const Jet& b) { return (-b) += a; }
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }
  friend Jet operator/(Jet a, double b) { return a /= b; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    if (a.dim_ == 0) return b * a.c_[0];
    if (b.dim_ == 0) return a * b.c_[0];
    check_same(a, b);
    Jet r;
    r.dim_ = a.dim_;
    const auto& products = a.layout().products;
    const auto* p = products.data();
    const auto* end = p + products.size();
    for (; p != end; ++p) r.c_[p->c] += a.c_[p->a] * b.c_[p->b];
    return r;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }

  friend Jet operator/(const Jet& a, const Jet& b) {
    if (b.dim_ == 0) {
      if (b.c_[0] == 0.0) throw JetDomainError("division by zero");
      return a / b.c_[0];
    }
    return a * reciprocal(b);
  }
  friend Jet operator/(double a, const Jet& b) { return reciprocal(b) * a; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  /// Univariate composition phi(a) given phi's derivatives at a.value():
  /// derivs[k] = phi^(k)(a0), k = 0..K.
  static Jet compose(const Jet& a, const std::array<double, K + 1>& derivs) {
    Jet h = a;
    h.c_[0] = 0.0;
    // Horner in h with Taylor coefficients derivs[k]/k!
    std::array<double, K + 1> t{};
    double fact = 1.0;
    for (int k = 0; k <= K; ++k) {
      if (k > 1) fact *= k;
      t[k] = derivs[k] / fact;
    }
    Jet r = constant(a.dim_, t[K]);
    for (int k = K - 1; k >= 0; --k) {
      r = r * h;
      r.c_[0] += t[k];
    }
    return r;
  }

  static Jet reciprocal(const Jet& b) {
    const double v = b.c_[0];
    if (v == 0.0) throw JetDomainError("division by zero");
    std::array<double, K + 1> d{};
    double p = 1.0 / v;  // (-1)^k k! / v^(k+1)
    for (int k = 0; k <= K; ++k) {
      d[k] = p;
      p *= -(k + 1) / v;
    }
    return compose(b, d);
  }

  bool is_constant() const {
    for (int k = 1; k < size(); ++k)
      if (c_[k] != 0.0) return false;
    return true;
  }

 private:
  static void check_dim(int dim) {
    if (dim < 0 || dim > kMaxDim) {
      throw std::invalid_argument("Jet: dimension " + std::to_string(dim) + " not in 0..4");
    }
  }
  static void check_same(const Jet& a, const Jet& b) {
    if (a.dim_ != b.dim_) [[unlikely]] dimension_mismatch(a.dim_, b.dim_);
  }
  [[noreturn]] static void dimension_mismatch(int a, int b) {
    throw std::invalid_argument("Jet: dimension mismatch (" + std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
  }
  // A constant (dim 0) operand takes the dimension of the other operand.
  void adopt(const Jet& o) {
    if (dim_ == 0) {
      dim_ = o.dim_;
    } else if (o.dim_ != 0) {
      check_same(*this, o);
    }
  }
  static detail::MultiIndex unit(int i) {
    detail::MultiIndex a{};
    a[i] = 1;
    return a;
  }
  static const detail::JetLayout& layout_for(int dim) { return detail::layout<K>(dim); }
  const detail::JetLayout& layout() const { return detail::layout<K>(dim_); }

  std::array<double, kCapacity> c_;
  int dim_ = 0;
};

using Jet3 = Jet<3>;

// Elementary functions. Each reports domain violations with the offending
// value; callers add location context.

template <int K>
Jet<K> sin(const Jet<K>& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  std::array<double, K + 1> d{};
  const double cyc[4] = {s, c, -s, -c};
  for (int k = 0; k <= K; ++k) d[k] = cyc[k % 4];
  return Jet<K>::compose(a, d);
}

template <int K>
Jet<K> cos(const Jet<K>& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  std::array<double, K + 1> d{};
  const double cyc[4] = {c, -s, -c, s};
  for (int k = 0; k <= K; ++k) d[k] = cyc[k % 4];
  return Jet<K>::compose(a, d);
}

template <int K>
Jet<K> exp(const Jet<K>& a) {
  std::array<double, K + 1> d{};
  d.fill(std::exp(a.value()));
  return Jet<K>::compose(a, d);
}

template <int K>
Jet<K> log(const Jet<K>& a) {
  const double v = a.value();
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << "log of nonpositive value " << v;
    throw JetDomainError(os.str());
  }
  std::array<double, K + 1> d{};
  d[0] = std::log(v);
  double p = 1.0 / v;  // (-1)^(k-1) (k-1)! / v^k
  for (int k = 1; k <= K; ++k) {
    d[k] = p;
    p *= -k / v;
  }
  return Jet<K>::compose(a, d);
}

template <int K>
Jet<K> sqrt(const Jet<K>& a) {
  const double v = a.value();
  if (v < 0.0 || (v == 0.0 && !a.is_constant())) {
    std::ostringstream os;
    os << "sqrt of " << (v < 0.0 ? "negative" : "zero (non-differentiable)") << " value " << v;
    throw JetDomainError(os.str());
  }
  if (v == 0.0) return Jet<K>::constant(a.dim(), 0.0);
  std::array<double, K + 1> d{};
  // d^k/dv^k v^(1/2) = (1/2)(1/2-1)...(1/2-k+1) v^(1/2-k)
  double coef = 1.0;
  for (int k = 0; k <= K; ++k) {
    d[k] = coef * std::pow(v, 0.5 - k);
    coef *= (0.5 - k);
  }
  return Jet<K>::compose(a, d);
}

/// a^p for a real constant p. Integer exponents use repeated multiplication
/// (valid at a = 0); other exponents go through exp(p log a) and need a > 0.
template <int K>
Jet<K> pow(const Jet<K>& a, double p) {
  if (std::isfinite(p) && p == std::nearbyint(p) && std::fabs(p) <= 64.0) {
    long n = static_cast<long>(std::fabs(p));
    Jet<K> result = Jet<K>::constant(a.dim(), 1.0);
    Jet<K> base = a;
    while (n > 0) {
      if (n & 1) result = result * base;
      n >>= 1;
      if (n > 0) base = base * base;
    }
    return p < 0 ? Jet<K>::reciprocal(result) : result;
  }
  if (!(a.value() > 0.0)) {
    std::ostringstream os;
    os << "non-integer power " << p << " of nonpositive value " << a.value();
    throw JetDomainError(os.str());
  }
  return exp(log(a) * p);
}

}  // namespace solitons
