#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "solitons/jet.hpp"

using solitons::Jet;
using solitons::Jet3;
using solitons::JetDomainError;
using Index = solitons::detail::MultiIndex;

namespace {

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

Jet3 seed1(double x) {
  const double p[1] = {x};
  return Jet3::seed(p, 0);
}

}  // namespace

TEST(Jet, SeedHasUnitFirstPartial) {
  const double x[2] = {0.5, 0.2};
  const Jet3 j = Jet3::seed(x, 0);
  EXPECT_EQ(j.value(), 0.5);
  EXPECT_EQ(j.d(0), 1.0);
  for (int k = 2; k < j.size(); ++k) EXPECT_EQ(j.coeff(k), 0.0);
  EXPECT_EQ(j.d(1), 0.0);
  EXPECT_THROW(Jet3::seed(x, 2), std::out_of_range);
}

TEST(Jet, CubeOfSeedAtZero) {
  const Jet3 x = seed1(0.0);
  const Jet3 c = x * x * x;
  EXPECT_EQ(c.value(), 0.0);
  EXPECT_EQ(c.d(0), 0.0);
  EXPECT_EQ(c.d(0, 0), 0.0);
  EXPECT_EQ(c.d(0, 0, 0), 6.0);
}

TEST(Jet, SinAtZero) {
  const Jet3 s = solitons::sin(seed1(0.0));
  EXPECT_EQ(s.value(), 0.0);
  EXPECT_EQ(s.d(0), 1.0);
  EXPECT_EQ(s.d(0, 0), 0.0);
  EXPECT_EQ(s.d(0, 0, 0), -1.0);
}

TEST(Jet, ExpAtOne) {
  const Jet3 e = solitons::exp(seed1(1.0));
  const double E = std::numbers::e;
  EXPECT_NEAR(e.value(), E, 1e-15);
  EXPECT_NEAR(e.d(0), E, 1e-15);
  EXPECT_NEAR(e.d(0, 0), E, 1e-15);
  EXPECT_NEAR(e.d(0, 0, 0), E, 1e-14);
}

TEST(Jet, SqrtOfConstant) {
  const Jet3 s = solitons::sqrt(Jet3::constant(2, 4.0));
  EXPECT_EQ(s.value(), 2.0);
  for (int k = 1; k < s.size(); ++k) EXPECT_EQ(s.coeff(k), 0.0);
}

TEST(Jet, CosMatchesCentralDifferences) {
  const double x0 = std::numbers::pi / 3;
  const Jet3 c = solitons::cos(seed1(x0));
  const double h = 1e-4;
  auto f = [](double x) { return std::cos(x); };
  const double d1 = (f(x0 + h) - f(x0 - h)) / (2 * h);
  const double d2 = (f(x0 + h) - 2 * f(x0) + f(x0 - h)) / (h * h);
  const double d3 = (f(x0 + 2 * h) - 2 * f(x0 + h) + 2 * f(x0 - h) - f(x0 - 2 * h)) / (2 * h * h * h);
  EXPECT_NEAR(c.d(0), d1, 1e-6);
  EXPECT_NEAR(c.d(0, 0), d2, 1e-6);
  // the third difference at h = 1e-4 carries ~eps/h^3 rounding
  EXPECT_NEAR(c.d(0, 0, 0), d3, 1e-3);
  EXPECT_NEAR(c.d(0, 0, 0), std::sin(x0), 1e-15);
}

TEST(Jet, SquareOfSeed) {
  const Jet3 x = seed1(2.0);
  const Jet3 s = x * x;
  EXPECT_EQ(s.value(), 4.0);
  EXPECT_EQ(s.d(0), 4.0);
  EXPECT_EQ(s.d(0, 0), 2.0);
  EXPECT_EQ(s.d(0, 0, 0), 0.0);
}

TEST(Jet, ReciprocalOfSeed) {
  const Jet3 q = Jet3::constant(1, 1.0) / seed1(1.0);
  EXPECT_DOUBLE_EQ(q.value(), 1.0);
  EXPECT_DOUBLE_EQ(q.d(0), -1.0);
  EXPECT_DOUBLE_EQ(q.d(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(q.d(0, 0, 0), -6.0);
}

TEST(Jet, SinCosIsHalfSinDouble) {
  const double x[2] = {0.7, -0.3};
  const Jet3 a = Jet3::seed(x, 0) + Jet3::seed(x, 1) * 0.5;
  const Jet3 lhs = solitons::sin(a) * solitons::cos(a);
  const Jet3 rhs = solitons::sin(a * 2.0) * 0.5;
  for (int k = 0; k < lhs.size(); ++k) EXPECT_NEAR(lhs.coeff(k), rhs.coeff(k), 1e-12) << k;
}

TEST(Jet, Errors) {
  const double x[2] = {1.0, 2.0};
  const double y[1] = {1.0};
  EXPECT_THROW(Jet3::seed(x, 0) * Jet3::seed(y, 0), std::invalid_argument);
  EXPECT_THROW(Jet3::seed(x, 0) + Jet3::seed(y, 0), std::invalid_argument);
  EXPECT_THROW(Jet3::seed(x, 0) / Jet3::constant(2, 0.0), JetDomainError);
  EXPECT_THROW(solitons::log(Jet3::seed(x, 0) - 2.0), JetDomainError);
  EXPECT_THROW(solitons::sqrt(Jet3::seed(x, 0) - 3.0), JetDomainError);
  try {
    solitons::log(Jet3::constant(1, -0.25));
    FAIL();
  } catch (const JetDomainError& e) {
    EXPECT_NE(std::string(e.what()).find("-0.25"), std::string::npos);
  }
}

TEST(Jet, IntegerPowerAtZero) {
  const Jet3 p = solitons::pow(seed1(0.0), 3.0);
  EXPECT_EQ(p.d(0, 0, 0), 6.0);
  const Jet3 h = solitons::pow(seed1(4.0), 0.5);
  EXPECT_NEAR(h.value(), 2.0, 1e-15);
  EXPECT_NEAR(h.d(0), 0.25, 1e-15);
  EXPECT_THROW(solitons::pow(seed1(-1.0), 0.5), JetDomainError);
}

TEST(Jet, HigherOrders) {
  const double x[3] = {0.3, -0.4, 1.1};
  const Jet<4> a = Jet<4>::seed(x, 0) * Jet<4>::seed(x, 1) * Jet<4>::seed(x, 2);
  const Jet<4> b = a * Jet<4>::seed(x, 0);  // x^2 y z
  EXPECT_NEAR(b.partial(Index{2, 1, 1, 0}), 2.0, 1e-15);
  const Jet<1> one = Jet<1>::seed(x, 1);
  EXPECT_EQ(one.size(), 4);
  EXPECT_EQ((one * one).d(1), 2 * x[1]);
}

// ---------------------------------------------------------------------------
// finite-difference oracle for the elementary functions

struct Elementary {
  const char* name;
  std::function<Jet3(const Jet3&)> jet;
  std::function<double(double)> f;
  double lo, hi;
};

void PrintTo(const Elementary& e, std::ostream* os) { *os << e.name; }

class ElementaryFd : public ::testing::TestWithParam<Elementary> {};

TEST_P(ElementaryFd, PartialsMatchCentralDifferences) {
  const Elementary& e = GetParam();
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(e.lo, e.hi);
  const auto& f = e.f;
  for (int trial = 0; trial < 100; ++trial) {
    const double x = u(rng);
    const Jet3 j = e.jet(seed1(x));
    // central stencils at the prescribed steps; sixth order for the third derivative
    double h = 1e-4;
    const double d1 = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
    h = 1e-3;
    const double d2 = (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
                      (12 * h * h);
    h = 1e-2;
    const double d3 = (7 * (f(x + 4 * h) - f(x - 4 * h)) - 72 * (f(x + 3 * h) - f(x - 3 * h)) +
                       338 * (f(x + 2 * h) - f(x - 2 * h)) - 488 * (f(x + h) - f(x - h))) /
                      (240 * h * h * h);
    EXPECT_LE(rel_err(j.value(), f(x)), 1e-14) << e.name << " x=" << x;
    EXPECT_LE(rel_err(j.d(0), d1), 1e-5) << e.name << " x=" << x;
    EXPECT_LE(rel_err(j.d(0, 0), d2), 1e-5) << e.name << " x=" << x;
    EXPECT_LE(rel_err(j.d(0, 0, 0), d3), 1e-5) << e.name << " x=" << x;
  }
}

INSTANTIATE_TEST_SUITE_P(
    Functions, ElementaryFd,
    ::testing::Values(
        Elementary{"sin", [](const Jet3& a) { return solitons::sin(a); },
                   [](double x) { return std::sin(x); }, -3.0, 3.0},
        Elementary{"cos", [](const Jet3& a) { return solitons::cos(a); },
                   [](double x) { return std::cos(x); }, -3.0, 3.0},
        Elementary{"exp", [](const Jet3& a) { return solitons::exp(a); },
                   [](double x) { return std::exp(x); }, -2.0, 2.0},
        Elementary{"log", [](const Jet3& a) { return solitons::log(a); },
                   [](double x) { return std::log(x); }, 0.2, 4.0},
        Elementary{"sqrt", [](const Jet3& a) { return solitons::sqrt(a); },
                   [](double x) { return std::sqrt(x); }, 0.2, 4.0},
        Elementary{"pow2.5", [](const Jet3& a) { return solitons::pow(a, 2.5); },
                   [](double x) { return std::pow(x, 2.5); }, 0.2, 3.0},
        Elementary{"pow-3", [](const Jet3& a) { return solitons::pow(a, -3.0); },
                   [](double x) { return std::pow(x, -3.0); }, 0.5, 3.0},
        Elementary{"neg", [](const Jet3& a) { return -a; }, [](double x) { return -x; }, -3.0,
                   3.0}),
    [](const auto& info) {
      std::string s = info.param.name;
      for (auto& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
      return s;
    });

// ---------------------------------------------------------------------------
// polynomial expansion oracle

namespace {

using Poly = std::map<Index, double>;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ia, ca] : a)
    for (const auto& [ib, cb] : b) {
      Index s{};
      for (int i = 0; i < 4; ++i) s[i] = ia[i] + ib[i];
      r[s] += ca * cb;
    }
  return r;
}

Poly poly_add(Poly a, const Poly& b) {
  for (const auto& [i, c] : b) a[i] += c;
  return a;
}

Poly random_poly(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Poly p;
  Index a{};
  for (a[0] = 0; a[0] <= 3; ++a[0])
    for (a[1] = 0; a[1] <= (dim > 1 ? 3 : 0); ++a[1])
      for (a[2] = 0; a[2] <= (dim > 2 ? 3 : 0); ++a[2])
        if (a[0] + a[1] + a[2] <= 3) p[a] = u(rng);
  return p;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Taylor coefficient of h^alpha in p(x0 + h).
double taylor_coefficient(const Poly& p, const double* x0, const Index& alpha) {
  double s = 0.0;
  for (const auto& [beta, c] : p) {
    double t = c;
    for (int i = 0; i < 4; ++i) {
      if (beta[i] < alpha[i]) {
        t = 0.0;
        break;
      }
      t *= binom(beta[i], alpha[i]) * std::pow(x0[i], beta[i] - alpha[i]);
    }
    s += t;
  }
  return s;
}

Jet3 poly_jet(const Poly& p, std::span<const double> x) {
  const int dim = static_cast<int>(x.size());
  Jet3 r = Jet3::constant(dim, 0.0);
  for (const auto& [beta, c] : p) {
    Jet3 t = Jet3::constant(dim, c);
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < beta[i]; ++k) t = t * Jet3::seed(x, i);
    r += t;
  }
  return r;
}

void expect_matches(const Jet3& j, const Poly& p, const double* x0, int dim) {
  Index a{};
  for (a[0] = 0; a[0] <= 3; ++a[0])
    for (a[1] = 0; a[1] <= (dim > 1 ? 3 : 0); ++a[1])
      for (a[2] = 0; a[2] <= (dim > 2 ? 3 : 0); ++a[2]) {
        if (a[0] + a[1] + a[2] > 3) continue;
        const double want = taylor_coefficient(p, x0, a);
        EXPECT_LE(rel_err(j.taylor(a), want), 1e-12)
            << "alpha=(" << a[0] << "," << a[1] << "," << a[2] << ")";
      }
}

}  // namespace

TEST(JetProperty, PolynomialArithmeticMatchesExpansion) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 1 + trial % 3;
    double x0[4] = {0, 0, 0, 0};
    for (int i = 0; i < dim; ++i) x0[i] = u(rng);
    const std::span<const double> x(x0, dim);
    const Poly p = random_poly(rng, dim), q = random_poly(rng, dim);
    const Jet3 jp = poly_jet(p, x), jq = poly_jet(q, x);
    expect_matches(jp + jq, poly_add(p, q), x0, dim);
    expect_matches(jp * jq, poly_mul(p, q), x0, dim);
    // univariate cubic composed with q
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    const double a[4] = {c(rng), c(rng), c(rng), c(rng)};
    Poly comp, qk;
    qk[Index{}] = 1.0;
    Jet3 jcomp = Jet3::constant(dim, 0.0), jqk = Jet3::constant(dim, 1.0);
    for (int k = 0; k <= 3; ++k) {
      Poly term = qk;
      for (auto& [i, v] : term) v *= a[k];
      comp = poly_add(comp, term);
      jcomp += jqk * a[k];
      qk = poly_mul(qk, q);
      jqk = jqk * jq;
    }
    expect_matches(jcomp, comp, x0, dim);
  }
}
