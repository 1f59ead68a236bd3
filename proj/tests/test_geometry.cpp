#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "solitons/geometry.hpp"
#include "solitons/quadrature.hpp"
#include "support.hpp"

using namespace solitons;

namespace {

constexpr double kPi = std::numbers::pi;

const Chart& s2() {
  static const Chart c = support::chart("unit_s2");
  return c;
}
const Chart& t2() {
  static const Chart c = support::chart("flat_t2");
  return c;
}

Vec<Jet3> field_jet(const std::vector<std::string>& src, const Chart& c, std::span<const double> x) {
  return support::vector(src, c).jet<3>(x);
}

Jet3 scalar_jet(const std::string& src, const Chart& c, std::span<const double> x) {
  return support::scalar(src, c).jet<3>(x);
}

// Metric-norm of a jet matrix difference relative to max(1, |a|).
double rel_diff(const Mat<Jet3>& a, const Mat<Jet3>& b, const Frame<3>& fr) {
  Mat<Jet3> d{};
  for (int i = 0; i < fr.dim(); ++i)
    for (int j = 0; j < fr.dim(); ++j) d[i][j] = Jet3::constant(0, (a[i][j] - b[i][j]).value());
  Mat<Jet3> av{};
  for (int i = 0; i < fr.dim(); ++i)
    for (int j = 0; j < fr.dim(); ++j) av[i][j] = Jet3::constant(0, a[i][j].value());
  const double num = std::sqrt(std::max(0.0, norm2(d, fr).value()));
  return num / std::max(1.0, std::sqrt(std::max(0.0, norm2(av, fr).value())));
}

template <class Fn>
void for_each_node(const Chart& c, const GridSpec& spec, Fn&& fn) {
  const Grid grid(c, spec);
  for (std::size_t k = 0; k < grid.size(); ++k) fn(grid.point(k));
}

}  // namespace

TEST(Geometry, SphereChristoffels) {
  const double x[2] = {kPi / 4, 0.3};
  const Frame<3> fr(s2(), x);
  const auto& G = fr.christoffel();
  EXPECT_NEAR(G[0][1][1].value(), -0.5, 1e-15);
  EXPECT_NEAR(G[1][0][1].value(), 1.0, 1e-15);
  EXPECT_NEAR(G[1][1][0].value(), 1.0, 1e-15);
  EXPECT_NEAR(G[0][0][0].value(), 0.0, 1e-15);
}

TEST(Geometry, SphereRicciAndScalarCurvature) {
  for (double th : {0.2, 0.7, kPi / 2, 2.5, 3.0}) {
    const double x[2] = {th, 1.0};
    const Frame<3> fr(s2(), x);
    EXPECT_NEAR(fr.ricci()[0][0].value(), 1.0, 1e-12) << th;
    EXPECT_NEAR(fr.ricci()[1][1].value(), std::sin(th) * std::sin(th), 1e-12) << th;
    EXPECT_NEAR(fr.ricci()[0][1].value(), 0.0, 1e-12) << th;
    EXPECT_NEAR(fr.scalar_curvature().value(), 2.0, 1e-11) << th;
  }
}

TEST(Geometry, FlatTorusIsFlatAtEveryNode) {
  for_each_node(t2(), support::grid("flat_t2", t2()), [](std::span<const double> x) {
    const Frame<3> fr(t2(), x);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i) {
        EXPECT_EQ(fr.ricci()[k][i].value(), 0.0);
        for (int j = 0; j < 2; ++j) EXPECT_EQ(fr.christoffel()[k][i][j].value(), 0.0);
      }
    EXPECT_EQ(fr.scalar_curvature().value(), 0.0);
  });
}

TEST(Geometry, UnitSpheresHaveScalarCurvatureNNMinusOne) {
  for (const auto& [name, want] : {std::pair{"unit_s2", 2.0}, std::pair{"unit_s3", 6.0}}) {
    const Chart c = support::chart(name);
    double worst = 0.0;
    for_each_node(c, support::grid(name, c), [&](std::span<const double> x) {
      const Frame<3> fr(c, x);
      worst = std::max(worst, std::fabs(fr.scalar_curvature().value() - want) / want);
    });
    EXPECT_LE(worst, 1e-9) << name;
  }
}

TEST(Geometry, FrameInvariants) {
  const Chart c = support::chart("ellipsoid");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> th(0.05, kPi - 0.05), ph(0.0, 2 * kPi);
  for (int trial = 0; trial < 50; ++trial) {
    const double x[2] = {th(rng), ph(rng)};
    const Frame<3> fr(c, x);
    double r = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        EXPECT_EQ(fr.ricci()[i][j].value(), fr.ricci()[j][i].value());
        for (int k = 0; k < 2; ++k)
          EXPECT_EQ(fr.christoffel()[k][i][j].value(), fr.christoffel()[k][j][i].value());
        r += fr.inverse_metric(i, j) * fr.ricci()[i][j].value();
      }
    const double rf = fr.scalar_curvature().value();
    EXPECT_LE(std::fabs(r - rf) / std::max(1.0, std::fabs(rf)), 1e-10);
  }
}

TEST(Geometry, Errors) {
  const double outside[2] = {-0.1, 0.0};
  EXPECT_THROW(Frame<3>(s2(), outside), GeometryError);
  const Chart bad = support::make_chart("bad", {"x", "y"}, {{0, 1}, {0, 1}}, {false, false},
                                        {{"1", "2"}, {"2", "1"}});
  const double x[2] = {0.5, 0.5};
  EXPECT_THROW(Frame<3>(bad, x), GeometryError);
}

TEST(Geometry, Gradient) {
  const double x[2] = {kPi / 2, 0.4};
  const Frame<3> fr(s2(), x);
  const auto g = gradient(scalar_jet("cos(th)", s2(), x), fr);
  EXPECT_NEAR(g[0].value(), -1.0, 1e-15);
  EXPECT_NEAR(g[1].value(), 0.0, 1e-15);
  const auto gc = gradient(scalar_jet("3.5", s2(), x), fr);
  EXPECT_EQ(gc[0].value(), 0.0);
  EXPECT_EQ(gc[1].value(), 0.0);
  const double y[2] = {0.0, 1.0};
  const Frame<3> ft(t2(), y);
  const auto gt = gradient(scalar_jet("cos(x)", t2(), y), ft);
  EXPECT_NEAR(gt[0].value(), 0.0, 1e-15);
}

TEST(Geometry, HessianAndLaplacian) {
  const double x[2] = {kPi / 3, 0.4};
  const Frame<3> fr(s2(), x);
  const Jet3 f = scalar_jet("cos(th)", s2(), x);
  const auto h = hessian(f, fr);
  const double s = std::sin(kPi / 3);
  EXPECT_NEAR(h[0][0].value(), -0.5, 1e-15);
  EXPECT_NEAR(h[0][1].value(), 0.0, 1e-15);
  EXPECT_NEAR(h[1][1].value(), -0.5 * s * s, 1e-15);
  EXPECT_NEAR(laplacian(f, fr).value(), -1.0, 1e-14);

  const Jet3 c = scalar_jet("2", s2(), x);
  EXPECT_EQ(laplacian(c, fr).value(), 0.0);
  EXPECT_EQ(hessian(c, fr)[0][0].value(), 0.0);

  const double y[2] = {0.8, 2.0};
  const Frame<3> ft(t2(), y);
  const Jet3 ct = scalar_jet("cos(x)", t2(), y);
  const auto ht = hessian(ct, ft);
  EXPECT_NEAR(ht[0][0].value(), -std::cos(0.8), 1e-15);
  EXPECT_EQ(ht[1][1].value(), 0.0);
  EXPECT_NEAR(laplacian(ct, ft).value(), -std::cos(0.8), 1e-15);
}

TEST(Geometry, LieDerivativeOfMetric) {
  const double x[2] = {kPi / 3, 0.4};
  const Frame<3> fr(s2(), x);
  const auto xi = gradient(scalar_jet("cos(th)", s2(), x), fr);
  const auto L = lie_metric(xi, fr);
  EXPECT_NEAR(L[0][0].value(), -1.0, 1e-14);
  EXPECT_NEAR(L[0][1].value(), 0.0, 1e-14);
  EXPECT_NEAR(L[1][1].value(), -0.75, 1e-14);

  const auto zero = lie_metric(field_jet({"0", "0"}, s2(), x), fr);
  EXPECT_EQ(zero[0][0].value(), 0.0);
  EXPECT_EQ(zero[1][1].value(), 0.0);

  const double y[2] = {0.8, 2.0};
  const Frame<3> ft(t2(), y);
  const auto lt = lie_metric(field_jet({"1", "0"}, t2(), y), ft);
  EXPECT_EQ(lt[0][0].value(), 0.0);
  EXPECT_EQ(lt[0][1].value(), 0.0);
}

TEST(Geometry, SecondLieDerivativeClosedForm) {
  const double th = kPi / 4;
  const double x[2] = {th, 0.4};
  const Frame<3> fr(s2(), x);
  const auto xi = gradient(scalar_jet("cos(th)", s2(), x), fr);
  const auto L2 = lie2_metric(xi, fr);
  // L L g = (4 cos^2 - 2 sin^2) g
  const double c = 4 * std::cos(th) * std::cos(th) - 2 * std::sin(th) * std::sin(th);
  EXPECT_NEAR(L2[0][0].value(), c, 1e-13);
  EXPECT_NEAR(L2[1][1].value(), c * std::sin(th) * std::sin(th), 1e-13);
  EXPECT_NEAR(L2[0][1].value(), 0.0, 1e-13);

  const auto z = lie2_metric(field_jet({"0", "0"}, s2(), x), fr);
  EXPECT_EQ(z[0][0].value(), 0.0);
  const double y[2] = {0.8, 2.0};
  const Frame<3> ft(t2(), y);
  EXPECT_EQ(lie2_metric(field_jet({"1", "0"}, t2(), y), ft)[0][0].value(), 0.0);
}

namespace {

// Coordinate formulas on doubles with fourth-order central differences.
using Fn2 = std::function<double(double, double)>;

struct FdField {
  std::array<Fn2, 2> xi;
  std::array<std::array<Fn2, 2>, 2> g;
};

double dfd(const Fn2& f, int k, double th, double ph, double h) {
  auto at = [&](double s) { return k == 0 ? f(th + s, ph) : f(th, ph + s); };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

// (L_xi T)_ij with T given as functions, derivatives by central differences.
double lie_fd(const FdField& F, const std::array<std::array<Fn2, 2>, 2>& T, int i, int j,
              double th, double ph, double h) {
  double s = 0.0;
  for (int k = 0; k < 2; ++k) {
    s += F.xi[k](th, ph) * dfd(T[i][j], k, th, ph, h);
    s += T[k][j](th, ph) * dfd(F.xi[k], i, th, ph, h);
    s += T[i][k](th, ph) * dfd(F.xi[k], j, th, ph, h);
  }
  return s;
}

FdField sphere_grad_cos() {
  FdField F;
  F.xi = {[](double t, double) { return -std::sin(t); }, [](double, double) { return 0.0; }};
  F.g = {{{[](double, double) { return 1.0; }, [](double, double) { return 0.0; }},
          {[](double, double) { return 0.0; }, [](double t, double) { return std::sin(t) * std::sin(t); }}}};
  return F;
}

}  // namespace

TEST(Geometry, SecondLieDerivativeMatchesFiniteDifferences) {
  const FdField F = sphere_grad_cos();
  std::array<std::array<Fn2, 2>, 2> inner;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      inner[i][j] = [F, i, j](double t, double p) { return lie_fd(F, F.g, i, j, t, p, 1e-5); };
  const double th = kPi / 4, ph = 0.4;
  const double x[2] = {th, ph};
  const Frame<3> fr(s2(), x);
  const auto L2 = lie2_metric(gradient(scalar_jet("cos(th)", s2(), x), fr), fr);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      EXPECT_NEAR(L2[i][j].value(), lie_fd(F, inner, i, j, th, ph, 1e-3), 1e-6) << i << j;
}

TEST(Geometry, CovariantAccelerationMatchesFiniteDifferences) {
  const FdField F = sphere_grad_cos();
  const double th = kPi / 4, ph = 0.4, h = 1e-5;
  const double x[2] = {th, ph};
  const Frame<3> fr(s2(), x);
  const auto a = cov_accel(gradient(scalar_jet("cos(th)", s2(), x), fr), fr);
  // Christoffels from difference quotients of g
  auto ginv = [&](int i, int j) { return i != j ? 0.0 : 1.0 / F.g[i][i](th, ph); };
  for (int k = 0; k < 2; ++k) {
    double want = 0.0;
    for (int i = 0; i < 2; ++i) want += F.xi[i](th, ph) * dfd(F.xi[k], i, th, ph, h);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double gam = 0.0;
        for (int l = 0; l < 2; ++l)
          gam += 0.5 * ginv(k, l) *
                 (dfd(F.g[j][l], i, th, ph, h) + dfd(F.g[i][l], j, th, ph, h) -
                  dfd(F.g[i][j], l, th, ph, h));
        want += gam * F.xi[i](th, ph) * F.xi[j](th, ph);
      }
    EXPECT_NEAR(a[k].value(), want, 1e-6) << k;
  }
  EXPECT_NEAR(a[0].value(), std::sin(th) * std::cos(th), 1e-15);

  const auto z = cov_accel(field_jet({"0", "0"}, s2(), x), fr);
  EXPECT_EQ(z[0].value(), 0.0);
  const double y[2] = {0.8, 2.0};
  const Frame<3> ft(t2(), y);
  EXPECT_EQ(cov_accel(field_jet({"1", "0"}, t2(), y), ft)[0].value(), 0.0);
}

TEST(Geometry, DivergenceTraceAndNorm) {
  const double x[2] = {kPi / 2, 0.4};
  const Frame<3> fr(s2(), x);
  const Jet3 psi = scalar_jet("-2*cos(th)", s2(), x);
  Mat<Jet3> T{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) T[i][j] = psi * fr.g()[i][j];
  const auto d = div_tensor(T, fr);
  EXPECT_NEAR(d[0].value(), 2.0, 1e-14);
  EXPECT_NEAR(d[1].value(), 0.0, 1e-14);

  for (const char* name : {"unit_s2", "unit_s3", "flat_t3", "ellipsoid"}) {
    const Chart c = support::chart(name);
    std::vector<double> p;
    for (int i = 0; i < c.dim(); ++i) p.push_back(0.5 * (c.sampled(i).lo + c.sampled(i).hi) + 0.1);
    const Frame<3> f(c, p);
    EXPECT_NEAR(trace_g(f.g(), f).value(), c.dim(), 1e-14) << name;
    EXPECT_NEAR(norm2(f.g(), f).value(), c.dim(), 1e-14) << name;
  }
}

TEST(GeometryProperty, LieDerivativeOfGradientIsTwiceHessian) {
  std::mt19937_64 rng(11);
  for (const char* name : {"unit_s2", "flat_t2"}) {
    const Chart c = support::chart(name);
    const GridSpec spec = GridSpec::with_counts(c, {32, 32});
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = support::scalar(support::random_polynomial(name, rng), c);
      double worst = 0.0;
      for_each_node(c, spec, [&](std::span<const double> x) {
        const Frame<3> fr(c, x);
        const Jet3 fj = f.jet<3>(x);
        const auto L = lie_metric(gradient(fj, fr), fr);
        auto H = hessian(fj, fr);
        for (auto& row : H)
          for (auto& e : row) e = e * 2.0;
        worst = std::max(worst, rel_diff(L, H, fr));
      });
      EXPECT_LE(worst, 1e-10) << name << " trial " << trial;
    }
  }
}

TEST(GeometryProperty, LaplacianFormsAgree) {
  std::mt19937_64 rng(12);
  for (const char* name : {"unit_s2", "flat_t2", "ellipsoid", "unit_s3"}) {
    const Chart c = support::chart(name);
    const GridSpec spec = support::grid(name, c).coarsened(2);
    for (int trial = 0; trial < 3; ++trial) {
      const auto f = support::scalar(support::random_polynomial(name, rng), c);
      double worst = 0.0;
      for_each_node(c, spec, [&](std::span<const double> x) {
        const Frame<3> fr(c, x);
        const Jet3 fj = f.jet<3>(x);
        const auto H = hessian(fj, fr);
        const double a = laplacian(fj, fr).value();
        const double b = trace_g(H, fr).value();
        const double d = div_vector(gradient(fj, fr), fr).value();
        const double scale =
            std::max({1.0, std::fabs(a), std::sqrt(std::max(0.0, norm2(H, fr).value()))});
        worst = std::max({worst, std::fabs(a - b) / scale, std::fabs(a - d) / scale});
      });
      EXPECT_LE(worst, 1e-10) << name;
    }
  }
}

TEST(GeometryProperty, KillingFieldsHaveZeroLieDerivative) {
  struct Case {
    const Chart* chart;
    GridSpec grid;
    std::vector<std::string> xi;
  };
  const std::vector<Case> cases = {{&s2(), support::grid("unit_s2", s2()), {"0", "1"}},
                                   {&t2(), support::grid("flat_t2", t2()), {"1", "0"}},
                                   {&t2(), support::grid("flat_t2", t2()), {"0", "1"}}};
  for (const auto& cs : cases) {
    const auto v = support::vector(cs.xi, *cs.chart);
    double worst = 0.0;
    for_each_node(*cs.chart, cs.grid, [&](std::span<const double> x) {
      const Frame<3> fr(*cs.chart, x);
      const auto L = lie_metric(v.jet<3>(x), fr);
      worst = std::max(worst, std::sqrt(std::max(0.0, norm2(L, fr).value())));
    });
    EXPECT_LE(worst, 1e-12) << cs.chart->name() << " " << cs.xi[0] << "," << cs.xi[1];
  }
}
