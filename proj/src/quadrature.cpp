#include "solitons/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "solitons/parallel.hpp"

namespace solitons {

namespace {
constexpr int kMinNodes = 8;
}

GridSpec GridSpec::defaults(const Chart& chart) {
  std::vector<int> counts;
  for (int i = 0; i < chart.dim(); ++i) counts.push_back(chart.periodic(i) ? 128 : 64);
  return with_counts(chart, std::move(counts));
}

GridSpec GridSpec::with_counts(const Chart& chart, std::vector<int> counts) {
  if (static_cast<int>(counts.size()) != chart.dim()) {
    throw QuadratureError("grid needs " + std::to_string(chart.dim()) + " node counts, got " +
                          std::to_string(counts.size()));
  }
  GridSpec g;
  for (int i = 0; i < chart.dim(); ++i) {
    if (counts[i] < kMinNodes) {
      throw QuadratureError("grid node count " + std::to_string(counts[i]) + " for coordinate " +
                            chart.coords()[i] + " is below the minimum of 8");
    }
    g.rules.push_back(chart.periodic(i) ? QuadratureRule::Trapezoid
                                        : QuadratureRule::GaussLegendre);
  }
  g.counts = std::move(counts);
  return g;
}

GridSpec GridSpec::coarsened(int factor) const {
  GridSpec g = *this;
  for (auto& c : g.counts) c = std::max(kMinNodes, c / factor);
  return g;
}

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(count, 0.0);
  weights.assign(count, 0.0);
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_count.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[count - 1 - i] = x;
    weights[i] = w;
    weights[count - 1 - i] = w;
  }
  if (count % 2 == 1) nodes[count / 2] = 0.0;
}

Grid::Grid(const Chart& chart, GridSpec spec) : n_(chart.dim()), spec_(std::move(spec)) {
  if (static_cast<int>(spec_.counts.size()) != n_ || static_cast<int>(spec_.rules.size()) != n_) {
    throw QuadratureError("grid spec does not match chart dimension");
  }
  std::vector<std::vector<double>> axis_nodes(n_), axis_weights(n_);
  for (int i = 0; i < n_; ++i) {
    const int m = spec_.counts[i];
    if (m < kMinNodes) throw QuadratureError("grid node count below the minimum of 8");
    if (spec_.rules[i] == QuadratureRule::Trapezoid) {
      const auto d = chart.domain(i);
      const double h = (d.hi - d.lo) / m;
      for (int j = 0; j < m; ++j) {
        axis_nodes[i].push_back(d.lo + j * h);
        axis_weights[i].push_back(h);
      }
    } else {
      const auto s = chart.sampled(i);
      std::vector<double> x, w;
      gauss_legendre(m, x, w);
      const double mid = 0.5 * (s.lo + s.hi), rad = 0.5 * (s.hi - s.lo);
      for (int j = 0; j < m; ++j) {
        axis_nodes[i].push_back(mid + rad * x[j]);
        axis_weights[i].push_back(rad * w[j]);
      }
    }
  }
  std::size_t total = 1;
  for (int i = 0; i < n_; ++i) total *= static_cast<std::size_t>(spec_.counts[i]);
  points_.resize(total);
  coord_weight_.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    double w = 1.0;
    for (int i = n_ - 1; i >= 0; --i) {
      const std::size_t m = static_cast<std::size_t>(spec_.counts[i]);
      const std::size_t j = rem % m;
      rem /= m;
      points_[k][i] = axis_nodes[i][j];
      w *= axis_weights[i][j];
    }
    coord_weight_[k] = w;
  }
}

double volume_density(const Chart& chart, std::span<const double> x) {
  const auto g = chart.metric_jets<1>(x);
  const int n = chart.dim();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g[i][j].value();
  const double det = m.determinant();
  if (!(det > 0.0)) throw GeometryError("metric not positive definite");
  return std::sqrt(det);
}

double weighted_sum(std::span<const double> values, std::span<const double> weights) {
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += weights[k] * values[k];
  return s;
}

double integrate(const PointEvaluator& phi, const Chart& chart, const Grid& grid) {
  std::vector<double> values(grid.size()), weights(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    const auto x = grid.point(k);
    try {
      values[k] = phi(x);
      weights[k] = grid.coordinate_weight(k) * volume_density(chart, x);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os.precision(17);
      os << "integrand failed at node (";
      for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
      os << "): " << e.what();
      throw QuadratureError(os.str());
    }
  });
  return weighted_sum(values, weights);
}

}  // namespace solitons
