#pragma once

// Tensor-product quadrature over a chart: trapezoid on periodic coordinates,
// Gauss-Legendre on the (margin-shrunk) interval otherwise. Integrals carry
// the Riemannian volume density sqrt(det g).

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "solitons/geometry.hpp"

namespace solitons {

enum class QuadratureRule { Trapezoid, GaussLegendre };

struct GridSpec {
  std::vector<int> counts;
  std::vector<QuadratureRule> rules;

  /// 64 Gauss-Legendre nodes per non-periodic coordinate, 128 trapezoid
  /// nodes per periodic one.
  static GridSpec defaults(const Chart& chart);
  /// Explicit counts; rules follow the chart's periodicity.
  static GridSpec with_counts(const Chart& chart, std::vector<int> counts);
  /// Every count divided by `factor` (never below the minimum of 8).
  GridSpec coarsened(int factor) const;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

class Grid {
 public:
  Grid(const Chart& chart, GridSpec spec);

  std::size_t size() const { return coord_weight_.size(); }
  int dim() const { return n_; }
  std::span<const double> point(std::size_t k) const {
    return {points_[k].data(), static_cast<std::size_t>(n_)};
  }
  /// Product of the one-dimensional rule weights (no volume density).
  double coordinate_weight(std::size_t k) const { return coord_weight_[k]; }
  const GridSpec& spec() const { return spec_; }

 private:
  int n_;
  GridSpec spec_;
  std::vector<std::array<double, kMaxDim>> points_;
  std::vector<double> coord_weight_;
};

/// sqrt(det g) from metric values at x.
double volume_density(const Chart& chart, std::span<const double> x);

using PointEvaluator = std::function<double(std::span<const double>)>;

/// sum_k w_k phi(x_k) sqrt(det g(x_k)); node evaluations may run
/// concurrently, the reduction runs in fixed node order.
double integrate(const PointEvaluator& phi, const Chart& chart, const Grid& grid);

/// Fixed-order weighted sum of precomputed node values (already including
/// the volume density in `weights`).
double weighted_sum(std::span<const double> values, std::span<const double> weights);

}  // namespace solitons
