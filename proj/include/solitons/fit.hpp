#pragma once

// Least-squares search for gradient soliton data (f, lambda, mu):
//
//   J(c, lambda, mu) = integral over M of |residual|_g^2,   f = sum_b c_b phi_b
//
// minimised by Levenberg-damped Gauss-Newton on the stacked, quadrature
// weighted residual components. Only grad f enters the residual, so the
// coefficient of the constant basis function is frozen.

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "solitons/geometry.hpp"
#include "solitons/quadrature.hpp"
#include "solitons/soliton.hpp"

namespace solitons {

enum class BasisFamily { Fourier, CosPolynomial };

std::string to_string(BasisFamily family);

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BasisExpansion {
  std::vector<BasisFamily> families;  // one per coordinate
  int degree = 0;                     // cap on the total degree of a product
  std::vector<std::string> labels;    // DSL source of each basis function
  std::vector<Expr> functions;        // functions[0] is the constant 1
  std::vector<double> coefficients;

  /// Tensor-product basis with total degree <= degree. Per coordinate:
  /// Fourier {1, cos(k x), sin(k x)} or polynomial in cos {cos(x)^k}.
  static BasisExpansion build(const Chart& chart, std::vector<BasisFamily> families, int degree);
  /// Fourier on periodic coordinates, polynomial-in-cos otherwise.
  static BasisExpansion automatic(const Chart& chart, int degree);

  std::size_t size() const { return functions.size(); }
  /// sum_b c_b phi_b as a DSL expression over the chart coordinates.
  std::string source() const;
  ScalarField field(const Chart& chart) const;
};

struct FitOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-12;
  double lambda_clamp = 1e-3;
  double initial_damping = 1e-3;
  /// Forward-difference step relative to max(1, |p|).
  double jacobian_step = 1e-7;
};

struct FitResult {
  std::vector<double> coefficients;
  double lambda = 1.0;
  double mu = 0.0;
  double objective = 0.0;  // on the fit grid
  int iterations = 0;
  bool converged = false;
  std::string termination;
  bool lambda_clamped = false;
  double gradient_norm = 0.0;
  std::vector<double> history;  // J after every accepted step, starting at the initial J
};

/// The discretised objective on a fixed grid. Parameter vector layout:
/// [free coefficients (all but the constant), lambda, mu].
class FitProblem {
 public:
  FitProblem(const Chart& chart, SolitonKind kind, BasisExpansion basis, const GridSpec& grid);

  int parameter_count() const { return static_cast<int>(free_count_) + 2; }
  std::size_t residual_count() const { return residual_count_; }

  Eigen::VectorXd pack(const std::vector<double>& coefficients, double lambda, double mu) const;
  void unpack(const Eigen::VectorXd& p, std::vector<double>& coefficients, double& lambda,
              double& mu) const;

  Eigen::VectorXd residuals(const Eigen::VectorXd& p) const;
  double objective(const Eigen::VectorXd& p) const { return residuals(p).squaredNorm(); }
  /// Forward-difference Jacobian of the stacked residuals.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p, const Eigen::VectorXd& r, double step) const;
  /// 2 J^T r with the forward-difference Jacobian.
  Eigen::VectorXd gradient(const Eigen::VectorXd& p, double step = 1e-7) const;

  const BasisExpansion& basis() const { return basis_; }
  SolitonKind kind() const { return kind_; }

 private:
  struct NodeData {
    Mat<Jet3> g, ginv;
    Mat<double> ric{};
    Mat<double> frame{};  // M with g^-1 = M M^T
    double r = 0.0;
    double sqrt_weight = 0.0;
    std::vector<Jet3> basis;
  };

  int n_;
  SolitonKind kind_;
  BasisExpansion basis_;
  std::size_t free_count_;
  std::size_t residual_count_;
  std::vector<NodeData> nodes_;
};

FitResult fit_potential(const Chart& chart, SolitonKind kind, const BasisExpansion& basis,
                        const FitResult& init, const GridSpec& grid,
                        const FitOptions& opts = FitOptions{});

/// J evaluated from scratch at the given data on the given grid.
double fit_objective(const Chart& chart, SolitonKind kind, const BasisExpansion& basis,
                     const FitResult& at, const GridSpec& grid);

}  // namespace solitons
