#pragma once

// Integrand DSL for `integrate`: the expression grammar extended with
//
//   scalars    r, f                       (f needs a gradient potential)
//   vectors    gradf, gradr, xi           (only as arguments of ric / g)
//   functions  ric(v, w), g(v, w)         (v, w vectors)
//              lap(s), norm2_hess(s)      (s a scalar expression of the
//                                          coordinates, f and r)
//
// Coordinate names shadow the bound names.

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "solitons/geometry.hpp"
#include "solitons/soliton.hpp"

namespace solitons {

class IntegrandError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Integrand {
 public:
  /// Parses and type-checks `src` against the chart and optional soliton.
  static Integrand parse(const std::string& src, const Chart& chart,
                         const std::optional<SolitonSpec>& soliton);

  /// Value at a point of the chart.
  double operator()(std::span<const double> x) const;

  const std::string& source() const { return expr_.source(); }
  /// Jet order used per node (4 when r is differentiated twice).
  int order() const { return order_; }

 private:
  Expr expr_;
  const Chart* chart_ = nullptr;
  std::optional<SolitonSpec> soliton_;
  int order_ = 3;
};

}  // namespace solitons
