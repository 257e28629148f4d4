#pragma once

#include <Eigen/Dense>

#include <vector>

namespace mcal {

/// Continuous piecewise-linear function given by breakpoints and nodal values.
/// Constant extrapolation outside the breakpoint range.
struct PiecewiseLinear {
  std::vector<double> breaks;
  std::vector<double> values;

  double eval(double x) const;
};

/// Piecewise-quadratic function on a uniform grid of `cells()` cells starting
/// at `left` with width `h`; cell c holds coefficients of 1, t, t^2 in the
/// local coordinate t ∈ [0, 1]. Zero outside the grid.
struct PiecewiseQuadratic {
  double left = 0.0;
  double h = 0.0;
  Eigen::MatrixXd coef;  // cells x 3

  int cells() const { return static_cast<int>(coef.rows()); }
  double right() const { return left + h * cells(); }
  double eval(double x) const;
  double integral() const;
  /// ∫ f(x) q(x) dx with exact splitting at the breakpoints of f.
  double integral_against(const PiecewiseLinear& f) const;
  double min_value() const;

  PiecewiseQuadratic& axpy(double a, const PiecewiseQuadratic& other);
  PiecewiseQuadratic& scale(double a);
};

}  // namespace mcal
