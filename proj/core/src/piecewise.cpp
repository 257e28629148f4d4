#include "mcal/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcal/quadrature.hpp"

namespace mcal {

double PiecewiseLinear::eval(double x) const {
  if (breaks.empty()) return 0.0;
  if (x <= breaks.front()) return values.front();
  if (x >= breaks.back()) return values.back();
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - breaks.begin());
  const double x0 = breaks[j - 1], x1 = breaks[j];
  const double t = (x - x0) / (x1 - x0);
  return (1.0 - t) * values[j - 1] + t * values[j];
}

double PiecewiseQuadratic::eval(double x) const {
  const int c = static_cast<int>(std::floor((x - left) / h));
  if (c < 0 || c >= cells()) {
    // Clamp hits exactly the right endpoint.
    if (c == cells() && std::abs(x - right()) < 1e-12 * h) {
      const auto r = coef.row(cells() - 1);
      return r[0] + r[1] + r[2];
    }
    return 0.0;
  }
  const double t = (x - (left + c * h)) / h;
  const auto r = coef.row(c);
  return r[0] + t * (r[1] + t * r[2]);
}

double PiecewiseQuadratic::integral() const {
  double s = 0.0;
  for (int c = 0; c < cells(); ++c) {
    s += coef(c, 0) + coef(c, 1) / 2.0 + coef(c, 2) / 3.0;
  }
  return s * h;
}

double PiecewiseQuadratic::integral_against(const PiecewiseLinear& f) const {
  const GaussRule rule = gauss2();
  double total = 0.0;
  for (int c = 0; c < cells(); ++c) {
    const double a = left + c * h;
    const double b = a + h;
    // Split at breakpoints of f inside this cell: integrand is then cubic.
    std::vector<double> pts{a};
    for (double t : f.breaks) {
      if (t > a + 1e-14 * h && t < b - 1e-14 * h) pts.push_back(t);
    }
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    const auto r = coef.row(c);
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const double len = pts[s + 1] - pts[s];
      for (int g = 0; g < rule.count; ++g) {
        const double x = pts[s] + rule.nodes[g] * len;
        const double t = (x - a) / h;
        const double q = r[0] + t * (r[1] + t * r[2]);
        total += rule.weights[g] * len * q * f.eval(x);
      }
    }
  }
  return total;
}

double PiecewiseQuadratic::min_value() const {
  double m = 0.0;
  bool first = true;
  auto update = [&](double v) {
    if (first || v < m) m = v;
    first = false;
  };
  for (int c = 0; c < cells(); ++c) {
    const auto r = coef.row(c);
    update(r[0]);
    update(r[0] + r[1] + r[2]);
    if (std::abs(r[2]) > 0.0) {
      const double tstar = -r[1] / (2.0 * r[2]);
      if (tstar > 0.0 && tstar < 1.0) update(r[0] + tstar * (r[1] + tstar * r[2]));
    }
  }
  return m;
}

PiecewiseQuadratic& PiecewiseQuadratic::axpy(double a, const PiecewiseQuadratic& other) {
  if (other.cells() != cells() || std::abs(other.left - left) > 1e-12 ||
      std::abs(other.h - h) > 1e-12) {
    throw std::invalid_argument("PiecewiseQuadratic::axpy: incompatible grids");
  }
  coef += a * other.coef;
  return *this;
}

PiecewiseQuadratic& PiecewiseQuadratic::scale(double a) {
  coef *= a;
  return *this;
}

}  // namespace mcal
