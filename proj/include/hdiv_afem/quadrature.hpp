#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "common.hpp"
#include "polynomial.hpp"

namespace hdiv_afem {

/// Gauss-Legendre rule on [-1,1], exact for degree 2n-1.
struct GaussRule1D
{
  std::vector<double> points;
  std::vector<double> weights;

  explicit GaussRule1D(int n)
    : points(n)
    , weights(n)
  {
    if (n < 1)
      throw Error("GaussRule1D: need at least one point");
    for (int i = 0; i < n; ++i)
    {
      // Chebyshev initial guess, then Newton on L_n
      double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it)
      {
        const auto [p, dp] = legendre_value_and_derivative(n, x);
        const double dx = p / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16)
          break;
      }
      const auto [p, dp] = legendre_value_and_derivative(n, x);
      (void)p;
      points[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  int size() const { return static_cast<int>(points.size()); }
};

/// Tensor-product rule on the reference square [-1,1]^2.
struct Quadrature
{
  std::vector<Vec2> points;
  std::vector<double> weights;

  explicit Quadrature(int n_per_direction)
  {
    const GaussRule1D g(n_per_direction);
    for (int j = 0; j < g.size(); ++j)
      for (int i = 0; i < g.size(); ++i)
      {
        points.push_back({g.points[i], g.points[j]});
        weights.push_back(g.weights[i] * g.weights[j]);
      }
  }

  int size() const { return static_cast<int>(points.size()); }
};

/// Default number of Gauss points per direction for order-m assembly.
inline int default_quadrature_points(int order) { return order + 2; }
/// Load vectors integrate non-polynomial data, so they get a finer rule.
inline int forcing_quadrature_points(int order) { return 2 * order + 4; }

} // namespace hdiv_afem
