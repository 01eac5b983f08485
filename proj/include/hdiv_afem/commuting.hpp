#pragma once

#include <array>
#include <functional>

#include <Eigen/Dense>

#include "common.hpp"
#include "quadrature.hpp"

namespace hdiv_afem {

/// C^1 vector field on the reference square with its Jacobian.
struct SmoothField
{
  std::function<Vec2(const Vec2 &)> value;
  std::function<Mat2(const Vec2 &)> grad;
};

/// Result of the reference-cell interpolation pair for the continuous RT_2
/// element: the velocity interpolant in Q_{3,2} x Q_{2,3} and the Q_{2,2}
/// interpolant of the divergence, both in monomial coefficients.
struct CommutingPair
{
  /// u_coeffs[i + 4 j] multiplies x^i y^j (i <= 3, j <= 2).
  std::array<double, 12> u_coeffs{};
  /// v_coeffs[i + 3 j] multiplies x^i y^j (i <= 2, j <= 3).
  std::array<double, 12> v_coeffs{};
  /// p_coeffs[i + 3 j] multiplies x^i y^j (i, j <= 2).
  std::array<double, 9> p_coeffs{};

  Vec2 velocity(const Vec2 &r) const
  {
    Vec2 out;
    for (int j = 0; j <= 2; ++j)
      for (int i = 0; i <= 3; ++i)
        out.x += u_coeffs[i + 4 * j] * std::pow(r.x, i) * std::pow(r.y, j);
    for (int j = 0; j <= 3; ++j)
      for (int i = 0; i <= 2; ++i)
        out.y += v_coeffs[i + 3 * j] * std::pow(r.x, i) * std::pow(r.y, j);
    return out;
  }

  double divergence(const Vec2 &r) const
  {
    double d = 0.0;
    for (int j = 0; j <= 2; ++j)
      for (int i = 1; i <= 3; ++i)
        d += i * u_coeffs[i + 4 * j] * std::pow(r.x, i - 1) * std::pow(r.y, j);
    for (int j = 1; j <= 3; ++j)
      for (int i = 0; i <= 2; ++i)
        d += j * v_coeffs[i + 3 * j] * std::pow(r.x, i) * std::pow(r.y, j - 1);
    return d;
  }

  double pressure(const Vec2 &r) const
  {
    double p = 0.0;
    for (int j = 0; j <= 2; ++j)
      for (int i = 0; i <= 2; ++i)
        p += p_coeffs[i + 3 * j] * std::pow(r.x, i) * std::pow(r.y, j);
    return p;
  }
};

namespace detail {

// integral of y^j over [-1,1]
inline double monomial_integral(int j) { return j % 2 == 1 ? 0.0 : 2.0 / (j + 1); }

inline double ipow(double x, int k) { return k < 0 ? 0.0 : std::pow(x, k); }

} // namespace detail

/// Interpolate a C^1 field into RT_2 by the 24 conditions (vertex values of
/// both components, vertex values of du/dx and dv/dy, edge integrals of the
/// normal component and of its normal derivative) and its divergence into
/// Q_{2,2} by vertex values, edge integrals and the cell integral.
inline CommutingPair reference_commuting_pair(const SmoothField &field, int quadrature_points = 20)
{
  const std::array<Vec2, 4> vertices{Vec2{-1, -1}, Vec2{1, -1}, Vec2{-1, 1}, Vec2{1, 1}};
  const GaussRule1D g(quadrature_points);

  // unknowns 0..11: u monomials x^i y^j (i<=3, j<=2); 12..23: v monomials (i<=2, j<=3)
  Eigen::Matrix<double, 24, 24> a = Eigen::Matrix<double, 24, 24>::Zero();
  Eigen::Matrix<double, 24, 1> rhs;
  int row = 0;
  for (const Vec2 &x : vertices)
  {
    const Vec2 val = field.value(x);
    const Mat2 grad = field.grad(x);
    for (int j = 0; j <= 2; ++j)
      for (int i = 0; i <= 3; ++i)
      {
        a(row, i + 4 * j) = detail::ipow(x.x, i) * detail::ipow(x.y, j);
        a(row + 2, i + 4 * j) = i * detail::ipow(x.x, i - 1) * detail::ipow(x.y, j);
      }
    for (int j = 0; j <= 3; ++j)
      for (int i = 0; i <= 2; ++i)
      {
        a(row + 1, 12 + i + 3 * j) = detail::ipow(x.x, i) * detail::ipow(x.y, j);
        a(row + 3, 12 + i + 3 * j) = j * detail::ipow(x.x, i) * detail::ipow(x.y, j - 1);
      }
    rhs(row) = val.x;
    rhs(row + 1) = val.y;
    rhs(row + 2) = grad(0, 0);
    rhs(row + 3) = grad(1, 1);
    row += 4;
  }
  for (double side : {-1.0, 1.0})
  {
    // x = side: integrals of u and du/dx in y
    double iu = 0.0, idu = 0.0, iv = 0.0, idv = 0.0;
    for (int q = 0; q < g.size(); ++q)
    {
      const Vec2 px{side, g.points[q]}, py{g.points[q], side};
      iu += g.weights[q] * field.value(px).x;
      idu += g.weights[q] * field.grad(px)(0, 0);
      iv += g.weights[q] * field.value(py).y;
      idv += g.weights[q] * field.grad(py)(1, 1);
    }
    for (int j = 0; j <= 2; ++j)
      for (int i = 0; i <= 3; ++i)
      {
        a(row, i + 4 * j) = detail::ipow(side, i) * detail::monomial_integral(j);
        a(row + 1, i + 4 * j) = i * detail::ipow(side, i - 1) * detail::monomial_integral(j);
      }
    for (int j = 0; j <= 3; ++j)
      for (int i = 0; i <= 2; ++i)
      {
        a(row + 2, 12 + i + 3 * j) = detail::monomial_integral(i) * detail::ipow(side, j);
        a(row + 3, 12 + i + 3 * j) = detail::monomial_integral(i) * j * detail::ipow(side, j - 1);
      }
    rhs(row) = iu;
    rhs(row + 1) = idu;
    rhs(row + 2) = iv;
    rhs(row + 3) = idv;
    row += 4;
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 24, 24>> lu(a);
  if (!lu.isInvertible())
    throw Error("reference_commuting_pair: singular velocity interpolation matrix");
  const Eigen::Matrix<double, 24, 1> sol = lu.solve(rhs);

  // Q_{2,2} interpolation of div v
  const auto div = [&](const Vec2 &x) {
    const Mat2 gr = field.grad(x);
    return gr(0, 0) + gr(1, 1);
  };
  Eigen::Matrix<double, 9, 9> b = Eigen::Matrix<double, 9, 9>::Zero();
  Eigen::Matrix<double, 9, 1> prhs;
  row = 0;
  for (const Vec2 &x : vertices)
  {
    for (int j = 0; j <= 2; ++j)
      for (int i = 0; i <= 2; ++i)
        b(row, i + 3 * j) = detail::ipow(x.x, i) * detail::ipow(x.y, j);
    prhs(row++) = div(x);
  }
  for (double side : {-1.0, 1.0})
  {
    double ix = 0.0, iy = 0.0;
    for (int q = 0; q < g.size(); ++q)
    {
      ix += g.weights[q] * div({side, g.points[q]});
      iy += g.weights[q] * div({g.points[q], side});
    }
    for (int j = 0; j <= 2; ++j)
      for (int i = 0; i <= 2; ++i)
      {
        b(row, i + 3 * j) = detail::ipow(side, i) * detail::monomial_integral(j);
        b(row + 1, i + 3 * j) = detail::monomial_integral(i) * detail::ipow(side, j);
      }
    prhs(row) = ix;
    prhs(row + 1) = iy;
    row += 2;
  }
  double cell = 0.0;
  for (int qy = 0; qy < g.size(); ++qy)
    for (int qx = 0; qx < g.size(); ++qx)
      cell += g.weights[qx] * g.weights[qy] * div({g.points[qx], g.points[qy]});
  for (int j = 0; j <= 2; ++j)
    for (int i = 0; i <= 2; ++i)
      b(row, i + 3 * j) = detail::monomial_integral(i) * detail::monomial_integral(j);
  prhs(row) = cell;
  const Eigen::FullPivLU<Eigen::Matrix<double, 9, 9>> plu(b);
  if (!plu.isInvertible())
    throw Error("reference_commuting_pair: singular pressure interpolation matrix");
  const Eigen::Matrix<double, 9, 1> psol = plu.solve(prhs);

  CommutingPair out;
  for (int k = 0; k < 12; ++k)
  {
    out.u_coeffs[k] = sol(k);
    out.v_coeffs[k] = sol(12 + k);
  }
  for (int k = 0; k < 9; ++k)
    out.p_coeffs[k] = psol(k);
  return out;
}

} // namespace hdiv_afem
