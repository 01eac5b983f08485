#include <random>

#include <gtest/gtest.h>

#include <hdiv_afem/commuting.hpp>
#include <hdiv_afem/polynomial.hpp>
#include <hdiv_afem/quadrature.hpp>

#include "support.hpp"

using namespace hdiv_afem;

namespace {

// Canonical node functionals applied to shape function i: Legendre moments of
// the normal component on the left, right, bottom, top edges, then interior
// moments of each component.
Eigen::MatrixXd node_functional_matrix(const RTElement &el)
{
  const int m = el.order(), n = el.n_dofs();
  const GaussRule1D g(m + 4);
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
  {
    int row = 0;
    auto edge = [&](int comp, bool vertical, double pos) {
      for (int j = 0; j <= m; ++j)
      {
        const Polynomial lj = legendre(j);
        double s = 0.0;
        for (int q = 0; q < g.size(); ++q)
        {
          const Vec2 r = vertical ? Vec2{pos, g.points[q]} : Vec2{g.points[q], pos};
          s += g.weights[q] * el.evaluate(i, r).value[comp] * lj(g.points[q]);
        }
        out(row++, i) = s;
      }
    };
    edge(0, true, -1.0);
    edge(0, true, 1.0);
    edge(1, false, -1.0);
    edge(1, false, 1.0);
    // first component: moments against L_a(x) L_b(y), a < m, b <= m
    for (int a = 0; a < m; ++a)
      for (int b = 0; b <= m; ++b)
      {
        double s = 0.0;
        for (int p = 0; p < g.size(); ++p)
          for (int q = 0; q < g.size(); ++q)
            s += g.weights[p] * g.weights[q] * el.evaluate(i, {g.points[p], g.points[q]}).value.x *
                 legendre(a)(g.points[p]) * legendre(b)(g.points[q]);
        out(row++, i) = s;
      }
    // second component: moments against L_a(x) L_b(y), a <= m, b < m
    for (int a = 0; a <= m; ++a)
      for (int b = 0; b < m; ++b)
      {
        double s = 0.0;
        for (int p = 0; p < g.size(); ++p)
          for (int q = 0; q < g.size(); ++q)
            s += g.weights[p] * g.weights[q] * el.evaluate(i, {g.points[p], g.points[q]}).value.y *
                 legendre(a)(g.points[p]) * legendre(b)(g.points[q]);
        out(row++, i) = s;
      }
  }
  return out;
}

} // namespace

TEST(RTElement, DimensionCounts)
{
  EXPECT_EQ(RTElement(0).n_dofs(), 4);
  EXPECT_EQ(RTElement(1).n_dofs(), 12);
  EXPECT_EQ(RTElement(2).n_dofs(), 24);
}

TEST(RTElement, LowestOrderDivergenceIsConstant)
{
  const RTElement el(0);
  for (int i = 0; i < 4; ++i)
  {
    const double d = el.evaluate(i, {0.0, 0.0}).div;
    EXPECT_NEAR(el.evaluate(i, {0.7, -0.3}).div, d, 1e-14);
    EXPECT_NEAR(el.evaluate(i, {-0.9, 0.8}).div, d, 1e-14);
  }
}

TEST(RTElement, BasisIsDualToNodeFunctionals)
{
  for (int m = 0; m <= 4; ++m)
  {
    const RTElement el(m);
    const Eigen::MatrixXd k = node_functional_matrix(el);
    EXPECT_LT((k - Eigen::MatrixXd::Identity(el.n_dofs(), el.n_dofs())).cwiseAbs().maxCoeff(), 1e-12)
      << "m = " << m;
  }
}

TEST(RTElement, DivergenceLiesInQmm)
{
  // least-squares fit of each divergence by Q_{m,m} on a Gauss grid, checked
  // at off-grid points
  for (int m = 0; m <= 3; ++m)
  {
    const RTElement el(m);
    const QBasis qb(m);
    const Quadrature quad(m + 3);
    for (int i = 0; i < el.n_dofs(); ++i)
    {
      Eigen::VectorXd c(qb.n_dofs());
      for (int k = 0; k < qb.n_dofs(); ++k)
      {
        double s = 0.0;
        for (int q = 0; q < quad.size(); ++q)
          s += quad.weights[q] * el.evaluate(i, quad.points[q]).div * qb.value(k, quad.points[q]);
        c[k] = s / qb.norm_sq(k);
      }
      for (const Vec2 r : {Vec2{0.31, -0.77}, Vec2{-0.9, 0.05}, Vec2{1.0, 1.0}})
      {
        double fit = 0.0;
        for (int k = 0; k < qb.n_dofs(); ++k)
          fit += c[k] * qb.value(k, r);
        EXPECT_NEAR(fit, el.evaluate(i, r).div, 1e-12);
      }
    }
  }
}

TEST(Piola, IdentityCellAndUnitSquare)
{
  ShapeEval ref;
  ref.value = {1.0, 0.0};
  ref.div = 0.5;
  const ShapeEval same = piola(ref, 2.0, 2.0);
  EXPECT_DOUBLE_EQ(same.value.x, 1.0);
  EXPECT_DOUBLE_EQ(same.value.y, 0.0);
  EXPECT_DOUBLE_EQ(same.div, 0.5);
  const ShapeEval unit = piola(ref, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(unit.value.x, 2.0);
  EXPECT_DOUBLE_EQ(unit.value.y, 0.0);
  EXPECT_DOUBLE_EQ(unit.div, 2.0);
}

TEST(Piola, LowestOrderGradientsOnUnitCell)
{
  // RT_0 on [0,1]^2: (1-x, 0), (x, 0), (0, 1-y), (0, y)
  const RTElement el(0);
  const Cell c{0, {0, 0, 1, 1}};
  const Vec2 x{0.3, 0.6};
  const std::array<Vec2, 4> expect{Vec2{0.7, 0}, Vec2{0.3, 0}, Vec2{0, 0.4}, Vec2{0, 0.6}};
  for (int i = 0; i < 4; ++i)
  {
    const ShapeEval e = piola(el.evaluate(i, c.to_reference(x)), 1.0, 1.0);
    EXPECT_NEAR(e.value.x, expect[i].x, 1e-14);
    EXPECT_NEAR(e.value.y, expect[i].y, 1e-14);
  }
  EXPECT_NEAR(piola(el.evaluate(0, {0, 0}), 1, 1).grad(0, 0), -1.0, 1e-14);
  EXPECT_NEAR(piola(el.evaluate(3, {0, 0}), 1, 1).grad(1, 1), 1.0, 1e-14);
}

TEST(Piola, MappedDivergenceMatchesFiniteDifferences)
{
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.9, 0.9), size(0.1, 3.0);
  const RTElement el(2);
  for (int trial = 0; trial < 50; ++trial)
  {
    const double hx = size(rng), hy = size(rng);
    const Cell c{0, {0.3, -1.2, 0.3 + hx, -1.2 + hy}};
    const int i = trial % el.n_dofs();
    const Vec2 r{u(rng), u(rng)};
    const Vec2 x = c.to_physical(r);
    auto value = [&](const Vec2 &p) { return piola(el.evaluate(i, c.to_reference(p)), hx, hy).value; };
    // the field is a polynomial of degree 3 per direction, so a 4th-order
    // central difference with a moderate step is exact up to rounding
    auto d = [&](int dir) {
      const double h = 1e-2 * (dir == 0 ? hx : hy);
      auto at = [&](double s) {
        const Vec2 p = dir == 0 ? Vec2{x.x + s, x.y} : Vec2{x.x, x.y + s};
        return value(p)[dir];
      };
      return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    };
    const double fd = d(0) + d(1);
    const ShapeEval e = piola(el.evaluate(i, r), hx, hy);
    EXPECT_NEAR(e.div, fd, 1e-13 * std::max(1.0, std::abs(fd)) / std::min(hx, hy));
    EXPECT_NEAR(e.div, e.grad(0, 0) + e.grad(1, 1), 1e-12 * std::max(1.0, std::abs(e.div)));
  }
}

TEST(DofMap, LowestOrderCounts)
{
  const DofMap one = build_dofmap(Mesh::build_initial({{0, 0, 1, 1}}), 0);
  EXPECT_EQ(one.n_u(), 4);
  EXPECT_EQ(one.n_p(), 1);
  const DofMap two = build_dofmap(Mesh::build_initial(grid_cells({0, 0, 2, 1}, 2, 1)), 0);
  EXPECT_EQ(two.n_u(), 7);
  EXPECT_EQ(two.n_p(), 2);
}

TEST(DofMap, RejectsIrregularMeshes)
{
  Mesh m = Mesh::build_initial(grid_cells({0, 0, 1, 1}, 2, 2));
  m = refine(m, std::vector<CellId>{0}, Closure::none).mesh;
  m = refine(m, std::vector<CellId>{m.locate({0.4, 0.1})}, Closure::none).mesh;
  EXPECT_THROW(build_dofmap(m, 1), Error);
}

TEST(DofMap, HangingConstraintReproducesCoarseTrace)
{
  const Mesh m = refine(Mesh::build_initial(grid_cells({0, 0, 2, 1}, 2, 1)), std::vector<CellId>{1}).mesh;
  const int order = 1;
  const DofMap d = build_dofmap(m, order);
  EXPECT_EQ(d.n_slave_local_dofs(), 2 * (order + 1));
  std::mt19937 rng(5);
  const auto u = testing_support::random_vector(rng, d.n_u());
  const DiscreteVelocity v(m, d, u);
  const GaussRule1D g(6);
  for (const SubFace &s : m.sub_faces())
  {
    if (s.is_boundary())
      continue;
    double jump = 0.0;
    for (int q = 0; q < g.size(); ++q)
    {
      const Vec2 x = s.point(s.parameter(g.points[q]));
      jump = std::max(jump, std::abs(dot(v.evaluate(s.first, x).value - v.evaluate(s.second, x).value, s.normal)));
    }
    EXPECT_LT(jump, 1e-12);
  }
}

TEST(DofMap, RandomConstrainedFieldsAreNormalConforming)
{
  std::mt19937 rng(3);
  Mesh m = Mesh::build_initial(lshape_cells());
  for (int k = 0; k < 5; ++k)
    m = refine(m, std::vector<CellId>{m.locate({-1e-3, 1e-3}), m.locate({0.6, -0.6})}).mesh;
  for (int order : {1, 2, 3})
  {
    const DofMap d = build_dofmap(m, order);
    const auto u = testing_support::random_vector(rng, d.n_u());
    const DiscreteVelocity v(m, d, u);
    const GaussRule1D g(order + 3);
    for (const SubFace &s : m.sub_faces())
    {
      if (s.is_boundary())
        continue;
      double l2 = 0.0;
      for (int q = 0; q < g.size(); ++q)
      {
        const Vec2 x = s.point(s.parameter(g.points[q]));
        const double j = dot(v.evaluate(s.first, x).value - v.evaluate(s.second, x).value, s.normal);
        l2 += g.weights[q] * 0.5 * s.length() * j * j;
      }
      EXPECT_LT(std::sqrt(l2), 1e-10);
    }
  }
}

TEST(Quadrature, StiffnessIntegrandIsIntegratedExactly)
{
  for (int m = 1; m <= 3; ++m)
  {
    const RTElement el(m);
    const Quadrature lo(default_quadrature_points(m)), hi(m + 4);
    for (int i = 0; i < el.n_dofs(); i += 3)
      for (int j = 0; j < el.n_dofs(); j += 2)
      {
        auto integral = [&](const Quadrature &q) {
          double s = 0.0;
          for (int k = 0; k < q.size(); ++k)
            s += q.weights[k] * frobenius_dot(el.evaluate(i, q.points[k]).grad, el.evaluate(j, q.points[k]).grad);
          return s;
        };
        EXPECT_NEAR(integral(lo), integral(hi), 1e-13 * std::max(1.0, std::abs(integral(hi))));
      }
  }
}

// Commuting interpolation pair of the continuous RT_2 element.

namespace {

SmoothField polynomial_field(const std::array<double, 12> &u, const std::array<double, 12> &v)
{
  CommutingPair c;
  c.u_coeffs = u;
  c.v_coeffs = v;
  SmoothField f;
  f.value = [c](const Vec2 &r) { return c.velocity(r); };
  f.grad = [c](const Vec2 &r) {
    const double h = 1e-4;
    // the field is cubic, so the 4th-order central difference is exact up to rounding
    Mat2 g;
    for (int d = 0; d < 2; ++d)
    {
      auto at = [&](double s) { return c.velocity(d == 0 ? Vec2{r.x + s, r.y} : Vec2{r.x, r.y + s}); };
      const Vec2 df = (-1.0 * at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) * (1.0 / (12 * h));
      g(0, d) = df.x;
      g(1, d) = df.y;
    }
    return g;
  };
  return f;
}

} // namespace

TEST(Commuting, ReproducesRT2Fields)
{
  std::mt19937 rng(17);
  std::array<double, 12> u{}, v{};
  for (auto *a : {&u, &v})
    for (double &x : *a)
      x = std::uniform_real_distribution<double>(-1, 1)(rng);
  // exact Jacobian from the monomial coefficients
  CommutingPair ref;
  ref.u_coeffs = u;
  ref.v_coeffs = v;
  SmoothField f = polynomial_field(u, v);
  f.grad = [ref](const Vec2 &r) {
    Mat2 g;
    for (int j = 0; j <= 2; ++j)
      for (int i = 0; i <= 3; ++i)
      {
        g(0, 0) += i == 0 ? 0.0 : i * ref.u_coeffs[i + 4 * j] * std::pow(r.x, i - 1) * std::pow(r.y, j);
        g(0, 1) += j == 0 ? 0.0 : j * ref.u_coeffs[i + 4 * j] * std::pow(r.x, i) * std::pow(r.y, j - 1);
      }
    for (int j = 0; j <= 3; ++j)
      for (int i = 0; i <= 2; ++i)
      {
        g(1, 0) += i == 0 ? 0.0 : i * ref.v_coeffs[i + 3 * j] * std::pow(r.x, i - 1) * std::pow(r.y, j);
        g(1, 1) += j == 0 ? 0.0 : j * ref.v_coeffs[i + 3 * j] * std::pow(r.x, i) * std::pow(r.y, j - 1);
      }
    return g;
  };
  const CommutingPair c = reference_commuting_pair(f);
  for (int k = 0; k < 12; ++k)
  {
    EXPECT_NEAR(c.u_coeffs[k], u[k], 1e-12);
    EXPECT_NEAR(c.v_coeffs[k], v[k], 1e-12);
  }
}

TEST(Commuting, DivergenceFreeFieldStaysDivergenceFree)
{
  SmoothField f;
  f.value = [](const Vec2 &r) { return Vec2{r.x * r.x, -2 * r.x * r.y}; };
  f.grad = [](const Vec2 &r) {
    Mat2 g;
    g(0, 0) = 2 * r.x;
    g(1, 0) = -2 * r.y;
    g(1, 1) = -2 * r.x;
    return g;
  };
  const CommutingPair c = reference_commuting_pair(f);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 50; ++k)
    EXPECT_NEAR(c.divergence({u(rng), u(rng)}), 0.0, 1e-12);
}

TEST(Commuting, DiagramCommutesForRandomSmoothFields)
{
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1), k(-3, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial)
  {
    const double a1 = u(rng), b1 = k(rng), c1 = k(rng), d1 = u(rng);
    const double a2 = u(rng), b2 = k(rng), c2 = k(rng), d2 = u(rng);
    SmoothField f;
    f.value = [=](const Vec2 &r) {
      return Vec2{a1 * std::sin(b1 * r.x + c1 * r.y + d1), a2 * std::cos(b2 * r.x + c2 * r.y + d2)};
    };
    f.grad = [=](const Vec2 &r) {
      const double s1 = a1 * std::cos(b1 * r.x + c1 * r.y + d1);
      const double s2 = -a2 * std::sin(b2 * r.x + c2 * r.y + d2);
      Mat2 g;
      g(0, 0) = b1 * s1;
      g(0, 1) = c1 * s1;
      g(1, 0) = b2 * s2;
      g(1, 1) = c2 * s2;
      return g;
    };
    const CommutingPair c = reference_commuting_pair(f);
    for (int p = 0; p < 20; ++p)
    {
      const Vec2 r{u(rng), u(rng)};
      worst = std::max(worst, std::abs(c.divergence(r) - c.pressure(r)));
    }
  }
  EXPECT_LT(worst, 1e-10);
}
