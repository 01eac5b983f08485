#pragma once

#include <memory>
#include <random>
#include <vector>

#include <hdiv_afem/afem.hpp>
#include <hdiv_afem/assembly.hpp>
#include <hdiv_afem/estimator.hpp>
#include <hdiv_afem/mesh.hpp>
#include <hdiv_afem/solver.hpp>

namespace testing_support {

using namespace hdiv_afem;

// u = curl(phi) with phi = x^2 y^2 + 0.5 x y^2 - 0.7 x^2 y + 0.2 x y, which
// lies in RT_m for every m >= 1, and p = x y + 0.3 x in Q_{1,1}.
struct InSpaceSolution
{
  static Vec2 velocity(const Vec2 &x)
  {
    return {2 * x.x * x.x * x.y + x.x * x.y - 0.7 * x.x * x.x + 0.2 * x.x,
            -2 * x.x * x.y * x.y - 0.5 * x.y * x.y + 1.4 * x.x * x.y - 0.2 * x.y};
  }
  static Mat2 gradient(const Vec2 &x)
  {
    Mat2 g;
    g(0, 0) = 4 * x.x * x.y + x.y - 1.4 * x.x + 0.2;
    g(0, 1) = 2 * x.x * x.x + x.x;
    g(1, 0) = -2 * x.y * x.y + 1.4 * x.y;
    g(1, 1) = -4 * x.x * x.y - x.y + 1.4 * x.x - 0.2;
    return g;
  }
  static double pressure(const Vec2 &x) { return x.x * x.y + 0.3 * x.x; }
  static Vec2 forcing(const Vec2 &x) { return {-3 * x.y + 1.7, 5 * x.x + 1}; }
  static Vec2 forcing0(const Vec2 &x) { return {-4 * x.y + 1.4, 4 * x.x + 1}; }
  // mean over the unit square
  static constexpr double pressure_mean = 0.4;

  static ExactVelocity exact() { return {velocity, gradient, std::nullopt}; }

  static Problem problem()
  {
    Problem p;
    p.name = "in_space";
    p.f = forcing;
    p.f0 = forcing0;
    p.g = velocity;
    p.exact = exact();
    p.initial_cells = grid_cells({0, 0, 1, 1}, 2, 2);
    return p;
  }
};

// Unit square 2x2 mesh with one cell refined twice, so hanging faces appear.
inline Mesh hanging_mesh()
{
  Mesh m = Mesh::build_initial(grid_cells({0, 0, 1, 1}, 2, 2));
  std::vector<CellId> mark{0};
  m = refine(m, mark).mesh;
  mark = {m.active_cells().front()};
  return refine(m, mark).mesh;
}

inline FieldPair solve_on(const Mesh &mesh, int order, const VectorFunction &f, const VectorFunction &g,
                          double gamma = 0.0)
{
  auto mp = std::make_shared<const Mesh>(mesh);
  auto dp = std::make_shared<const DofMap>(build_dofmap(*mp, order));
  IPParams params = IPParams::with_default_gamma(order);
  if (gamma > 0.0)
    params.gamma = gamma;
  return solve(assemble(mp, dp, params, f, g));
}

// Field pair with the given velocity coefficients and zero pressure.
inline FieldPair field_pair(const Mesh &mesh, int order, std::vector<double> u)
{
  FieldPair fp;
  fp.mesh = std::make_shared<const Mesh>(mesh);
  fp.dofmap = std::make_shared<const DofMap>(build_dofmap(*fp.mesh, order));
  fp.order = order;
  if (u.empty())
    u.assign(fp.dofmap->n_u(), 0.0);
  fp.u = std::move(u);
  fp.p.assign(fp.dofmap->n_p(), 0.0);
  return fp;
}

inline std::vector<double> random_vector(std::mt19937 &rng, int n)
{
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (double &x : v)
    x = d(rng);
  return v;
}

// One-irregularity from geometry alone: for every active cell edge count the
// active cells whose opposite edge lies on the same line and overlaps it.
inline int max_cells_across_edge(const Mesh &mesh)
{
  int worst = 0;
  const auto &active = mesh.active_cells();
  for (CellId a : active)
  {
    const Rect &ra = mesh.cell(a).bounds;
    int left = 0, right = 0, bottom = 0, top = 0;
    for (CellId b : active)
    {
      if (a == b)
        continue;
      const Rect &rb = mesh.cell(b).bounds;
      const double oy = std::min(ra.y1, rb.y1) - std::max(ra.y0, rb.y0);
      const double ox = std::min(ra.x1, rb.x1) - std::max(ra.x0, rb.x0);
      if (oy > 1e-14)
      {
        left += std::abs(rb.x1 - ra.x0) < 1e-14;
        right += std::abs(rb.x0 - ra.x1) < 1e-14;
      }
      if (ox > 1e-14)
      {
        bottom += std::abs(rb.y1 - ra.y0) < 1e-14;
        top += std::abs(rb.y0 - ra.y1) < 1e-14;
      }
    }
    worst = std::max({worst, left, right, bottom, top});
  }
  return worst;
}

} // namespace testing_support
