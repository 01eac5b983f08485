#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "assembly.hpp"
#include "common.hpp"
#include "fe_space.hpp"
#include "mesh.hpp"

namespace hdiv_afem {

/// Discrete velocity and pressure on one mesh.
struct FieldPair
{
  std::vector<double> u; // length dofmap->n_u(), boundary moments included
  std::vector<double> p; // length dofmap->n_p()
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const DofMap> dofmap;
  int order = 0;

  DiscreteVelocity velocity() const { return DiscreteVelocity(*mesh, *dofmap, u); }

  /// Pressure at a physical point seen from an active cell.
  double pressure(CellId id, const Vec2 &x) const
  {
    const QBasis qb(order);
    const int k = mesh->active_index(id);
    const Vec2 r = mesh->cell(id).to_reference(x);
    double v = 0.0;
    for (int a = 0; a < qb.n_dofs(); ++a)
      v += p[dofmap->pressure_dof(k, a)] * qb.value(a, r);
    return v;
  }

  /// Integral of the pressure over the domain (the cell mean is coefficient 0).
  double pressure_integral() const
  {
    double s = 0.0;
    for (int k = 0; k < dofmap->n_cells(); ++k)
      s += mesh->cell(dofmap->cell_id(k)).area() * p[dofmap->pressure_dof(k, 0)];
    return s;
  }
};

/// |div u|_{L2(T)} for every active cell, in active-cell order.
inline std::vector<double> cell_divergence_norms(const FieldPair &fp)
{
  const RTElement el(fp.order);
  const Quadrature quad(default_quadrature_points(fp.order));
  const RTBasis basis(fp.order, quad.points);
  std::vector<double> out;
  for (int k = 0; k < fp.dofmap->n_cells(); ++k)
  {
    const Cell &c = fp.mesh->cell(fp.dofmap->cell_id(k));
    const auto coef = fp.dofmap->local_velocity(k, fp.u);
    double s = 0.0;
    for (int q = 0; q < quad.size(); ++q)
    {
      double d = 0.0;
      for (int i = 0; i < el.n_dofs(); ++i)
        d += coef[i] * basis(q, i).div;
      d *= 4.0 / c.area();
      s += quad.weights[q] * 0.25 * c.area() * d * d;
    }
    out.push_back(std::sqrt(s));
  }
  return out;
}

struct SolveReport
{
  double relative_residual = 0.0;
};

/// Sparse direct solve of the saddle-point system. One pressure unknown (the
/// mean of the first cell) is pinned and the pressure is shifted to zero mean
/// afterwards.
///
/// The factorization is a symmetric LDL^T of the quasi-definite matrix
///
///   [ A   B^T        ]
///   [ B   -delta M_p ]
///
/// (M_p the diagonal pressure mass matrix), which is stable under any
/// symmetric fill-reducing ordering. Iterative refinement against the
/// unperturbed matrix removes the perturbation; each sweep contracts the error
/// by roughly delta.
inline FieldPair solve(const SaddleSystem &sys, SolveReport *report = nullptr)
{
  const int nu = sys.n_u, np = sys.n_p;
  if (np < 1)
    throw Error("solve: empty system");
  constexpr double delta = 1e-8;
  // unknowns: free velocity, then pressure without the pinned dof 0
  const int n = nu + np - 1;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(sys.A.nonZeros() + 2 * sys.B.nonZeros() + np);
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < sys.B.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.B, k); it; ++it)
    {
      if (it.row() == 0)
        continue;
      const int pr = nu + it.row() - 1;
      t.emplace_back(pr, it.col(), it.value());
      t.emplace_back(it.col(), pr, it.value());
    }
  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(t.begin(), t.end());
  k.makeCompressed();

  const QBasis qb(sys.params.order);
  for (int c = 0; c < sys.dofmap->n_cells(); ++c)
  {
    const double area = sys.mesh->cell(sys.dofmap->cell_id(c)).area();
    for (int l = 0; l < qb.n_dofs(); ++l)
    {
      const int g = sys.dofmap->pressure_dof(c, l);
      if (g != 0)
        t.emplace_back(nu + g - 1, nu + g - 1, -delta * 0.25 * area * qb.norm_sq(l));
    }
  }
  Eigen::SparseMatrix<double> kd(n, n);
  kd.setFromTriplets(t.begin(), t.end());

  Eigen::VectorXd rhs(n);
  rhs.head(nu) = sys.F;
  rhs.tail(np - 1) = sys.G.tail(np - 1);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(kd);
  if (ldlt.info() != Eigen::Success)
    throw Error("solve: factorization failed (penalty gamma too small or the system is singular)");
  Eigen::VectorXd x = ldlt.solve(rhs);
  if (!x.allFinite())
    throw Error("solve: back substitution failed");
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 10; ++it)
  {
    const Eigen::VectorXd r = rhs - k * x;
    const double rn = r.norm();
    if (rn <= 1e-15 * rhs.norm() || rn >= 0.5 * last)
      break;
    last = rn;
    x += ldlt.solve(r);
  }

  Eigen::VectorXd uf = x.head(nu);
  Eigen::VectorXd p(np);
  p[0] = 0.0;
  p.tail(np - 1) = x.tail(np - 1);

  // residual of the full system, the pinned row included
  const Eigen::VectorXd r1 = sys.A * uf + sys.B.transpose() * p - sys.F;
  const Eigen::VectorXd r2 = sys.B * uf - sys.G;
  const double scale = std::max({sys.F.norm() + sys.G.norm(),
                                 (sys.A * uf).norm() + (sys.B.transpose() * p).norm(), 1e-300});
  const double rel = std::sqrt(r1.squaredNorm() + r2.squaredNorm()) / scale;
  if (report)
    report->relative_residual = rel;
  if (!(rel < 1e-8))
    throw Error("solve: residual " + std::to_string(rel) + " too large; the system is likely "
                "singular (check gamma)");

  FieldPair fp;
  fp.u = expand_velocity(sys, uf);
  fp.p.assign(p.data(), p.data() + np);
  fp.mesh = sys.mesh;
  fp.dofmap = sys.dofmap;
  fp.order = sys.params.order;
  const double mean = fp.pressure_integral() / sys.mesh->domain_area();
  for (int c = 0; c < sys.dofmap->n_cells(); ++c)
    fp.p[sys.dofmap->pressure_dof(c, 0)] -= mean;
  return fp;
}

} // namespace hdiv_afem
