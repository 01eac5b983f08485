#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "common.hpp"
#include "fe_space.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

namespace hdiv_afem {

using VectorFunction = std::function<Vec2(const Vec2 &)>;
using TensorFunction = std::function<Mat2(const Vec2 &)>;
using ScalarFunction = std::function<double(const Vec2 &)>;

struct IPParams
{
  double gamma = 0.0;
  int order = 0;

  /// gamma_0(m) = 4 (m+1)(m+2)
  static double default_gamma(int order) { return 4.0 * (order + 1) * (order + 2); }
  static IPParams with_default_gamma(int order) { return {default_gamma(order), order}; }
};

template <class T>
struct JumpMean
{
  T jump;
  T sum;
};

/// Jump u1 - u2 and sum u1 + u2 of the two traces on a face.
template <class T>
JumpMean<T> jump_and_mean(const T &u1, const T &u2)
{
  return {u1 - u2, u1 + u2};
}

/// Interior-penalty Stokes system restricted to the free velocity unknowns:
///
///   [ A  B^T ] [u]   [F]
///   [ B  0   ] [p] = [G]
///
/// Boundary normal moments are fixed by the Dirichlet datum and stored in
/// `boundary_values`; their couplings have been moved to F and G.
struct SaddleSystem
{
  Eigen::SparseMatrix<double> A;
  Eigen::SparseMatrix<double> B;
  Eigen::VectorXd F;
  Eigen::VectorXd G;
  int n_u = 0;
  int n_p = 0;
  std::vector<int> free_to_global;
  std::vector<int> global_to_free;
  std::vector<double> boundary_values;
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const DofMap> dofmap;
  IPParams params;
};

namespace detail {

/// Shape evaluations of all local functions of a cell at one physical point.
inline void evaluate_shapes(const RTElement &el, const Cell &c, const Vec2 &x,
                            std::vector<ShapeEval> &out)
{
  out.resize(el.n_dofs());
  const Vec2 r = c.to_reference(x);
  for (int i = 0; i < el.n_dofs(); ++i)
    out[i] = piola(el.evaluate(i, r), c.width(), c.height());
}

/// Adds  sum_ij w_i w_j M_IJ  into the free/free block, moving couplings to
/// fixed columns into the right-hand side.
struct Scatter
{
  const DofMap &dofs;
  const std::vector<int> &free_index;
  const std::vector<double> &fixed;
  std::vector<Eigen::Triplet<double>> &triplets;
  Eigen::VectorXd &rhs;

  void matrix(std::span<const int> cells, const Eigen::MatrixXd &m) const
  {
    const int nl = dofs.n_local_velocity();
    for (int bi = 0; bi < static_cast<int>(cells.size()); ++bi)
      for (int i = 0; i < nl; ++i)
        for (const DofEntry &ri : dofs.velocity_dofs(cells[bi], i))
        {
          const int fi = free_index[ri.global];
          if (fi < 0)
            continue;
          for (int bj = 0; bj < static_cast<int>(cells.size()); ++bj)
            for (int j = 0; j < nl; ++j)
            {
              const double a = m(bi * nl + i, bj * nl + j);
              if (a == 0.0)
                continue;
              for (const DofEntry &cj : dofs.velocity_dofs(cells[bj], j))
              {
                const double v = ri.weight * cj.weight * a;
                const int fj = free_index[cj.global];
                if (fj < 0)
                  rhs[fi] -= v * fixed[cj.global];
                else
                  triplets.emplace_back(fi, fj, v);
              }
            }
        }
  }

  void vector(std::span<const int> cells, const Eigen::VectorXd &f) const
  {
    const int nl = dofs.n_local_velocity();
    for (int bi = 0; bi < static_cast<int>(cells.size()); ++bi)
      for (int i = 0; i < nl; ++i)
        for (const DofEntry &ri : dofs.velocity_dofs(cells[bi], i))
        {
          const int fi = free_index[ri.global];
          if (fi >= 0)
            rhs[fi] += ri.weight * f(bi * nl + i);
        }
  }
};

/// Normal moments of g on every boundary face, corrected so the net flux
/// through the boundary vanishes (solvability of the divergence constraint).
inline std::vector<double> boundary_moments(const Mesh &mesh, const DofMap &dofs,
                                            const VectorFunction &g, int quad_points)
{
  std::vector<double> values(dofs.n_u(), 0.0);
  if (!g)
    return values;
  const int m = dofs.order();
  const GaussRule1D rule(quad_points);
  double flux = 0.0, perimeter = 0.0;
  for (const Face &f : mesh.faces())
  {
    if (f.kind != FaceKind::boundary)
      continue;
    const int axis = f.orientation == Orientation::vertical ? 0 : 1;
    for (int j = 0; j <= m; ++j)
    {
      const Polynomial lj = legendre(j);
      double s = 0.0;
      for (int q = 0; q < rule.size(); ++q)
      {
        const double t = rule.points[q];
        const Vec2 x = f.point(f.lo + 0.5 * (t + 1.0) * f.length());
        s += rule.weights[q] * g(x)[axis] * lj(t);
      }
      values[dofs.face_dof(f.id, j)] = 0.5 * f.length() * s;
    }
    const double outward = f.minus[0] != invalid_id ? 1.0 : -1.0;
    flux += outward * values[dofs.face_dof(f.id, 0)];
    perimeter += f.length();
  }
  for (const Face &f : mesh.faces())
  {
    if (f.kind != FaceKind::boundary)
      continue;
    const double outward = f.minus[0] != invalid_id ? 1.0 : -1.0;
    values[dofs.face_dof(f.id, 0)] -= outward * flux * f.length() / perimeter;
  }
  return values;
}

} // namespace detail

/// Assemble the symmetric interior-penalty discretisation of
/// -Laplace u + grad p = f, div u = 0, u = g on the boundary.
///
/// Cell terms (grad u, grad v)_T and -(q, div v)_T; interior (sub-)faces
/// gamma/h_F ([u],[v]) - ({grad u} n, [v]) - ({grad v} n, [u]) with {.} the
/// average; boundary faces the Nitsche analogues with one-sided traces and g
/// on the right-hand side. Normal moments of g are imposed strongly.
inline SaddleSystem assemble(std::shared_ptr<const Mesh> mesh_ptr,
                             std::shared_ptr<const DofMap> dofs_ptr, const IPParams &params,
                             const VectorFunction &f, const VectorFunction &g)
{
  if (!(params.gamma > 0.0))
    throw Error("assemble: penalty parameter gamma must be positive");
  const Mesh &mesh = *mesh_ptr;
  const DofMap &dofs = *dofs_ptr;
  if (params.order != dofs.order())
    throw Error("assemble: order mismatch between parameters and dof map");
  const int m = dofs.order();
  const RTElement el(m);
  const QBasis qb(m);
  const int nl = el.n_dofs();
  const int nq = default_quadrature_points(m);

  SaddleSystem sys;
  sys.mesh = mesh_ptr;
  sys.dofmap = dofs_ptr;
  sys.params = params;
  sys.global_to_free.assign(dofs.n_u(), -1);
  for (int gdof = 0; gdof < dofs.n_u(); ++gdof)
    if (!dofs.is_boundary(gdof))
    {
      sys.global_to_free[gdof] = static_cast<int>(sys.free_to_global.size());
      sys.free_to_global.push_back(gdof);
    }
  sys.n_u = static_cast<int>(sys.free_to_global.size());
  sys.n_p = dofs.n_p();
  sys.boundary_values = detail::boundary_moments(mesh, dofs, g, nq + 2);
  sys.F = Eigen::VectorXd::Zero(sys.n_u);
  sys.G = Eigen::VectorXd::Zero(sys.n_p);

  std::vector<Eigen::Triplet<double>> ta, tb;
  const detail::Scatter scatter{dofs, sys.global_to_free, sys.boundary_values, ta, sys.F};

  const Quadrature quad(nq);
  const RTBasis basis(m, quad.points);
  const Quadrature fquad(forcing_quadrature_points(m));
  const RTBasis fbasis(m, fquad.points);
  Eigen::MatrixXd aloc(nl, nl);
  Eigen::VectorXd floc(nl);
  Eigen::MatrixXd bloc(qb.n_dofs(), nl);
  for (int k = 0; k < dofs.n_cells(); ++k)
  {
    const Cell &c = mesh.cell(dofs.cell_id(k));
    const double jac = 0.25 * c.area();
    const auto phys = map_to_cell(basis, c);
    aloc.setZero();
    floc.setZero();
    bloc.setZero();
    for (int q = 0; q < quad.size(); ++q)
    {
      const double jxw = quad.weights[q] * jac;
      const ShapeEval *sq = &phys[static_cast<std::size_t>(q) * nl];
      for (int i = 0; i < nl; ++i)
        for (int j = i; j < nl; ++j)
          aloc(i, j) += jxw * frobenius_dot(sq[i].grad, sq[j].grad);
      for (int a = 0; a < qb.n_dofs(); ++a)
      {
        const double qa = qb.value(a, quad.points[q]);
        for (int i = 0; i < nl; ++i)
          bloc(a, i) -= jxw * qa * sq[i].div;
      }
    }
    if (f)
    {
      const auto fphys = map_to_cell(fbasis, c);
      for (int q = 0; q < fquad.size(); ++q)
      {
        const double jxw = fquad.weights[q] * jac;
        const Vec2 fx = f(c.to_physical(fquad.points[q]));
        for (int i = 0; i < nl; ++i)
          floc(i) += jxw * dot(fx, fphys[static_cast<std::size_t>(q) * nl + i].value);
      }
    }
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < i; ++j)
        aloc(i, j) = aloc(j, i);
    const int cells[1] = {k};
    scatter.matrix(cells, aloc);
    scatter.vector(cells, floc);
    for (int a = 0; a < qb.n_dofs(); ++a)
    {
      const int prow = dofs.pressure_dof(k, a);
      for (int i = 0; i < nl; ++i)
      {
        if (bloc(a, i) == 0.0)
          continue;
        for (const DofEntry &d : dofs.velocity_dofs(k, i))
        {
          const double v = d.weight * bloc(a, i);
          const int fj = sys.global_to_free[d.global];
          if (fj < 0)
            sys.G[prow] -= v * sys.boundary_values[d.global];
          else
            tb.emplace_back(prow, fj, v);
        }
      }
    }
  }

  const GaussRule1D frule(nq);
  std::vector<ShapeEval> ea, eb;
  Eigen::MatrixXd fa(2 * nl, 2 * nl);
  Eigen::VectorXd ff(2 * nl);
  std::vector<Vec2> jmp(2 * nl), dn(2 * nl);
  for (const SubFace &s : mesh.sub_faces())
  {
    const bool boundary = s.is_boundary();
    const int nb = boundary ? 1 : 2;
    const Cell &ca = mesh.cell(s.first);
    fa.setZero();
    ff.setZero();
    const double penalty = params.gamma / s.h;
    for (int q = 0; q < frule.size(); ++q)
    {
      const Vec2 x = s.point(s.parameter(frule.points[q]));
      const double w = frule.weights[q] * 0.5 * s.length();
      detail::evaluate_shapes(el, ca, x, ea);
      // interior faces: average normal derivative, boundary: one-sided
      const double avg = boundary ? 1.0 : 0.5;
      for (int i = 0; i < nl; ++i)
      {
        jmp[i] = ea[i].value;
        dn[i] = avg * (ea[i].grad * s.normal);
      }
      if (!boundary)
      {
        detail::evaluate_shapes(el, mesh.cell(s.second), x, eb);
        for (int i = 0; i < nl; ++i)
        {
          jmp[nl + i] = -1.0 * eb[i].value;
          dn[nl + i] = avg * (eb[i].grad * s.normal);
        }
      }
      const int n = nb * nl;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          fa(i, j) +=
            w * (penalty * dot(jmp[i], jmp[j]) - dot(dn[j], jmp[i]) - dot(dn[i], jmp[j]));
      if (boundary && g)
      {
        const Vec2 gx = g(x);
        for (int i = 0; i < nl; ++i)
          ff(i) += w * (penalty * dot(gx, jmp[i]) - dot(dn[i], gx));
      }
    }
    const int k0 = dofs.n_cells() > 0 ? mesh.active_index(s.first) : 0;
    if (boundary)
    {
      const int cells[1] = {k0};
      scatter.matrix(cells, fa.topLeftCorner(nl, nl));
      scatter.vector(cells, ff.head(nl));
    }
    else
    {
      const int cells[2] = {k0, mesh.active_index(s.second)};
      scatter.matrix(cells, fa);
    }
  }

  sys.A.resize(sys.n_u, sys.n_u);
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.B.resize(sys.n_p, sys.n_u);
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.A.makeCompressed();
  sys.B.makeCompressed();
  return sys;
}

/// Velocity coefficients on the free unknowns expanded to the full global
/// vector (boundary moments filled from the system).
inline std::vector<double> expand_velocity(const SaddleSystem &sys, const Eigen::VectorXd &free)
{
  std::vector<double> u = sys.boundary_values;
  for (int i = 0; i < sys.n_u; ++i)
    u[sys.free_to_global[i]] = free[i];
  return u;
}

/// Value and gradient of a (possibly broken) velocity field as seen from one
/// cell.
struct FieldTrace
{
  Vec2 value;
  Mat2 grad;
};
using BrokenField = std::function<FieldTrace(CellId, const Vec2 &)>;

inline BrokenField broken_field(const DiscreteVelocity &v)
{
  return [&v](CellId id, const Vec2 &x) {
    const ShapeEval e = v.evaluate(id, x);
    return FieldTrace{e.value, e.grad};
  };
}

inline BrokenField smooth_field(VectorFunction value, TensorFunction grad)
{
  return [value = std::move(value), grad = std::move(grad)](CellId, const Vec2 &x) {
    return FieldTrace{value(x), grad(x)};
  };
}

/// Broken H^1 seminorm squared and scaled interior jump term
/// sum_F h_F^{-1} |[v]|^2_F, evaluated with `quad_points` Gauss points.
struct DGNormParts
{
  double gradient_sq = 0.0;
  double jump_sq = 0.0;

  double norm_sq(double gamma) const { return gradient_sq + gamma * jump_sq; }
  double norm(double gamma) const { return std::sqrt(norm_sq(gamma)); }
};

inline DGNormParts dg_norm_parts(const Mesh &mesh, const BrokenField &v, int quad_points)
{
  DGNormParts out;
  const Quadrature quad(quad_points);
  for (CellId id : mesh.active_cells())
  {
    const Cell &c = mesh.cell(id);
    for (int q = 0; q < quad.size(); ++q)
      out.gradient_sq +=
        quad.weights[q] * 0.25 * c.area() * frobenius_sq(v(id, c.to_physical(quad.points[q])).grad);
  }
  const GaussRule1D rule(quad_points);
  for (const SubFace &s : mesh.sub_faces())
  {
    if (s.is_boundary())
      continue;
    double j = 0.0;
    for (int q = 0; q < rule.size(); ++q)
    {
      const Vec2 x = s.point(s.parameter(rule.points[q]));
      const auto jm = jump_and_mean(v(s.first, x).value, v(s.second, x).value);
      j += rule.weights[q] * 0.5 * s.length() * norm_sq(jm.jump);
    }
    out.jump_sq += j / s.h;
  }
  return out;
}

/// |v|_{1,k} = ( |grad v|^2 + gamma |h_F^{-1/2} [v]|^2 )^{1/2} over interior faces.
inline double dg_norm(const Mesh &mesh, const BrokenField &v, double gamma, int quad_points)
{
  return dg_norm_parts(mesh, v, quad_points).norm(gamma);
}

/// Ratio |L_S v|^2 / |h_F^{-1/2}[v]|^2, where the lifting L_S v lives in the
/// cellwise tensor space Q_{m+1,m+1}^{2x2} and is defined by
/// (L_S v, tau) = 1/2 ({tau}, {v (x) n}) over interior faces. Returns 0 when
/// v has no jumps.
inline double lifting_diagnostic(const Mesh &mesh, const DofMap &dofs, std::span<const double> u)
{
  const DiscreteVelocity v(mesh, dofs, u);
  const int p = dofs.order() + 1;
  const QBasis tb(p);
  const int nt = tb.n_dofs();
  // rhs[cell][component ab][k]
  std::vector<std::vector<double>> r(mesh.n_active(), std::vector<double>(4 * nt, 0.0));
  double jump_sq = 0.0;
  const GaussRule1D rule(p + 3);
  for (const SubFace &s : mesh.sub_faces())
  {
    if (s.is_boundary())
      continue;
    const Cell &c1 = mesh.cell(s.first);
    const Cell &c2 = mesh.cell(s.second);
    auto &r1 = r[mesh.active_index(s.first)];
    auto &r2 = r[mesh.active_index(s.second)];
    double js = 0.0;
    for (int q = 0; q < rule.size(); ++q)
    {
      const Vec2 x = s.point(s.parameter(rule.points[q]));
      const double w = rule.weights[q] * 0.5 * s.length();
      const Vec2 jump = jump_and_mean(v.evaluate(s.first, x).value, v.evaluate(s.second, x).value).jump;
      js += w * norm_sq(jump);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
        {
          const double jn = 0.5 * w * jump[a] * s.normal[b];
          if (jn == 0.0)
            continue;
          for (int k = 0; k < nt; ++k)
          {
            r1[(2 * a + b) * nt + k] += jn * tb.value(k, c1.to_reference(x));
            r2[(2 * a + b) * nt + k] += jn * tb.value(k, c2.to_reference(x));
          }
        }
    }
    jump_sq += js / s.h;
  }
  if (jump_sq <= 0.0)
    return 0.0;
  double lift_sq = 0.0;
  for (CellId id : mesh.active_cells())
  {
    const Cell &c = mesh.cell(id);
    const auto &rc = r[mesh.active_index(id)];
    for (int ab = 0; ab < 4; ++ab)
      for (int k = 0; k < nt; ++k)
        lift_sq += rc[ab * nt + k] * rc[ab * nt + k] / (tb.norm_sq(k) * 0.25 * c.area());
  }
  return lift_sq / jump_sq;
}

/// MatrixMarket coordinate export (general, real).
inline void write_matrix_market(std::ostream &os, const Eigen::SparseMatrix<double> &a)
{
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  os.precision(17);
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

} // namespace hdiv_afem
