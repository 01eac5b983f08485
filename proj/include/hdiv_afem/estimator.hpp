#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "assembly.hpp"
#include "common.hpp"
#include "fe_space.hpp"
#include "mesh.hpp"
#include "polynomial.hpp"
#include "quadrature.hpp"
#include "solver.hpp"

namespace hdiv_afem {

/// Gauss points per direction used by the estimator and the oscillation.
/// Both share the rule so that the discrete projections make osc <= eta exact.
inline int estimator_quadrature_points(int order) { return 2 * order + 2; }

/// Per-cell residual indicators, in active-cell order.
///
/// eta^2(T) = eta_T^2 + sum of eta_F^2 over the interior (sub-)faces of T;
/// every interior face therefore enters the global sum once per adjacent cell.
struct CellIndicators
{
  std::vector<CellId> cells;
  std::vector<double> cell_sq;
  std::vector<double> face_sq;
  std::vector<double> total_sq;
  double eta_sq = 0.0;

  double eta() const { return std::sqrt(eta_sq); }
  std::size_t size() const { return cells.size(); }

  void write_csv(std::ostream &os) const
  {
    os << "cell,eta_T_sq,eta_F_sq,total_sq\n";
    os.precision(17);
    for (std::size_t k = 0; k < cells.size(); ++k)
      os << cells[k] << ',' << cell_sq[k] << ',' << face_sq[k] << ',' << total_sq[k] << '\n';
  }
};

namespace detail {

// Local coefficients of the discrete velocity on one cell, tabulated at the
// reference points of `basis`.
inline ShapeEval tabulated_value(const RTBasis &basis, const std::vector<double> &coef, int q,
                                 const Cell &c)
{
  ShapeEval ref;
  for (int i = 0; i < basis.n_dofs(); ++i)
  {
    if (coef[i] == 0.0)
      continue;
    const ShapeEval &e = basis(q, i);
    ref.value += coef[i] * e.value;
    ref.grad += coef[i] * e.grad;
    ref.second += coef[i] * e.second;
    ref.div += coef[i] * e.div;
  }
  return piola(ref, c.width(), c.height());
}

// Normal-derivative jump (grad u1 - grad u2) n1 on an interior sub-face.
inline Vec2 normal_derivative_jump(const DiscreteVelocity &v, const SubFace &s, const Vec2 &x)
{
  const Mat2 g1 = v.evaluate(s.first, x).grad;
  const Mat2 g2 = v.evaluate(s.second, x).grad;
  return (g1 - g2) * s.normal;
}

} // namespace detail

/// eta_T = h_T |f0 + Laplacian u_k|_T and eta_F = h_F^{1/2} |[d_n u_k]|_F.
/// `f0` must be divergence free; it is used as given.
inline CellIndicators estimate(const FieldPair &uk, const VectorFunction &f0)
{
  const Mesh &mesh = *uk.mesh;
  const DofMap &dofs = *uk.dofmap;
  const int nq = estimator_quadrature_points(uk.order);
  const Quadrature quad(nq);
  const RTBasis basis(uk.order, quad.points);
  const DiscreteVelocity v = uk.velocity();

  CellIndicators out;
  const int n = mesh.n_active();
  out.cells = mesh.active_cells();
  out.cell_sq.assign(n, 0.0);
  out.face_sq.assign(n, 0.0);
  out.total_sq.assign(n, 0.0);

  for (int k = 0; k < n; ++k)
  {
    const Cell &c = mesh.cell(out.cells[k]);
    const auto coef = dofs.local_velocity(k, uk.u);
    double s = 0.0;
    for (int q = 0; q < quad.size(); ++q)
    {
      const ShapeEval e = detail::tabulated_value(basis, coef, q, c);
      const Vec2 r = f0(c.to_physical(quad.points[q])) + e.laplacian();
      s += quad.weights[q] * 0.25 * c.area() * norm_sq(r);
    }
    out.cell_sq[k] = c.area() * s;
  }

  const GaussRule1D rule(nq);
  for (const SubFace &s : mesh.sub_faces())
  {
    if (s.is_boundary())
      continue;
    double j = 0.0;
    for (int q = 0; q < rule.size(); ++q)
    {
      const Vec2 x = s.point(s.parameter(rule.points[q]));
      j += rule.weights[q] * 0.5 * s.length() * norm_sq(detail::normal_derivative_jump(v, s, x));
    }
    const double eta_f = s.h * j;
    out.face_sq[mesh.active_index(s.first)] += eta_f;
    out.face_sq[mesh.active_index(s.second)] += eta_f;
  }

  for (int k = 0; k < n; ++k)
  {
    out.total_sq[k] = out.cell_sq[k] + out.face_sq[k];
    out.eta_sq += out.total_sq[k];
  }
  return out;
}

/// Cell and face parts of the data oscillation. Faces are interior sub-faces
/// in mesh order, each counted once.
struct OscillationData
{
  std::vector<CellId> cells;
  std::vector<double> cell_sq;
  std::vector<double> face_sq;
  double osc_sq = 0.0;

  double osc() const { return std::sqrt(osc_sq); }
};

namespace detail {

// |r - Pi r|^2 on the reference square for the discrete L2 projection onto
// Q_{p,p} (per component) under the tensor rule `quad`; values[q] = r(x_q).
inline double projection_defect_2d(const Quadrature &quad, const std::vector<Vec2> &values, int p)
{
  if (p < 0)
  {
    double s = 0.0;
    for (int q = 0; q < quad.size(); ++q)
      s += quad.weights[q] * norm_sq(values[q]);
    return s;
  }
  const QBasis qb(p);
  const int nb = qb.n_dofs();
  std::vector<Vec2> coef(nb);
  std::vector<double> table(static_cast<std::size_t>(quad.size()) * nb);
  for (int q = 0; q < quad.size(); ++q)
    for (int b = 0; b < nb; ++b)
    {
      const double phi = qb.value(b, quad.points[q]);
      table[q * nb + b] = phi;
      coef[b] += (quad.weights[q] * phi / qb.norm_sq(b)) * values[q];
    }
  double s = 0.0;
  for (int q = 0; q < quad.size(); ++q)
  {
    Vec2 proj;
    for (int b = 0; b < nb; ++b)
      proj += table[q * nb + b] * coef[b];
    s += quad.weights[q] * norm_sq(values[q] - proj);
  }
  return s;
}

// Same on [-1,1] for projection onto P_p.
inline double projection_defect_1d(const GaussRule1D &rule, const std::vector<Vec2> &values, int p)
{
  std::vector<Vec2> coef(std::max(p + 1, 0));
  for (int b = 0; b <= p; ++b)
    for (int q = 0; q < rule.size(); ++q)
      coef[b] += (rule.weights[q] * legendre_value_and_derivative(b, rule.points[q]).first /
                  legendre_norm_sq(b)) *
                 values[q];
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q)
  {
    Vec2 proj;
    for (int b = 0; b <= p; ++b)
      proj += legendre_value_and_derivative(b, rule.points[q]).first * coef[b];
    s += rule.weights[q] * norm_sq(values[q] - proj);
  }
  return s;
}

} // namespace detail

/// osc^2 = sum_T h_T^2 |r - Pi^{2m-1} r|^2_T + sum_F h_F |j - Pi^{2m} j|^2_F with
/// r = f + Laplacian w and j = [d_n w].
inline OscillationData oscillation(const FieldPair &w, const VectorFunction &f)
{
  const Mesh &mesh = *w.mesh;
  const DofMap &dofs = *w.dofmap;
  const int m = w.order;
  const int nq = estimator_quadrature_points(m);
  const Quadrature quad(nq);
  const RTBasis basis(m, quad.points);
  const DiscreteVelocity v = w.velocity();

  OscillationData out;
  out.cells = mesh.active_cells();
  std::vector<Vec2> values(quad.size());
  for (int k = 0; k < mesh.n_active(); ++k)
  {
    const Cell &c = mesh.cell(out.cells[k]);
    const auto coef = dofs.local_velocity(k, w.u);
    for (int q = 0; q < quad.size(); ++q)
      values[q] = f(c.to_physical(quad.points[q])) + detail::tabulated_value(basis, coef, q, c).laplacian();
    const double s = c.area() * 0.25 * c.area() * detail::projection_defect_2d(quad, values, 2 * m - 1);
    out.cell_sq.push_back(s);
    out.osc_sq += s;
  }

  const GaussRule1D rule(nq);
  std::vector<Vec2> jumps(rule.size());
  for (const SubFace &s : mesh.sub_faces())
  {
    if (s.is_boundary())
      continue;
    for (int q = 0; q < rule.size(); ++q)
      jumps[q] = detail::normal_derivative_jump(v, s, s.point(s.parameter(rule.points[q])));
    const double o = s.h * 0.5 * s.length() * detail::projection_defect_1d(rule, jumps, 2 * m);
    out.face_sq.push_back(o);
    out.osc_sq += o;
  }
  return out;
}

/// Analytic velocity with its gradient. `singular` marks a point where the
/// gradient blows up; integrals over cells and faces touching it are
/// evaluated on geometrically graded subdivisions.
struct ExactVelocity
{
  VectorFunction value;
  TensorFunction grad;
  std::optional<Vec2> singular;
};

namespace detail {

inline bool same_point(const Vec2 &a, const Vec2 &b, double scale)
{
  return std::abs(a.x - b.x) <= 1e-12 * scale && std::abs(a.y - b.y) <= 1e-12 * scale;
}

// Calls fn(x, weight) for a Gauss rule on rectangle r, grading towards a
// singular vertex.
template <class Fn>
void integrate_rect(const Rect &r, const Quadrature &quad, const std::optional<Vec2> &singular,
                    Fn &&fn, int depth = 0)
{
  const double w = r.x1 - r.x0, h = r.y1 - r.y0;
  bool corner = false;
  if (singular && depth < 40)
    for (const Vec2 &v : {Vec2{r.x0, r.y0}, Vec2{r.x1, r.y0}, Vec2{r.x0, r.y1}, Vec2{r.x1, r.y1}})
      corner = corner || same_point(v, *singular, std::max(w, h));
  if (!corner)
  {
    for (int q = 0; q < quad.size(); ++q)
      fn(Vec2{r.x0 + 0.5 * (quad.points[q].x + 1.0) * w, r.y0 + 0.5 * (quad.points[q].y + 1.0) * h},
         quad.weights[q] * 0.25 * w * h);
    return;
  }
  const double xm = 0.5 * (r.x0 + r.x1), ym = 0.5 * (r.y0 + r.y1);
  const Rect parts[4] = {{r.x0, r.y0, xm, ym}, {xm, r.y0, r.x1, ym}, {r.x0, ym, xm, r.y1}, {xm, ym, r.x1, r.y1}};
  for (const Rect &p : parts)
    integrate_rect(p, quad, singular, fn, depth + 1);
}

// Same along the parameter interval [lo, hi] of a sub-face.
template <class Fn>
void integrate_segment(const SubFace &s, double lo, double hi, const GaussRule1D &rule,
                       const std::optional<Vec2> &singular, Fn &&fn, int depth = 0)
{
  const double len = hi - lo;
  bool end = false;
  if (singular && depth < 40)
    end = same_point(s.point(lo), *singular, len) || same_point(s.point(hi), *singular, len);
  if (!end)
  {
    for (int q = 0; q < rule.size(); ++q)
      fn(s.point(lo + 0.5 * (rule.points[q] + 1.0) * len), rule.weights[q] * 0.5 * len);
    return;
  }
  const double mid = 0.5 * (lo + hi);
  integrate_segment(s, lo, mid, rule, singular, fn, depth + 1);
  integrate_segment(s, mid, hi, rule, singular, fn, depth + 1);
}

} // namespace detail

/// Pieces of the error e = u - u_k measured on the current mesh.
struct ErrorReport
{
  double gradient_sq = 0.0; // sum_T |grad e|^2_T
  double jump_sq = 0.0;     // sum over interior F of h_F^{-1} |[u_k]|^2_F
  double gamma = 0.0;
  double a_ip = 0.0;        // unlifted interior-penalty form a(e, e), boundary faces included

  double dg_sq() const { return gradient_sq + gamma * jump_sq; }
  double dg() const { return std::sqrt(dg_sq()); }
  /// gamma |h_F^{-1/2} [u_k]|^2
  double jump_term() const { return gamma * jump_sq; }
};

/// DG-norm error and a(e,e) with `quad_points` Gauss points per direction
/// (default m+4).
inline ErrorReport error_report(const FieldPair &uk, const ExactVelocity &exact, double gamma,
                                int quad_points = -1)
{
  const Mesh &mesh = *uk.mesh;
  const int nq = quad_points > 0 ? quad_points : uk.order + 4;
  const Quadrature quad(nq);
  const GaussRule1D rule(nq);
  const DiscreteVelocity v = uk.velocity();

  ErrorReport out;
  out.gamma = gamma;
  for (CellId id : mesh.active_cells())
    detail::integrate_rect(mesh.cell(id).bounds, quad, exact.singular, [&](const Vec2 &x, double w) {
      out.gradient_sq += w * frobenius_sq(exact.grad(x) - v.evaluate(id, x).grad);
    });

  double face_terms = 0.0;
  for (const SubFace &s : mesh.sub_faces())
  {
    double jump = 0.0, consistency = 0.0;
    detail::integrate_segment(s, s.lo, s.hi, rule, exact.singular, [&](const Vec2 &x, double w) {
      const Mat2 gu = exact.grad(x);
      const Vec2 ux = exact.value(x);
      const ShapeEval e1 = v.evaluate(s.first, x);
      if (s.is_boundary())
      {
        const Vec2 e = ux - e1.value;
        jump += w * norm_sq(e);
        consistency += w * dot((gu - e1.grad) * s.normal, e);
      }
      else
      {
        const ShapeEval e2 = v.evaluate(s.second, x);
        const Vec2 je = e2.value - e1.value; // [u - u_k] = -[u_k]
        const Mat2 mean = 0.5 * ((gu - e1.grad) + (gu - e2.grad));
        jump += w * norm_sq(je);
        consistency += w * dot(mean * s.normal, je);
      }
    });
    if (!s.is_boundary())
      out.jump_sq += jump / s.h;
    face_terms += gamma * jump / s.h - 2.0 * consistency;
  }
  out.a_ip = out.gradient_sq + face_terms;
  return out;
}

/// |u - u_k|_{1,k}
inline double dg_error(const FieldPair &uk, const ExactVelocity &exact, double gamma, int quad_points = -1)
{
  return error_report(uk, exact, gamma, quad_points).dg();
}

/// eta / err; NaN when err is not positive.
inline double effectivity(double eta, double err)
{
  if (!(err > 0.0))
    return std::numeric_limits<double>::quiet_NaN();
  return eta / err;
}

} // namespace hdiv_afem
