#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "common.hpp"
#include "mesh.hpp"
#include "polynomial.hpp"
#include "quadrature.hpp"

namespace hdiv_afem {

/// Value, gradient, component-wise second derivatives and divergence of one
/// vector shape function at one point. `second(c,0)` is d^2 v_c/dx^2 and
/// `second(c,1)` is d^2 v_c/dy^2.
struct ShapeEval
{
  Vec2 value;
  Mat2 grad;
  Mat2 second;
  double div = 0.0;

  Vec2 laplacian() const { return {second(0, 0) + second(0, 1), second(1, 0) + second(1, 1)}; }
};

/// Raviart-Thomas element RT_m on the reference square: first component in
/// Q_{m+1,m}, second in Q_{m,m+1}. The basis is dual to the canonical node
/// functionals (Legendre moments of the normal component on each edge plus
/// interior moments).
///
/// Local numbering: m+1 moments on each of the left, right, bottom and top
/// edges (in that order), then m(m+1) interior moments of the first component
/// and m(m+1) of the second.
class RTElement
{
public:
  explicit RTElement(int order)
    : order_(order)
  {
    if (order < 0)
      throw Error("RTElement: order must be non-negative");
    const int m = order;
    // psi_b = L_b / |L_b|^2 is dual to the moments against L_b on P_m
    for (int b = 0; b <= m; ++b)
    {
      Polynomial p = legendre(b);
      p *= 1.0 / legendre_norm_sq(b);
      psi_.push_back(p);
    }
    // phi_a on P_{m+1} dual to {delta_-1, delta_+1, moments against L_0..L_{m-1}}
    const int n = m + 2;
    Eigen::MatrixXd functionals(n, n);
    const GaussRule1D g(m + 2);
    for (int j = 0; j < n; ++j)
    {
      functionals(0, j) = std::pow(-1.0, j);
      functionals(1, j) = 1.0;
      for (int i = 0; i < m; ++i)
      {
        const Polynomial li = legendre(i);
        double s = 0.0;
        for (int q = 0; q < g.size(); ++q)
          s += g.weights[q] * std::pow(g.points[q], j) * li(g.points[q]);
        functionals(2 + i, j) = s;
      }
    }
    const Eigen::MatrixXd inv = functionals.inverse();
    for (int a = 0; a < n; ++a)
    {
      std::vector<double> c(n);
      for (int j = 0; j < n; ++j)
        c[j] = inv(j, a);
      phi_.emplace_back(std::move(c));
    }
    for (auto *family : {&phi_, &psi_})
    {
      auto &d1 = family == &phi_ ? dphi_ : dpsi_;
      auto &d2 = family == &phi_ ? ddphi_ : ddpsi_;
      for (const Polynomial &p : *family)
      {
        d1.push_back(p.derivative());
        d2.push_back(p.derivative().derivative());
      }
    }

    const auto add = [&](int component, bool x_is_phi, int ix, int iy) {
      shapes_.push_back({component, x_is_phi, ix, iy});
    };
    for (int j = 0; j <= m; ++j)
      add(0, true, 0, j);
    for (int j = 0; j <= m; ++j)
      add(0, true, 1, j);
    for (int j = 0; j <= m; ++j)
      add(1, false, j, 0);
    for (int j = 0; j <= m; ++j)
      add(1, false, j, 1);
    for (int i = 0; i < m; ++i)
      for (int b = 0; b <= m; ++b)
        add(0, true, 2 + i, b);
    for (int a = 0; a <= m; ++a)
      for (int i = 0; i < m; ++i)
        add(1, false, a, 2 + i);
  }

  int order() const { return order_; }
  int n_dofs() const { return 2 * (order_ + 1) * (order_ + 2); }
  int dofs_per_face() const { return order_ + 1; }
  int n_interior_dofs() const { return 2 * order_ * (order_ + 1); }
  int face_dof(EdgeSide e, int j) const { return static_cast<int>(e) * (order_ + 1) + j; }

  /// Evaluate shape function `i` at reference point `r`.
  ShapeEval evaluate(int i, const Vec2 &r) const
  {
    const Shape &s = shapes_[i];
    const auto &fx = s.x_is_phi ? phi_ : psi_;
    const auto &dfx = s.x_is_phi ? dphi_ : dpsi_;
    const auto &ddfx = s.x_is_phi ? ddphi_ : ddpsi_;
    const auto &fy = s.x_is_phi ? psi_ : phi_;
    const auto &dfy = s.x_is_phi ? dpsi_ : dphi_;
    const auto &ddfy = s.x_is_phi ? ddpsi_ : ddphi_;
    const double vx = fx[s.ix](r.x), vy = fy[s.iy](r.y);
    const double dx = dfx[s.ix](r.x), dy = dfy[s.iy](r.y);
    ShapeEval e;
    const int c = s.component;
    e.value[c] = vx * vy;
    e.grad(c, 0) = dx * vy;
    e.grad(c, 1) = vx * dy;
    e.second(c, 0) = ddfx[s.ix](r.x) * vy;
    e.second(c, 1) = vx * ddfy[s.iy](r.y);
    e.div = e.grad(0, 0) + e.grad(1, 1);
    return e;
  }

  /// Trace of the normal component on an edge as a function of the edge
  /// coordinate: the normal trace of face dof j is psi_j.
  const Polynomial &face_trace(int j) const { return psi_[j]; }

private:
  struct Shape
  {
    int component;
    bool x_is_phi;
    int ix, iy;
  };

  int order_;
  std::vector<Polynomial> phi_, dphi_, ddphi_;
  std::vector<Polynomial> psi_, dpsi_, ddpsi_;
  std::vector<Shape> shapes_;
};

/// Tabulated RT_m shape functions at a set of reference points.
class RTBasis
{
public:
  RTBasis(int order, std::span<const Vec2> points)
    : element_(order)
    , points_(points.begin(), points.end())
  {
    const int n = element_.n_dofs();
    table_.resize(points_.size() * n);
    for (std::size_t q = 0; q < points_.size(); ++q)
      for (int i = 0; i < n; ++i)
        table_[q * n + i] = element_.evaluate(i, points_[q]);
  }

  int order() const { return element_.order(); }
  int n_dofs() const { return element_.n_dofs(); }
  int n_points() const { return static_cast<int>(points_.size()); }
  const std::vector<Vec2> &points() const { return points_; }
  const RTElement &element() const { return element_; }
  const ShapeEval &operator()(int q, int i) const { return table_[q * element_.n_dofs() + i]; }

private:
  RTElement element_;
  std::vector<Vec2> points_;
  std::vector<ShapeEval> table_;
};

inline RTBasis rt_basis(int order, std::span<const Vec2> points) { return RTBasis(order, points); }

/// Contravariant (Piola) transform of a reference evaluation to a rectangle
/// of size hx x hy: v = J v_hat / det J with J = diag(hx/2, hy/2).
inline ShapeEval piola(const ShapeEval &ref, double hx, double hy)
{
  const double sx = 2.0 / hx, sy = 2.0 / hy;
  const std::array<double, 2> scale{sy, sx}; // component c: J_cc / det J
  const std::array<double, 2> dscale{sx, sy};
  ShapeEval e;
  for (int c = 0; c < 2; ++c)
  {
    e.value[c] = scale[c] * ref.value[c];
    for (int d = 0; d < 2; ++d)
    {
      e.grad(c, d) = scale[c] * dscale[d] * ref.grad(c, d);
      e.second(c, d) = scale[c] * dscale[d] * dscale[d] * ref.second(c, d);
    }
  }
  e.div = sx * sy * ref.div;
  return e;
}

/// Physical evaluations of a tabulated basis on one cell.
inline std::vector<ShapeEval> map_to_cell(const RTBasis &basis, const Cell &cell)
{
  std::vector<ShapeEval> out;
  out.reserve(static_cast<std::size_t>(basis.n_points()) * basis.n_dofs());
  for (int q = 0; q < basis.n_points(); ++q)
    for (int i = 0; i < basis.n_dofs(); ++i)
      out.push_back(piola(basis(q, i), cell.width(), cell.height()));
  return out;
}

/// Q_{m,m} pressure shape functions L_i(x) L_j(y), numbered i + (m+1) j. The
/// constant is function 0, so the cell mean is coefficient 0.
class QBasis
{
public:
  explicit QBasis(int order)
    : order_(order)
  {
    if (order < 0)
      throw Error("QBasis: order must be non-negative");
    for (int k = 0; k <= order; ++k)
      legendre_.push_back(legendre(k));
  }

  int order() const { return order_; }
  int n_dofs() const { return (order_ + 1) * (order_ + 1); }
  double value(int k, const Vec2 &r) const
  {
    const int i = k % (order_ + 1), j = k / (order_ + 1);
    return legendre_[i](r.x) * legendre_[j](r.y);
  }
  /// Integral of the square of function k over the reference square.
  double norm_sq(int k) const
  {
    const int i = k % (order_ + 1), j = k / (order_ + 1);
    return legendre_norm_sq(i) * legendre_norm_sq(j);
  }

private:
  int order_;
  std::vector<Polynomial> legendre_;
};

struct DofEntry
{
  int global;
  double weight;
};

/// Global numbering of RT_m velocity and Q_{m,m} pressure unknowns.
///
/// Every face carries m+1 normal-moment unknowns (for irregular faces these
/// are the moments of the coarse side); each active cell adds its interior
/// velocity unknowns and its pressure unknowns. Local dofs on the fine side of
/// an irregular face are not unknowns: they are expressed through the coarse
/// moments, so each local dof maps to a short list of weighted globals.
class DofMap
{
public:
  int order() const { return order_; }
  /// Velocity unknowns after eliminating hanging dofs (boundary dofs included).
  int n_u() const { return n_u_; }
  int n_p() const { return n_p_; }
  int n_dofs() const { return n_u_ + n_p_; }
  int n_local_velocity() const { return n_local_u_; }
  int n_local_pressure() const { return n_local_p_; }
  int n_cells() const { return static_cast<int>(cell_ids_.size()); }
  CellId cell_id(int k) const { return cell_ids_[k]; }

  std::span<const DofEntry> velocity_dofs(int cell_index, int local) const
  {
    const std::size_t slot = static_cast<std::size_t>(cell_index) * n_local_u_ + local;
    return {entries_.data() + offsets_[slot], entries_.data() + offsets_[slot + 1]};
  }
  int pressure_dof(int cell_index, int local) const { return cell_index * n_local_p_ + local; }

  int face_dof(FaceId f, int j) const { return f * (order_ + 1) + j; }
  bool is_boundary(int global) const { return boundary_[global] != 0; }
  const std::vector<char> &boundary_mask() const { return boundary_; }

  /// (m+1)x(m+1) matrix expressing the fine-side moments on the lower (k=0)
  /// or upper (k=1) half of an edge through the coarse-side moments.
  const Eigen::MatrixXd &constraint(int half) const { return constraint_[half]; }

  /// Local velocity coefficients of one cell from a global vector.
  std::vector<double> local_velocity(int cell_index, std::span<const double> u) const
  {
    std::vector<double> c(n_local_u_, 0.0);
    for (int i = 0; i < n_local_u_; ++i)
      for (const DofEntry &d : velocity_dofs(cell_index, i))
        c[i] += d.weight * u[d.global];
    return c;
  }
  std::vector<double> local_pressure(int cell_index, std::span<const double> p) const
  {
    return {p.begin() + pressure_dof(cell_index, 0),
            p.begin() + pressure_dof(cell_index, 0) + n_local_p_};
  }

  int n_slave_local_dofs() const { return n_slaves_; }

  friend DofMap build_dofmap(const Mesh &mesh, int order);

private:
  int order_ = 0;
  int n_u_ = 0, n_p_ = 0;
  int n_local_u_ = 0, n_local_p_ = 0;
  int n_slaves_ = 0;
  std::vector<CellId> cell_ids_;
  std::vector<std::size_t> offsets_;
  std::vector<DofEntry> entries_;
  std::vector<char> boundary_;
  std::array<Eigen::MatrixXd, 2> constraint_;
};

/// Fine moments d_j = sum_k C_jk c_k on one half of a coarse edge, where the
/// coarse normal trace is sum_k c_k psi_k(s) in the coarse edge coordinate.
inline Eigen::MatrixXd hanging_constraint(int order, int half)
{
  const RTElement el(order);
  const GaussRule1D g(order + 2);
  Eigen::MatrixXd c(order + 1, order + 1);
  for (int j = 0; j <= order; ++j)
  {
    const Polynomial lj = legendre(j);
    for (int k = 0; k <= order; ++k)
    {
      double s = 0.0;
      for (int q = 0; q < g.size(); ++q)
      {
        const double t = g.points[q];
        const double coarse = half == 0 ? 0.5 * (t - 1.0) : 0.5 * (t + 1.0);
        s += g.weights[q] * el.face_trace(k)(coarse) * lj(t);
      }
      // the physical moment picks up |fine edge| / |coarse edge| = 1/2
      c(j, k) = 0.5 * s;
    }
  }
  return c;
}

inline DofMap build_dofmap(const Mesh &mesh, int order)
{
  if (order < 0)
    throw Error("build_dofmap: order must be non-negative");
  if (!mesh.one_irregular() || !is_one_irregular(mesh))
    throw Error("build_dofmap: mesh is not one-irregular");
  const RTElement el(order);
  DofMap d;
  d.order_ = order;
  d.n_local_u_ = el.n_dofs();
  d.n_local_p_ = (order + 1) * (order + 1);
  d.cell_ids_ = mesh.active_cells();
  d.constraint_ = {hanging_constraint(order, 0), hanging_constraint(order, 1)};

  const int per_face = order + 1;
  const int n_faces = static_cast<int>(mesh.faces().size());
  const int n_cells = mesh.n_active();
  d.n_u_ = n_faces * per_face + n_cells * el.n_interior_dofs();
  d.n_p_ = n_cells * d.n_local_p_;
  d.boundary_.assign(d.n_u_, 0);
  for (const Face &f : mesh.faces())
    if (f.kind == FaceKind::boundary)
      for (int j = 0; j < per_face; ++j)
        d.boundary_[d.face_dof(f.id, j)] = 1;

  d.offsets_.push_back(0);
  for (int k = 0; k < n_cells; ++k)
  {
    const CellId id = d.cell_ids_[k];
    const auto &edges = mesh.cell_edges(id);
    for (int e = 0; e < 4; ++e)
    {
      const CellEdge ce = edges[e];
      for (int j = 0; j < per_face; ++j)
      {
        if (ce.part == FacePart::full)
          d.entries_.push_back({d.face_dof(ce.face, j), 1.0});
        else
        {
          const auto &c = d.constraint_[ce.part == FacePart::lower ? 0 : 1];
          for (int kk = 0; kk < per_face; ++kk)
            if (c(j, kk) != 0.0)
              d.entries_.push_back({d.face_dof(ce.face, kk), c(j, kk)});
          d.n_slaves_++;
        }
        d.offsets_.push_back(d.entries_.size());
      }
    }
    const int interior0 = n_faces * per_face + k * el.n_interior_dofs();
    for (int i = 0; i < el.n_interior_dofs(); ++i)
    {
      d.entries_.push_back({interior0 + i, 1.0});
      d.offsets_.push_back(d.entries_.size());
    }
  }
  return d;
}

/// Evaluates a global velocity coefficient vector cell by cell.
class DiscreteVelocity
{
public:
  DiscreteVelocity(const Mesh &mesh, const DofMap &dofmap, std::span<const double> u)
    : mesh_(&mesh)
    , element_(dofmap.order())
  {
    if (static_cast<int>(u.size()) != dofmap.n_u())
      throw Error("DiscreteVelocity: coefficient vector has wrong length");
    local_.reserve(dofmap.n_cells());
    for (int k = 0; k < dofmap.n_cells(); ++k)
      local_.push_back(dofmap.local_velocity(k, u));
  }

  const Mesh &mesh() const { return *mesh_; }
  const RTElement &element() const { return element_; }
  const std::vector<double> &local(CellId id) const { return local_[mesh_->active_index(id)]; }

  /// Trace from cell `id` at physical point `x` (value, gradient, second derivatives).
  ShapeEval evaluate(CellId id, const Vec2 &x) const
  {
    const Cell &c = mesh_->cell(id);
    const Vec2 r = c.to_reference(x);
    const auto &coef = local(id);
    ShapeEval ref;
    for (int i = 0; i < element_.n_dofs(); ++i)
    {
      if (coef[i] == 0.0)
        continue;
      const ShapeEval e = element_.evaluate(i, r);
      ref.value += coef[i] * e.value;
      ref.grad += coef[i] * e.grad;
      ref.second += coef[i] * e.second;
      ref.div += coef[i] * e.div;
    }
    return piola(ref, c.width(), c.height());
  }

private:
  const Mesh *mesh_;
  RTElement element_;
  std::vector<std::vector<double>> local_;
};

} // namespace hdiv_afem
