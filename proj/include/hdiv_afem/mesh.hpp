#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace hdiv_afem {

/// Axis-parallel rectangle [x0,x1] x [y0,y1].
struct Rect
{
  double x0, y0, x1, y1;
};

/// Local edge numbering of a cell. Left/right edges are vertical.
enum class EdgeSide
{
  left = 0,
  right = 1,
  bottom = 2,
  top = 3
};

enum class Orientation
{
  vertical,  // x = const
  horizontal // y = const
};

enum class FaceKind
{
  interior,
  boundary,
  irregular
};

/// Portion of a face covered by one cell edge (fine cells of an irregular face
/// cover one half each).
enum class FacePart
{
  full,
  lower,
  upper
};

struct Cell
{
  CellId id = invalid_id;
  Rect bounds{};
  int level = 0;
  CellId parent = invalid_id;
  std::array<CellId, 4> children{invalid_id, invalid_id, invalid_id, invalid_id};
  bool active = true;

  double width() const { return bounds.x1 - bounds.x0; }
  double height() const { return bounds.y1 - bounds.y0; }
  double area() const { return width() * height(); }
  /// h_T = |T|^{1/2}
  double h() const { return std::sqrt(area()); }
  Vec2 center() const { return {0.5 * (bounds.x0 + bounds.x1), 0.5 * (bounds.y0 + bounds.y1)}; }

  /// Physical point -> reference coordinates in [-1,1]^2.
  Vec2 to_reference(const Vec2 &p) const
  {
    return {2.0 * (p.x - bounds.x0) / width() - 1.0, 2.0 * (p.y - bounds.y0) / height() - 1.0};
  }
  Vec2 to_physical(const Vec2 &r) const
  {
    return {bounds.x0 + 0.5 * (r.x + 1.0) * width(), bounds.y0 + 0.5 * (r.y + 1.0) * height()};
  }
};

/// A mesh face. Vertical faces have `position` = x and extent [lo,hi] in y;
/// horizontal faces the other way round. `minus` holds the cells on the
/// left/lower side and `plus` those on the right/upper side; on an irregular
/// face the refined side lists its two cells ordered along the face.
struct Face
{
  FaceId id = invalid_id;
  Orientation orientation = Orientation::vertical;
  double position = 0.0;
  double lo = 0.0, hi = 0.0;
  FaceKind kind = FaceKind::interior;
  std::array<CellId, 2> minus{invalid_id, invalid_id};
  std::array<CellId, 2> plus{invalid_id, invalid_id};
  double h = 0.0;

  double length() const { return hi - lo; }
  Vec2 normal() const
  {
    return orientation == Orientation::vertical ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  }
  Vec2 point(double s) const
  {
    return orientation == Orientation::vertical ? Vec2{position, s} : Vec2{s, position};
  }
};

/// Piece of a face on which both adjacent traces are polynomial. Regular and
/// boundary faces have one sub-face, irregular faces two. `normal` is the
/// outward normal of `first`; `second` is invalid on the boundary.
struct SubFace
{
  FaceId face = invalid_id;
  Orientation orientation = Orientation::vertical;
  double position = 0.0;
  double lo = 0.0, hi = 0.0;
  CellId first = invalid_id;
  CellId second = invalid_id;
  Vec2 normal{};
  double h = 0.0;

  bool is_boundary() const { return second == invalid_id; }
  double length() const { return hi - lo; }
  Vec2 point(double s) const
  {
    return orientation == Orientation::vertical ? Vec2{position, s} : Vec2{s, position};
  }
  /// Parameter along the face of a reference coordinate t in [-1,1].
  double parameter(double t) const { return lo + 0.5 * (t + 1.0) * (hi - lo); }
};

struct CellEdge
{
  FaceId face = invalid_id;
  FacePart part = FacePart::full;
};

namespace detail {

inline Orientation edge_orientation(EdgeSide e)
{
  return (e == EdgeSide::left || e == EdgeSide::right) ? Orientation::vertical
                                                       : Orientation::horizontal;
}

/// Extent of a cell along (parallel to) the given edge.
inline double extent_along(const Cell &c, EdgeSide e)
{
  return edge_orientation(e) == Orientation::vertical ? c.height() : c.width();
}

/// Extent of a cell orthogonal to the given edge.
inline double extent_across(const Cell &c, EdgeSide e)
{
  return edge_orientation(e) == Orientation::vertical ? c.width() : c.height();
}

inline double overlap(double a0, double a1, double b0, double b1)
{
  return std::min(a1, b1) - std::max(a0, b0);
}

} // namespace detail

class Mesh;

struct RefineResult;

enum class Closure
{
  one_irregular,
  none // test hook: plain quad splits, may leave the mesh without faces
};

RefineResult refine(const Mesh &mesh, std::span<const CellId> marked,
                    Closure closure = Closure::one_irregular);

/// Quadtree forest of axis-parallel rectangles. Cell ids are persistent across
/// refinement; faces are rebuilt after every change.
class Mesh
{
public:
  Mesh() = default;

  /// Level-0 mesh from a conforming partition of a rectilinear domain.
  static Mesh build_initial(const std::vector<Rect> &cells)
  {
    if (cells.empty())
      throw Error("build_initial: empty cell list");
    double scale = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
      const Rect &r = cells[i];
      if (!(r.x0 < r.x1 && r.y0 < r.y1))
        throw Error("build_initial: cell " + std::to_string(i) + " is degenerate");
      scale = std::max({scale, r.x1 - r.x0, r.y1 - r.y0});
    }
    const double gap_tol = 1e-10 * scale;
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = i + 1; j < cells.size(); ++j)
        check_pair(cells[i], cells[j], static_cast<int>(i), static_cast<int>(j), gap_tol);

    Mesh m;
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
      Cell c;
      c.id = static_cast<CellId>(i);
      c.bounds = cells[i];
      m.cells_.push_back(c);
      m.n_roots_++;
    }
    m.rebuild();
    return m;
  }

  const std::vector<Cell> &cells() const { return cells_; }
  const Cell &cell(CellId id) const
  {
    if (id < 0 || id >= static_cast<CellId>(cells_.size()))
      throw Error("invalid cell id " + std::to_string(id));
    return cells_[id];
  }
  bool is_active(CellId id) const { return cell(id).active; }

  /// Active cell ids in increasing order.
  const std::vector<CellId> &active_cells() const { return active_; }
  int n_active() const { return static_cast<int>(active_.size()); }
  /// Position of an active cell in active_cells().
  int active_index(CellId id) const
  {
    const int k = active_index_.at(id);
    if (k < 0)
      throw Error("cell " + std::to_string(id) + " is not active");
    return k;
  }

  /// False only for meshes produced without closure; such meshes carry no faces.
  bool one_irregular() const { return one_irregular_; }
  const std::vector<Face> &faces() const { return faces_; }
  const std::vector<SubFace> &sub_faces() const { return sub_faces_; }
  const std::array<CellEdge, 4> &cell_edges(CellId id) const
  {
    active_index(id);
    return cell_edges_.at(id);
  }

  int n_roots() const { return n_roots_; }
  int max_level() const
  {
    int l = 0;
    for (CellId id : active_)
      l = std::max(l, cells_[id].level);
    return l;
  }

  double domain_area() const
  {
    double a = 0.0;
    for (int i = 0; i < n_roots_; ++i)
      a += cells_[i].area();
    return a;
  }

  /// Active cells sharing a positive-length piece of the given edge of `id`,
  /// ordered along the edge.
  std::vector<CellId> neighbors_across(CellId id, EdgeSide e) const
  {
    const Cell &t = cell(id);
    std::vector<CellId> out;
    for (int r = 0; r < n_roots_; ++r)
      collect_across(r, t, e, out);
    const bool vertical = detail::edge_orientation(e) == Orientation::vertical;
    std::sort(out.begin(), out.end(), [&](CellId a, CellId b) {
      return vertical ? cells_[a].bounds.y0 < cells_[b].bounds.y0
                      : cells_[a].bounds.x0 < cells_[b].bounds.x0;
    });
    return out;
  }

  /// omega_T: T together with every active cell sharing an edge with it.
  std::vector<CellId> patch(CellId id) const
  {
    if (!is_active(id))
      throw Error("patch: cell " + std::to_string(id) + " is not active");
    std::set<CellId> p{id};
    for (int e = 0; e < 4; ++e)
      for (CellId n : neighbors_across(id, static_cast<EdgeSide>(e)))
        p.insert(n);
    return {p.begin(), p.end()};
  }

  /// Active cell containing a point (closed cells, first match by id).
  CellId locate(const Vec2 &p) const
  {
    for (CellId id : active_)
    {
      const Rect &b = cells_[id].bounds;
      if (p.x >= b.x0 && p.x <= b.x1 && p.y >= b.y0 && p.y <= b.y1)
        return id;
    }
    return invalid_id;
  }

  /// Uniformly scaled copy (all coordinates multiplied by `factor`).
  Mesh scaled(double factor) const
  {
    Mesh m = *this;
    for (Cell &c : m.cells_)
      c.bounds = {c.bounds.x0 * factor, c.bounds.y0 * factor, c.bounds.x1 * factor,
                  c.bounds.y1 * factor};
    m.rebuild();
    return m;
  }

  void write(std::ostream &os) const
  {
    os << "# id x0 y0 x1 y1 level active\n";
    os << std::setprecision(17);
    for (const Cell &c : cells_)
      os << c.id << ' ' << c.bounds.x0 << ' ' << c.bounds.y0 << ' ' << c.bounds.x1 << ' '
         << c.bounds.y1 << ' ' << c.level << ' ' << (c.active ? 1 : 0) << '\n';
  }

  /// Inverse of write(); tree links are recovered from geometry.
  static Mesh read(std::istream &is)
  {
    Mesh m;
    std::string line;
    while (std::getline(is, line))
    {
      if (line.empty() || line[0] == '#')
        continue;
      std::istringstream ls(line);
      Cell c;
      int active = 0;
      if (!(ls >> c.id >> c.bounds.x0 >> c.bounds.y0 >> c.bounds.x1 >> c.bounds.y1 >> c.level >>
            active))
        throw Error("mesh read: malformed line '" + line + "'");
      if (c.id != static_cast<CellId>(m.cells_.size()))
        throw Error("mesh read: ids must be consecutive from 0");
      c.active = active != 0;
      m.cells_.push_back(c);
    }
    for (Cell &c : m.cells_)
    {
      if (c.level == 0)
      {
        if (c.id != m.n_roots_)
          throw Error("mesh read: level-0 cells must come first");
        m.n_roots_++;
        continue;
      }
      for (const Cell &p : m.cells_)
      {
        if (p.level != c.level - 1 || p.active)
          continue;
        const Vec2 cc = c.center();
        if (cc.x > p.bounds.x0 && cc.x < p.bounds.x1 && cc.y > p.bounds.y0 && cc.y < p.bounds.y1)
        {
          c.parent = p.id;
          const int q = (cc.x > p.center().x ? 1 : 0) + (cc.y > p.center().y ? 2 : 0);
          m.cells_[p.id].children[q] = c.id;
          break;
        }
      }
      if (c.parent == invalid_id)
        throw Error("mesh read: no parent for cell " + std::to_string(c.id));
    }
    m.rebuild();
    return m;
  }

  /// Legacy-VTK unstructured grid of the active cells with optional cell data.
  void write_vtk(std::ostream &os,
                 const std::map<std::string, std::vector<double>> &cell_data = {}) const
  {
    const int n = n_active();
    os << "# vtk DataFile Version 3.0\nhdiv_afem mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << 4 * n << " double\n" << std::setprecision(17);
    for (CellId id : active_)
    {
      const Rect &b = cells_[id].bounds;
      os << b.x0 << ' ' << b.y0 << " 0\n"
         << b.x1 << ' ' << b.y0 << " 0\n"
         << b.x1 << ' ' << b.y1 << " 0\n"
         << b.x0 << ' ' << b.y1 << " 0\n";
    }
    os << "CELLS " << n << ' ' << 5 * n << '\n';
    for (int k = 0; k < n; ++k)
      os << "4 " << 4 * k << ' ' << 4 * k + 1 << ' ' << 4 * k + 2 << ' ' << 4 * k + 3 << '\n';
    os << "CELL_TYPES " << n << '\n';
    for (int k = 0; k < n; ++k)
      os << "9\n";
    os << "CELL_DATA " << n << "\nSCALARS level int 1\nLOOKUP_TABLE default\n";
    for (CellId id : active_)
      os << cells_[id].level << '\n';
    for (const auto &[name, values] : cell_data)
    {
      if (static_cast<int>(values.size()) != n)
        throw Error("write_vtk: cell data '" + name + "' has wrong length");
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : values)
        os << v << '\n';
    }
  }

private:
  friend RefineResult refine(const Mesh &mesh, std::span<const CellId> marked, Closure closure);

  static void check_pair(const Rect &a, const Rect &b, int i, int j, double gap_tol)
  {
    const std::string pair = std::to_string(i) + " and " + std::to_string(j);
    const double ox = detail::overlap(a.x0, a.x1, b.x0, b.x1);
    const double oy = detail::overlap(a.y0, a.y1, b.y0, b.y1);
    if (ox > 0.0 && oy > 0.0)
      throw Error("build_initial: cells " + pair + " overlap");
    // facing edges: distance across, overlap along
    const auto check_edges = [&](double d, double along, double a0, double a1, double b0,
                                 double b1) {
      if (along <= 0.0)
        return;
      if (d == 0.0 && (a0 != b0 || a1 != b1))
        throw Error("build_initial: edge mismatch between cells " + pair);
      if (d > 0.0 && d < gap_tol)
        throw Error("build_initial: gap between cells " + pair);
    };
    check_edges(std::abs(b.x0 - a.x1), oy, a.y0, a.y1, b.y0, b.y1);
    check_edges(std::abs(a.x0 - b.x1), oy, a.y0, a.y1, b.y0, b.y1);
    check_edges(std::abs(b.y0 - a.y1), ox, a.x0, a.x1, b.x0, b.x1);
    check_edges(std::abs(a.y0 - b.y1), ox, a.x0, a.x1, b.x0, b.x1);
  }

  void collect_across(CellId node, const Cell &t, EdgeSide e, std::vector<CellId> &out) const
  {
    const Cell &c = cells_[node];
    const Rect &b = c.bounds;
    const Rect &r = t.bounds;
    bool touches = false;
    switch (e)
    {
    case EdgeSide::right:
      touches = b.x0 <= r.x1 && r.x1 < b.x1 && detail::overlap(b.y0, b.y1, r.y0, r.y1) > 0.0;
      break;
    case EdgeSide::left:
      touches = b.x0 < r.x0 && r.x0 <= b.x1 && detail::overlap(b.y0, b.y1, r.y0, r.y1) > 0.0;
      break;
    case EdgeSide::top:
      touches = b.y0 <= r.y1 && r.y1 < b.y1 && detail::overlap(b.x0, b.x1, r.x0, r.x1) > 0.0;
      break;
    case EdgeSide::bottom:
      touches = b.y0 < r.y0 && r.y0 <= b.y1 && detail::overlap(b.x0, b.x1, r.x0, r.x1) > 0.0;
      break;
    }
    if (!touches)
      return;
    if (c.active)
    {
      out.push_back(node);
      return;
    }
    for (CellId ch : c.children)
      collect_across(ch, t, e, out);
  }

  /// Split one active cell into its four quadrants, refining coarser edge
  /// neighbours first so the result stays one-irregular.
  void refine_balanced(CellId id, std::set<CellId> &refined, bool closure)
  {
    for (int e = 0; e < 4 && closure; ++e)
    {
      const auto side = static_cast<EdgeSide>(e);
      for (CellId n : neighbors_across(id, side))
        if (cells_[n].active &&
            detail::extent_along(cells_[n], side) > detail::extent_along(cells_[id], side))
          refine_balanced(n, refined, closure);
    }
    if (!cells_[id].active)
      return;
    const Rect b = cells_[id].bounds;
    const double xm = 0.5 * (b.x0 + b.x1);
    const double ym = 0.5 * (b.y0 + b.y1);
    const std::array<Rect, 4> quads{Rect{b.x0, b.y0, xm, ym}, Rect{xm, b.y0, b.x1, ym},
                                    Rect{b.x0, ym, xm, b.y1}, Rect{xm, ym, b.x1, b.y1}};
    for (int q = 0; q < 4; ++q)
    {
      Cell c;
      c.id = static_cast<CellId>(cells_.size());
      c.bounds = quads[q];
      c.level = cells_[id].level + 1;
      c.parent = id;
      cells_[id].children[q] = c.id;
      cells_.push_back(c);
    }
    cells_[id].active = false;
    refined.insert(id);
  }

  void rebuild()
  {
    active_.clear();
    active_index_.assign(cells_.size(), -1);
    for (const Cell &c : cells_)
      if (c.active)
      {
        active_index_[c.id] = static_cast<int>(active_.size());
        active_.push_back(c.id);
      }
    rebuild_faces();
  }

  void rebuild_faces()
  {
    one_irregular_ = true;
    faces_.clear();
    sub_faces_.clear();
    cell_edges_.assign(cells_.size(), {});
    for (CellId id : active_)
    {
      const Cell &t = cells_[id];
      for (int ei = 0; ei < 4; ++ei)
      {
        const auto e = static_cast<EdgeSide>(ei);
        const bool upper_side = (e == EdgeSide::right || e == EdgeSide::top);
        const auto nbrs = neighbors_across(id, e);
        Face f;
        f.orientation = detail::edge_orientation(e);
        const Rect &b = t.bounds;
        if (f.orientation == Orientation::vertical)
        {
          f.position = upper_side ? b.x1 : b.x0;
          f.lo = b.y0;
          f.hi = b.y1;
        }
        else
        {
          f.position = upper_side ? b.y1 : b.y0;
          f.lo = b.x0;
          f.hi = b.x1;
        }
        auto &own_side = upper_side ? f.minus : f.plus;
        auto &other_side = upper_side ? f.plus : f.minus;
        own_side[0] = id;

        if (nbrs.empty())
        {
          f.kind = FaceKind::boundary;
          f.h = detail::extent_across(t, e);
        }
        else if (nbrs.size() == 1)
        {
          const Cell &n = cells_[nbrs[0]];
          const double ln = detail::extent_along(n, e), lt = detail::extent_along(t, e);
          if (ln > lt)
            continue; // fine side of an irregular face, created from the coarse cell
          if (ln < lt)
            throw Error("mesh: neighbour of cell " + std::to_string(id) +
                        " does not cover its edge");
          if (!upper_side)
            continue; // regular face, created from its lower/left cell
          f.kind = FaceKind::interior;
          other_side[0] = n.id;
          f.h = std::min(detail::extent_across(t, e), detail::extent_across(n, e));
        }
        else if (nbrs.size() == 2)
        {
          const Cell &n0 = cells_[nbrs[0]];
          const Cell &n1 = cells_[nbrs[1]];
          const double lt = detail::extent_along(t, e);
          if (detail::extent_along(n0, e) * 2.0 != lt || detail::extent_along(n1, e) * 2.0 != lt)
            throw Error("mesh: irregular face of cell " + std::to_string(id) +
                        " is not split at its midpoint");
          f.kind = FaceKind::irregular;
          other_side = {n0.id, n1.id};
          // refined side
          f.h = std::min(detail::extent_across(n0, e), detail::extent_across(n1, e));
        }
        else
        {
          // only reachable through refine(..., Closure::none)
          faces_.clear();
          sub_faces_.clear();
          cell_edges_.assign(cells_.size(), {});
          one_irregular_ = false;
          return;
        }

        f.id = static_cast<FaceId>(faces_.size());
        faces_.push_back(f);
        register_face(faces_.back());
      }
    }
  }

  void register_face(const Face &f)
  {
    const bool vertical = f.orientation == Orientation::vertical;
    const EdgeSide minus_edge = vertical ? EdgeSide::right : EdgeSide::top;
    const EdgeSide plus_edge = vertical ? EdgeSide::left : EdgeSide::bottom;
    const auto assign = [&](const std::array<CellId, 2> &side, EdgeSide e) {
      if (side[0] == invalid_id)
        return;
      if (side[1] == invalid_id)
        cell_edges_[side[0]][static_cast<int>(e)] = {f.id, FacePart::full};
      else
      {
        cell_edges_[side[0]][static_cast<int>(e)] = {f.id, FacePart::lower};
        cell_edges_[side[1]][static_cast<int>(e)] = {f.id, FacePart::upper};
      }
    };
    assign(f.minus, minus_edge);
    assign(f.plus, plus_edge);

    const double mid = 0.5 * (f.lo + f.hi);
    const auto add = [&](double lo, double hi, CellId first, CellId second, Vec2 n) {
      SubFace s;
      s.face = f.id;
      s.orientation = f.orientation;
      s.position = f.position;
      s.lo = lo;
      s.hi = hi;
      s.first = first;
      s.second = second;
      s.normal = n;
      s.h = f.h;
      sub_faces_.push_back(s);
    };
    const Vec2 n = f.normal();
    if (f.kind == FaceKind::boundary)
    {
      if (f.minus[0] != invalid_id)
        add(f.lo, f.hi, f.minus[0], invalid_id, n);
      else
        add(f.lo, f.hi, f.plus[0], invalid_id, -1.0 * n);
    }
    else if (f.kind == FaceKind::interior)
      add(f.lo, f.hi, f.minus[0], f.plus[0], n);
    else
    {
      const bool minus_fine = f.minus[1] != invalid_id;
      for (int k = 0; k < 2; ++k)
      {
        const double lo = k == 0 ? f.lo : mid;
        const double hi = k == 0 ? mid : f.hi;
        add(lo, hi, minus_fine ? f.minus[k] : f.minus[0], minus_fine ? f.plus[0] : f.plus[k], n);
      }
    }
  }

  std::vector<Cell> cells_;
  int n_roots_ = 0;
  std::vector<CellId> active_;
  std::vector<int> active_index_;
  std::vector<Face> faces_;
  std::vector<SubFace> sub_faces_;
  std::vector<std::array<CellEdge, 4>> cell_edges_;
  bool one_irregular_ = true;
};

struct RefineResult
{
  Mesh mesh;
  /// Every cell split by this call: marked cells plus the closure.
  std::vector<CellId> refined;
};

/// Quad-refine the marked cells, adding the closure needed for one-irregularity.
inline RefineResult refine(const Mesh &mesh, std::span<const CellId> marked, Closure closure)
{
  for (CellId id : marked)
    if (!mesh.is_active(id))
      throw Error("refine: marked cell " + std::to_string(id) + " is not active");
  RefineResult r{mesh, {}};
  std::vector<CellId> order(marked.begin(), marked.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  std::set<CellId> refined;
  for (CellId id : order)
    if (r.mesh.cells_[id].active)
      r.mesh.refine_balanced(id, refined, closure == Closure::one_irregular);
  r.mesh.rebuild();
  r.refined.assign(refined.begin(), refined.end());
  return r;
}

/// Refine every active cell once.
inline Mesh refine_uniformly(const Mesh &mesh)
{
  return refine(mesh, mesh.active_cells()).mesh;
}

/// True if no cell edge is shared by more than two cells on the other side.
inline bool is_one_irregular(const Mesh &mesh)
{
  for (CellId id : mesh.active_cells())
    for (int e = 0; e < 4; ++e)
      if (mesh.neighbors_across(id, static_cast<EdgeSide>(e)).size() > 2)
        return false;
  return true;
}

/// The L-shaped domain (-1,1)^2 \ (0,1)^2 as three unit squares.
inline std::vector<Rect> lshape_cells()
{
  return {{-1.0, -1.0, 0.0, 0.0}, {0.0, -1.0, 1.0, 0.0}, {-1.0, 0.0, 0.0, 1.0}};
}

/// Uniform nx x ny partition of a rectangle.
inline std::vector<Rect> grid_cells(const Rect &box, int nx, int ny)
{
  std::vector<Rect> r;
  const double dx = (box.x1 - box.x0) / nx, dy = (box.y1 - box.y0) / ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      r.push_back({box.x0 + i * dx, box.y0 + j * dy, i + 1 == nx ? box.x1 : box.x0 + (i + 1) * dx,
                   j + 1 == ny ? box.y1 : box.y0 + (j + 1) * dy});
  return r;
}

} // namespace hdiv_afem
