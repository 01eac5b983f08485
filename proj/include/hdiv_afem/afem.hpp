#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "common.hpp"
#include "estimator.hpp"
#include "fe_space.hpp"
#include "mesh.hpp"
#include "solver.hpp"

namespace hdiv_afem {

enum class RefinementMode
{
  adaptive,
  uniform
};

inline std::string to_string(RefinementMode m) { return m == RefinementMode::adaptive ? "adaptive" : "uniform"; }

inline RefinementMode parse_mode(const std::string &s)
{
  if (s == "adaptive")
    return RefinementMode::adaptive;
  if (s == "uniform")
    return RefinementMode::uniform;
  throw Error("unknown refinement mode '" + s + "' (expected adaptive or uniform)");
}

struct AfemConfig
{
  int order = 2;
  double theta = 0.5;
  std::optional<double> gamma; // default: IPParams::default_gamma(order)
  RefinementMode mode = RefinementMode::adaptive;
  int max_levels = 12;
  long max_dofs = 200000;
  int error_quadrature = 0; // Gauss points per direction for errors; 0 means m+4

  double gamma_value() const { return gamma ? *gamma : IPParams::default_gamma(order); }

  void validate() const
  {
    if (order < 1 || order > 8)
      throw Error("order must lie in [1, 8], got " + std::to_string(order));
    if (!(theta > 0.0 && theta < 1.0))
      throw Error("theta must lie in (0, 1), got " + std::to_string(theta));
    if (gamma && !(*gamma > 0.0))
      throw Error("gamma must be positive");
    if (max_levels < 1)
      throw Error("max_levels must be at least 1");
    if (max_dofs < 1)
      throw Error("max_dofs must be positive");
    if (error_quadrature < 0 || error_quadrature > 64)
      throw Error("error_quadrature must lie in [0, 64]");
  }
};

/// Data of a Stokes problem -Laplace u + grad p = f, div u = 0, u = g on the
/// boundary. `f0` is the divergence-free part of f used by the estimator.
struct Problem
{
  std::string name;
  VectorFunction f;
  VectorFunction f0;
  VectorFunction g;
  std::optional<ExactVelocity> exact;
  std::vector<Rect> initial_cells;
};

struct LevelRecord
{
  int level = 0;
  int cells = 0;
  long dofs = 0;
  double eta = 0.0;
  double error = std::numeric_limits<double>::quiet_NaN();
  double effectivity = std::numeric_limits<double>::quiet_NaN();
  double osc = 0.0;
  double Q = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  // diagnostics
  double a_ip = std::numeric_limits<double>::quiet_NaN();
  double jump_term = 0.0;
  double velocity_norm = 0.0;
  double max_divergence = 0.0;
  int max_cell_level = 0;
  int marked = 0;
};

struct AfemHistory
{
  std::vector<LevelRecord> rows;
  std::string problem;
  int order = 0;
  double theta = 0.0;
  double gamma = 0.0;
  RefinementMode mode = RefinementMode::adaptive;
  double rho = std::numeric_limits<double>::quiet_NaN(); // weight used for Q
  std::string stop_reason;
};

/// Minimal set M, by greedy descent on eta^2 with ties broken by cell id,
/// such that sum_M eta^2 >= theta^2 sum eta^2.
inline std::vector<CellId> dorfler_mark(std::span<const CellId> cells, std::span<const double> eta_sq,
                                        double theta)
{
  if (cells.size() != eta_sq.size())
    throw Error("dorfler_mark: size mismatch");
  if (!(theta > 0.0 && theta < 1.0))
    throw Error("dorfler_mark: theta must lie in (0, 1)");
  double total = 0.0;
  for (double e : eta_sq)
  {
    if (!std::isfinite(e) || e < 0.0)
      throw Error("dorfler_mark: indicators must be finite and non-negative");
    total += e;
  }
  if (total <= 0.0)
    return {};
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (eta_sq[a] != eta_sq[b])
      return eta_sq[a] > eta_sq[b];
    return cells[a] < cells[b];
  });
  const double target = theta * theta * total;
  std::vector<CellId> marked;
  double sum = 0.0;
  for (std::size_t k : order)
  {
    if (sum >= target)
      break;
    marked.push_back(cells[k]);
    sum += eta_sq[k];
  }
  return marked;
}

inline std::vector<CellId> dorfler_mark(const CellIndicators &ind, double theta)
{
  return dorfler_mark(ind.cells, ind.total_sq, theta);
}

/// Everything known about one solved level, handed to the observer of run().
struct LevelState
{
  const LevelRecord &record;
  const FieldPair &solution;
  const CellIndicators &indicators;
};

struct ContractionReport
{
  std::vector<double> rho;
  std::vector<double> max_ratio;
  double best_rho = 0.0;
  double best_ratio = 0.0;
  bool contracts = false;
};

/// 20 logarithmically spaced weights over [1e-3, 1e2] * error_0^2 / eta_0^2.
inline std::vector<double> default_rho_grid(const AfemHistory &h)
{
  if (h.rows.empty())
    throw Error("default_rho_grid: empty history");
  const double e0 = h.rows.front().error, eta0 = h.rows.front().eta;
  if (!(e0 > 0.0) || !(eta0 > 0.0))
    throw Error("default_rho_grid: needs positive error and estimator on the first level");
  const double base = e0 * e0 / (eta0 * eta0);
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i)
    grid.push_back(base * std::pow(10.0, -3.0 + 5.0 * i / 19.0));
  return grid;
}

/// For each rho the largest ratio of consecutive Q_k = a(e_k,e_k) + rho eta_k^2.
inline ContractionReport contraction_report(const AfemHistory &h, std::span<const double> rho_grid)
{
  if (h.rows.size() < 3)
    throw Error("contraction_report: need at least 3 levels");
  if (rho_grid.empty())
    throw Error("contraction_report: empty rho grid");
  for (const LevelRecord &r : h.rows)
    if (!std::isfinite(r.a_ip))
      throw Error("contraction_report: history lacks exact-solution errors");
  ContractionReport out;
  out.best_ratio = std::numeric_limits<double>::infinity();
  for (double rho : rho_grid)
  {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < h.rows.size(); ++k)
    {
      const double q0 = h.rows[k].a_ip + rho * h.rows[k].eta * h.rows[k].eta;
      const double q1 = h.rows[k + 1].a_ip + rho * h.rows[k + 1].eta * h.rows[k + 1].eta;
      worst = std::max(worst, q0 > 0.0 ? q1 / q0 : std::numeric_limits<double>::infinity());
    }
    out.rho.push_back(rho);
    out.max_ratio.push_back(worst);
    if (worst < out.best_ratio)
    {
      out.best_ratio = worst;
      out.best_rho = rho;
    }
  }
  out.contracts = out.best_ratio < 1.0;
  return out;
}

/// Fill Q and the consecutive ratio of every row with weight rho.
inline void apply_rho(AfemHistory &h, double rho)
{
  h.rho = rho;
  for (std::size_t k = 0; k < h.rows.size(); ++k)
  {
    LevelRecord &r = h.rows[k];
    r.Q = r.a_ip + rho * r.eta * r.eta;
    r.ratio = k == 0 ? std::numeric_limits<double>::quiet_NaN() : r.Q / h.rows[k - 1].Q;
  }
}

/// Least-squares rate r in error ~ dofs^{-r}.
inline double rate(std::span<const double> dofs, std::span<const double> error)
{
  if (dofs.size() != error.size() || dofs.size() < 2)
    throw Error("rate: need at least two matching points");
  const double n = static_cast<double>(dofs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < dofs.size(); ++i)
  {
    if (!(error[i] > 0.0) || !(dofs[i] > 0.0))
      throw Error("rate: errors and DOF counts must be positive");
    const double x = std::log(dofs[i]), y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0.0)
    throw Error("rate: DOF counts must differ");
  return -(n * sxy - sx * sy) / den;
}

/// Rate over rows [first, last) of the history; last < 0 means the end.
inline double rate(const AfemHistory &h, int first, int last = -1)
{
  const int end = last < 0 ? static_cast<int>(h.rows.size()) : last;
  if (first < 0 || end > static_cast<int>(h.rows.size()) || end - first < 2)
    throw Error("rate: window must contain at least two rows");
  std::vector<double> d, e;
  for (int k = first; k < end; ++k)
  {
    d.push_back(static_cast<double>(h.rows[k].dofs));
    e.push_back(h.rows[k].error);
  }
  return rate(d, e);
}

/// SOLVE -> ESTIMATE -> MARK -> REFINE until a stop rule fires.
inline AfemHistory run(const AfemConfig &cfg, const Problem &problem,
                       const std::function<void(const LevelState &)> &observer = {})
{
  cfg.validate();
  if (!problem.f || !problem.g)
    throw Error("run: problem needs a forcing and boundary data");
  const VectorFunction f0 = problem.f0 ? problem.f0 : problem.f;
  const IPParams params{cfg.gamma_value(), cfg.order};

  AfemHistory h;
  h.problem = problem.name;
  h.order = cfg.order;
  h.theta = cfg.theta;
  h.gamma = params.gamma;
  h.mode = cfg.mode;

  auto mesh = std::make_shared<const Mesh>(Mesh::build_initial(problem.initial_cells));
  for (int level = 0;; ++level)
  {
    auto dofs = std::make_shared<const DofMap>(build_dofmap(*mesh, cfg.order));
    if (level > 0 && dofs->n_dofs() > cfg.max_dofs)
    {
      h.stop_reason = "max_dofs";
      break;
    }
    FieldPair fp;
    try
    {
      fp = solve(assemble(mesh, dofs, params, problem.f, problem.g));
    }
    catch (const Error &e)
    {
      throw Error("level " + std::to_string(level) + ": " + e.what());
    }
    const CellIndicators ind = estimate(fp, f0);
    const OscillationData osc = oscillation(fp, problem.f);
    const DiscreteVelocity v = fp.velocity();

    LevelRecord r;
    r.level = level;
    r.cells = mesh->n_active();
    r.dofs = dofs->n_dofs();
    r.eta = ind.eta();
    r.osc = osc.osc();
    r.max_cell_level = mesh->max_level();
    const DGNormParts vn = dg_norm_parts(*mesh, broken_field(v), cfg.order + 2);
    r.velocity_norm = vn.norm(params.gamma);
    r.jump_term = params.gamma * vn.jump_sq;
    for (double d : cell_divergence_norms(fp))
      r.max_divergence = std::max(r.max_divergence, d);
    if (problem.exact)
    {
      const ErrorReport er = error_report(fp, *problem.exact, params.gamma,
                                          cfg.error_quadrature > 0 ? cfg.error_quadrature : -1);
      r.error = er.dg();
      r.a_ip = er.a_ip;
      r.effectivity = effectivity(r.eta, r.error);
    }

    std::vector<CellId> marked;
    const bool last_level = level + 1 >= cfg.max_levels;
    const bool converged = r.eta <= 1e-10 * std::max(1.0, r.velocity_norm);
    if (!last_level && !converged)
      marked = cfg.mode == RefinementMode::uniform ? mesh->active_cells() : dorfler_mark(ind, cfg.theta);
    r.marked = static_cast<int>(marked.size());
    h.rows.push_back(r);
    if (observer)
      observer(LevelState{h.rows.back(), fp, ind});

    if (converged || (!last_level && marked.empty()))
    {
      h.stop_reason = "converged";
      break;
    }
    if (last_level)
    {
      h.stop_reason = "max_levels";
      break;
    }
    mesh = std::make_shared<const Mesh>(refine(*mesh, marked).mesh);
  }

  if (problem.exact && h.rows.size() >= 3 && h.rows.front().error > 0.0 && h.rows.front().eta > 0.0)
  {
    const auto grid = default_rho_grid(h);
    apply_rho(h, contraction_report(h, grid).best_rho);
  }
  return h;
}

} // namespace hdiv_afem
