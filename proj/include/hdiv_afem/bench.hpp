#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "afem.hpp"
#include "history_io.hpp"
#include "mesh.hpp"
#include "problems.hpp"

namespace hdiv_afem {

struct RunConfig
{
  std::string problem = "lshape"; // lshape | manufactured
  AfemConfig afem;
  std::filesystem::path out_dir = "out";
  bool vtk = false;
  bool compare = false; // also run the other refinement mode for plot_error.dat
  unsigned seed = 0;

  void validate() const
  {
    if (problem != "lshape" && problem != "manufactured")
      throw Error("unknown problem '" + problem + "'");
    afem.validate();
  }
};

inline Problem make_problem(const std::string &name)
{
  if (name == "lshape")
    return lshape_problem();
  if (name == "manufactured")
    return smooth_problem();
  throw Error("unknown problem '" + name + "'");
}

struct RunSummary
{
  AfemHistory history;
  double fitted_rate = 0.0; // over the last three levels (or all, if fewer)
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path &p)
{
  std::ofstream os(p);
  if (!os)
    throw Error("cannot write " + p.string());
  return os;
}

inline double tail_rate(const AfemHistory &h)
{
  const int n = static_cast<int>(h.rows.size());
  if (n < 2)
    return std::numeric_limits<double>::quiet_NaN();
  for (const LevelRecord &r : h.rows)
    if (!(r.error > 0.0))
      return std::numeric_limits<double>::quiet_NaN();
  return rate(h, std::max(0, n - 3));
}

} // namespace detail

/// Run one problem and write history.csv, history.json, plot_error.dat,
/// effectivity.dat, mesh_final.txt and, on request, mesh_L<k>.vtk into
/// cfg.out_dir.
inline RunSummary run_benchmark(const RunConfig &cfg, std::ostream *log = nullptr)
{
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Problem problem = make_problem(cfg.problem);

  std::string final_mesh;
  auto observer = [&](const LevelState &s) {
    const LevelRecord &r = s.record;
    if (log)
      *log << "level " << r.level << "  cells " << r.cells << "  dofs " << r.dofs << "  eta " << r.eta
           << "  error " << r.error << '\n';
    std::ostringstream m;
    s.solution.mesh->write(m);
    final_mesh = m.str();
    if (cfg.vtk)
    {
      auto os = detail::open_output(cfg.out_dir / ("mesh_L" + std::to_string(r.level) + ".vtk"));
      const auto div = cell_divergence_norms(s.solution);
      s.solution.mesh->write_vtk(os, {{"eta_sq", s.indicators.total_sq}, {"div_norm", div}});
    }
  };

  RunSummary out;
  out.history = run(cfg.afem, problem, observer);
  out.fitted_rate = detail::tail_rate(out.history);

  {
    auto os = detail::open_output(cfg.out_dir / "history.csv");
    write_history_csv(os, out.history);
  }
  {
    auto os = detail::open_output(cfg.out_dir / "history.json");
    write_history_json(os, out.history);
  }
  {
    auto os = detail::open_output(cfg.out_dir / "plot_error.dat");
    write_plot_block(os, out.history);
    if (cfg.compare)
    {
      AfemConfig other = cfg.afem;
      other.mode = cfg.afem.mode == RefinementMode::adaptive ? RefinementMode::uniform : RefinementMode::adaptive;
      os << "\n\n";
      write_plot_block(os, run(other, problem));
    }
  }
  {
    auto os = detail::open_output(cfg.out_dir / "effectivity.dat");
    os << "# level dofs effectivity\n";
    os.precision(17);
    for (const LevelRecord &r : out.history.rows)
    {
      os << r.level << ' ' << r.dofs << ' ';
      detail::put_real(os, r.effectivity);
      os << '\n';
    }
  }
  {
    auto os = detail::open_output(cfg.out_dir / "mesh_final.txt");
    os << final_mesh;
  }
  return out;
}

} // namespace hdiv_afem
