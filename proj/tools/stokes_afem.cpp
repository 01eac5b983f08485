// Command-line driver: L-shape benchmark, smooth manufactured problem and a
// one-irregularity fuzzer.

#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include <hdiv_afem/bench.hpp>

namespace {

using namespace hdiv_afem;

int fuzz(unsigned seed, int runs, int steps)
{
  std::mt19937 rng(seed);
  int bad = 0;
  for (int r = 0; r < runs; ++r)
  {
    Mesh mesh = Mesh::build_initial(lshape_cells());
    for (int s = 0; s < steps; ++s)
    {
      const auto &active = mesh.active_cells();
      std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
      std::vector<CellId> marked{active[pick(rng)]};
      mesh = refine(mesh, marked).mesh;
      if (!is_one_irregular(mesh))
      {
        ++bad;
        std::cout << "run " << r << " step " << s << ": mesh is not one-irregular\n";
        break;
      }
    }
  }
  std::cout << runs - bad << " of " << runs << " random refinement sequences stayed one-irregular\n";
  return bad == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Adaptive divergence-conforming interior-penalty Stokes solver"};
  app.set_config("--config", "", "Flat key=value file mirroring the flags; flags given on the command line win");
  app.require_subcommand(1);

  RunConfig cfg;
  int order = cfg.afem.order;
  double theta = cfg.afem.theta;
  std::string gamma = "auto";
  std::string mode = "adaptive";
  int fuzz_runs = 50, fuzz_steps = 40;

  app.add_option("--order", order, "Raviart-Thomas order m")->capture_default_str();
  app.add_option("--theta", theta, "Doerfler parameter in (0,1)")->capture_default_str();
  app.add_option("--gamma", gamma, "Penalty parameter or 'auto' for 4(m+1)(m+2)")->capture_default_str();
  app.add_option("--mode", mode, "adaptive or uniform")->capture_default_str();
  app.add_option("--max-levels", cfg.afem.max_levels, "Maximum number of solved levels")->capture_default_str();
  app.add_option("--max-dofs", cfg.afem.max_dofs, "Stop before a level exceeding this many DOFs")->capture_default_str();
  app.add_option("--error-quadrature", cfg.afem.error_quadrature,
                 "Gauss points per direction for errors (0: m+4)")
    ->capture_default_str();
  app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--vtk", cfg.vtk, "Write mesh_L<k>.vtk for every level");
  app.add_flag("--compare", cfg.compare, "Also run the other refinement mode into plot_error.dat");
  app.add_option("--seed", cfg.seed, "Seed for randomized runs (fuzz)")->capture_default_str();
  app.add_option("--runs", fuzz_runs, "Number of fuzz sequences")->capture_default_str();
  app.add_option("--steps", fuzz_steps, "Refinements per fuzz sequence")->capture_default_str();

  auto *lshape = app.add_subcommand("lshape", "L-shaped domain benchmark with a corner singularity");
  auto *manufactured = app.add_subcommand("manufactured", "Smooth manufactured solution on the unit square");
  auto *fuzzer = app.add_subcommand("fuzz", "Random refinement sequences checked for one-irregularity");
  for (auto *s : {lshape, manufactured, fuzzer})
    s->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (fuzzer->parsed())
      return fuzz(cfg.seed, fuzz_runs, fuzz_steps);

    cfg.problem = lshape->parsed() ? "lshape" : "manufactured";
    cfg.afem.order = order;
    cfg.afem.theta = theta;
    cfg.afem.mode = parse_mode(mode);
    if (gamma != "auto")
    {
      std::size_t used = 0;
      try
      {
        cfg.afem.gamma = std::stod(gamma, &used);
      }
      catch (const std::exception &)
      {
        used = 0;
      }
      if (used != gamma.size())
        throw Error("--gamma expects a number or 'auto', got '" + gamma + "'");
    }

    const RunSummary s = run_benchmark(cfg, &std::cout);
    std::cout << "stop: " << s.history.stop_reason << '\n';
    if (std::isfinite(s.history.rho))
      std::cout << "contraction weight rho: " << s.history.rho << '\n';
    std::cout << "fitted rate (last levels): " << s.fitted_rate << '\n';
    std::cout << "outputs written to " << cfg.out_dir.string() << '\n';
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
