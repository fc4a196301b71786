// Command-line front end: cell | fine | scaling | unfold-check | darcy.
#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "tpm/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 42;
  int workers = 1;
};

void add_common(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--config", a.config_path, "flat key = value config file");
  sub->add_option("--out", a.out_dir, "output directory");
  sub->add_option("--seed", a.seed, "RNG seed for generated fields");
  sub->add_option("--workers", a.workers, "concurrent solves where applicable")
      ->check(CLI::PositiveNumber);
}

int run(tpm::ExperimentKind kind, const CommonArgs& a) {
  const tpm::Config raw = a.config_path.empty()
                              ? tpm::Config::parse_string("")
                              : tpm::Config::parse_file(a.config_path);
  const tpm::ExperimentConfig cfg = tpm::ExperimentConfig::from_config(kind, raw);
  const tpm::RunContext ctx{a.out_dir, a.seed, a.workers};
  switch (kind) {
    case tpm::ExperimentKind::Cell: {
      const auto r = tpm::run_cell_study(cfg, ctx);
      std::printf("cell study: %zu rows -> %s/cell_study.csv\n", r.rows.size(),
                  a.out_dir.c_str());
      for (const auto& row : r.rows)
        std::printf("  h=%g  A11=%.8g A22=%.8g A12=%.3g  eig=[%.8g, %.8g]\n", row.h,
                    row.tensor.A(0, 0), row.tensor.A(1, 1), row.tensor.A(0, 1),
                    row.tensor.eig_min, row.tensor.eig_max);
      return 0;
    }
    case tpm::ExperimentKind::Fine: {
      const auto r = tpm::run_fine_solve(cfg, ctx);
      std::printf("fine solve eps=%g gamma=%g (%s): |u|=%.6g |D_eps u|=%.6g "
                  "|p|=%.6g flux_net=%.3g flux_l1=%.6g\n",
                  r.eps, r.gamma, tpm::regime_name(r.regime.kind), r.u_l2, r.deps_l2,
                  r.p_l2_meanadj, r.flux.net, r.flux.l1);
      double max_rel = 0;
      for (const auto& d : r.identities) max_rel = std::max(max_rel, d.corrected_rel);
      std::printf("  divergence identity (5 psi): max corrected rel %.3g\n", max_rel);
      return 0;
    }
    case tpm::ExperimentKind::Scaling: {
      const auto r = tpm::run_scaling_study(cfg, ctx);
      for (const auto& s : r.summaries)
        std::printf("gamma=%+g  ratio_u=%.3f ratio_D=%.3f ratio_p=%.3f  "
                    "slopes u=%.2f D=%.2f p=%.2f  %s\n",
                    s.gamma, s.ratio_u, s.ratio_deps, s.ratio_p, s.slope_u, s.slope_deps,
                    s.slope_p, s.bounded() ? "bounded" : "UNBOUNDED");
      return 0;
    }
    case tpm::ExperimentKind::UnfoldCheck: {
      const auto r = tpm::run_unfold_check(cfg, ctx);
      std::printf("unfold check: %zu identity rows, max rel %.3e, periodic spread "
                  "%.3e, boundary-average dev %.3e\n",
                  r.rows.size(), r.max_identity_rel, r.max_boundary_spread,
                  r.max_boundary_avg_dev);
      return r.max_identity_rel <= 1e-12 ? 0 : 1;
    }
    case tpm::ExperimentKind::Darcy: {
      const auto r = tpm::run_darcy(cfg, ctx);
      for (const auto& row : r.rows)
        std::printf("%s  gradp=(%g, %g) -> v'=(%.10g, %.10g)\n",
                    tpm::regime_name(row.regime.kind), row.grad_p[0], row.grad_p[1],
                    row.v[0], row.v[1]);
      return 0;
    }
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-scale Stokes homogenization toolkit for thin perforated domains"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* cell = app.add_subcommand("cell", "solve cell problems, assemble permeability");
  auto* fine = app.add_subcommand("fine", "rescaled fine Stokes solve at one eps");
  auto* scaling = app.add_subcommand("scaling", "norm scaling study over gamma and eps");
  auto* unfold = app.add_subcommand("unfold-check", "verify unfolding norm identities");
  auto* darcy = app.add_subcommand("darcy", "tabulate the effective Darcy laws");
  for (auto* sub : {cell, fine, scaling, unfold, darcy}) add_common(sub, args);

  CLI11_PARSE(app, argc, argv);
  try {
    if (cell->parsed()) return run(tpm::ExperimentKind::Cell, args);
    if (fine->parsed()) return run(tpm::ExperimentKind::Fine, args);
    if (scaling->parsed()) return run(tpm::ExperimentKind::Scaling, args);
    if (unfold->parsed()) return run(tpm::ExperimentKind::UnfoldCheck, args);
    if (darcy->parsed()) return run(tpm::ExperimentKind::Darcy, args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
