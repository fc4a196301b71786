#include "tpm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "tpm/csv.hpp"
#include "tpm/errors.hpp"
#include "tpm/vtk.hpp"

namespace tpm {

namespace {

std::mutex g_io_mutex;

uint64_t mix_seed(uint64_t s, uint64_t salt) {
  uint64_t z = s + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::Vector2d get_vec2(const Config& cfg, const std::string& key,
                         const Eigen::Vector2d& fallback) {
  const auto v = cfg.get_number_list(key, {fallback[0], fallback[1]});
  if (v.size() != 2) throw ConfigError(key + " needs exactly two numbers");
  return {v[0], v[1]};
}

int eps_denominator(double eps) {
  const double q = 1.0 / eps;
  const double r = std::round(q);
  if (!(eps > 0) || r < 1 || std::abs(q - r) > 1e-9 * std::max(1.0, q))
    throw ConfigError("eps must be of the form 1/n, got " + format_double(eps));
  return static_cast<int>(r);
}

std::string regime_label(const ExperimentConfig& cfg, double gamma) {
  switch (cfg.kind) {
    case ExperimentKind::Cell: return "highgamma";
    case ExperimentKind::UnfoldCheck: return "na";
    default: return regime_name(classify_regime(gamma).kind);
  }
}

}  // namespace

const char* experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Cell: return "cell";
    case ExperimentKind::Fine: return "fine";
    case ExperimentKind::Scaling: return "scaling";
    case ExperimentKind::UnfoldCheck: return "unfold-check";
    case ExperimentKind::Darcy: return "darcy";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_config(ExperimentKind kind, const Config& cfg) {
  ExperimentConfig e;
  e.kind = kind;
  e.config_hash = cfg.hash_hex();

  const std::string shape = cfg.get_string("geometry.shape", "square");
  const double size = cfg.get_number("geometry.size", 0.5);
  if (shape == "square") e.shape = ObstacleShape::square(size);
  else if (shape == "disk") e.shape = ObstacleShape::disk(size);
  else if (shape == "none") e.shape = ObstacleShape::none();
  else throw ConfigError("geometry.shape must be square|disk|none");
  e.shape.validate();
  {
    const auto o = cfg.get_number_list("geometry.omega", {0, 0, 1, 1});
    if (o.size() != 4) throw ConfigError("geometry.omega needs x0 y0 x1 y1");
    e.omega = Rect{o[0], o[1], o[2], o[3]};
    if (!(e.omega.width() > 0) || !(e.omega.height() > 0))
      throw ConfigError("geometry.omega must be a nonempty rectangle");
  }

  e.h_list = cfg.get_number_list("numerics.h", e.h_list);
  for (double h : e.h_list)
    if (!(h > 0) || h > 0.5) throw ConfigError("numerics.h entries must lie in (0, 1/2]");
  e.cell_layers = cfg.get_int("numerics.cell_layers", 0);
  e.cells_per_eps = cfg.get_int("numerics.cells_per_eps", 4);
  e.layers = cfg.get_int("numerics.layers", 8);
  if (e.cells_per_eps < 1 || e.layers < 1 || e.cell_layers < 0)
    throw ConfigError("mesh resolutions must be positive");
  e.delta = cfg.get_number("numerics.delta", 0.1);
  if (!(e.delta > 0)) throw ConfigError("numerics.delta must be positive");
  e.solver_tol = cfg.get_number("numerics.solver_tol", 1e-9);

  e.mu = cfg.get_number("physics.mu", 1.0);
  e.alpha = cfg.get_number("physics.alpha", 1.0);
  if (!(e.mu > 0) || !(e.alpha > 0))
    throw ConfigError("physics.mu and physics.alpha must be positive");
  e.gamma = cfg.get_number("physics.gamma", 0.0);
  e.gamma_list = cfg.get_number_list("physics.gamma_list", e.gamma_list);
  e.f_prime = get_vec2(cfg, "physics.f_prime", e.f_prime);
  e.f_scaled = cfg.get_bool("physics.f_scaled", true);
  e.g.constant = get_vec2(cfg, "physics.g", {0, 0});
  const std::string gtable = cfg.get_string("physics.g_table", "");
  if (!gtable.empty()) e.g = load_surface_table(gtable);

  e.eps_value = cfg.get_number("eps.value", e.eps_value);
  e.eps_list = cfg.get_number_list("eps.list", e.eps_list);
  eps_denominator(e.eps_value);
  for (double ep : e.eps_list) eps_denominator(ep);

  e.unfold_fields = cfg.get_int("unfold.fields", 10);
  if (e.unfold_fields < 1) throw ConfigError("unfold.fields must be >= 1");

  {
    const auto gp = cfg.get_number_list("darcy.gradp", {1, 0});
    if (gp.size() % 2 != 0) throw ConfigError("darcy.gradp needs pairs of numbers");
    e.gradp_list.clear();
    for (size_t i = 0; i + 1 < gp.size(); i += 2)
      e.gradp_list.push_back({gp[i], gp[i + 1]});
  }
  e.permeability_csv = cfg.get_string("darcy.permeability_csv", "");
  if (const auto a = cfg.get_number_list("darcy.permeability", {}); !a.empty()) {
    if (a.size() != 4) throw ConfigError("darcy.permeability needs a11 a12 a21 a22");
    Eigen::Matrix2d A;
    A << a[0], a[1], a[2], a[3];
    e.permeability = A;
  }

  e.write_vtk = cfg.get_bool("output.vtk", false);
  cfg.require_all_consumed();
  return e;
}

SurfaceForcing load_surface_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open g table: " + path);
  SurfaceForcing g;
  std::vector<Eigen::Vector2d> table;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string a, b;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) throw ConfigError("g table row needs two numbers");
    std::string extra;
    if (ls >> extra) throw ConfigError("g table row has trailing tokens");
    table.push_back({Config::parse_number(a), Config::parse_number(b)});
  }
  if (table.empty()) throw ConfigError("g table is empty: " + path);
  g.facet_table = std::move(table);
  return g;
}

void write_text_file(const std::string& dir, const std::string& name,
                     const std::string& text) {
  if (dir.empty()) return;
  std::lock_guard<std::mutex> lock(g_io_mutex);
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string());
  os << text;
  if (!os) throw Error("write failed: " + path.string());
}

// ---- cell study ----

CellStudyResult run_cell_study(const ExperimentConfig& cfg, const RunContext& ctx) {
  const UnitCell cell = build_unit_cell(cfg.shape);
  CellStudyResult out;
  CsvTable csv({"config_hash", "regime", "shape", "size", "h", "layers", "fluid_volume",
                "area_analytic", "perimeter_analytic", "area_staircase",
                "perimeter_staircase", "A11", "A12", "A21", "A22", "eig_min", "eig_max",
                "asymmetry", "energy_load_gap_raw", "energy_load_gap_weakform", "div_w1",
                "div_w2", "residual_w1", "residual_w2"});
  auto flush = [&] {
    out.csv = csv.str();
    write_text_file(ctx.out_dir, "cell_study.csv", out.csv);
  };
  AssembleOptions opts;
  opts.delta = cfg.delta;
  for (size_t ih = 0; ih < cfg.h_list.size(); ++ih) {
    const double h = cfg.h_list[ih];
    try {
      auto mesh = std::make_shared<Mesh>(build_cell_mesh_3d(cell, h, cfg.cell_layers));
      const CellSolution s1 = solve_cell_problem(mesh, 1, opts);
      const CellSolution s2 = solve_cell_problem(mesh, 2, opts);
      const PermeabilityTensor t = assemble_permeability(s1, s2);
      CellStudyRow row{h,
                       mesh->nc[2],
                       t,
                       mesh->obstacle_area_measured,
                       mesh->obstacle_perimeter_measured,
                       1.0 - cell.fluid_area,
                       cell.obstacle_perimeter};
      out.rows.push_back(row);
      csv.row()
          .add(cfg.config_hash)
          .add(regime_label(cfg, 1.0))
          .add(cfg.shape.kind_name())
          .add(cfg.shape.size)
          .add(h)
          .add(mesh->nc[2])
          .add(t.volume)
          .add(row.analytic_area)
          .add(row.analytic_perimeter)
          .add(row.staircase_area)
          .add(row.staircase_perimeter)
          .add(t.A(0, 0))
          .add(t.A(0, 1))
          .add(t.A(1, 0))
          .add(t.A(1, 1))
          .add(t.eig_min)
          .add(t.eig_max)
          .add(t.provenance.asymmetry)
          .add(t.provenance.energy_load_gap_raw)
          .add(t.provenance.energy_load_gap_weakform)
          .add(t.provenance.div_norm[0])
          .add(t.provenance.div_norm[1])
          .add(t.provenance.residual[0])
          .add(t.provenance.residual[1]);
      if (cfg.write_vtk && !ctx.out_dir.empty()) {
        const int denom = static_cast<int>(std::llround(1.0 / h));
        VtkWriter w;
        w.add("w1", s1.sol.velocity);
        w.add("q1", s1.sol.pressure);
        w.add("w2", s2.sol.velocity);
        w.add("q2", s2.sol.pressure);
        std::lock_guard<std::mutex> lock(g_io_mutex);
        std::filesystem::create_directories(ctx.out_dir);
        w.write((std::filesystem::path(ctx.out_dir) /
                 ("cell_fields_h" + std::to_string(denom) + ".vtk"))
                    .string(),
                *mesh);
      }
    } catch (...) {
      flush();  // keep completed rows on disk
      throw;
    }
  }
  flush();
  return out;
}

// ---- fine solve ----

namespace {

struct FineSetup {
  MeshPtr mesh;
  SaddleSystem sys;
};

FineSetup fine_setup(const ExperimentConfig& cfg, double gamma, double eps) {
  const UnitCell cell = build_unit_cell(cfg.shape);
  const PerforatedDomain dom = build_perforated_domain(eps, cell, cfg.omega);
  const double h = eps / cfg.cells_per_eps;
  FineSetup s;
  s.mesh = std::make_shared<Mesh>(build_mesh(dom, h, cfg.layers));
  BoundaryConditionSpec bc;
  bc.robin.alpha = cfg.alpha;
  bc.robin.gamma = gamma;
  bc.robin.g = cfg.g;
  const Eigen::Vector2d f = cfg.f_scaled ? Eigen::Vector2d(cfg.f_prime / eps) : cfg.f_prime;
  AssembleOptions opts;
  opts.delta = cfg.delta;
  s.sys = assemble_system(s.mesh, bc, cfg.mu, eps, f, opts);
  return s;
}

FineResult fine_solve_one(const ExperimentConfig& cfg, double gamma, double eps,
                          uint64_t seed) {
  FineSetup s = fine_setup(cfg, gamma, eps);
  FineResult r;
  r.eps = eps;
  r.gamma = gamma;
  r.regime = classify_regime(gamma);
  r.mesh = s.mesh;
  r.sol = solve_saddle(s.sys);
  if (r.sol.diag.residual > cfg.solver_tol)
    throw SingularSystem("fine solve residual " + format_double(r.sol.diag.residual));
  r.u_l2 = norm_lp(r.sol.velocity, 2);
  r.deps_l2 = seminorm_deps_lp(r.sol.velocity, eps, 2);
  Field p_adj = r.sol.pressure;
  const double pmean = region_average(p_adj)[0];
  for (double& x : p_adj.v) x -= pmean;
  r.p_l2_meanadj = norm_lp(p_adj, 2);
  r.flux = obstacle_flux_report(r.sol, s.sys);
  r.energy = energy_identity(s.sys, r.sol);
  for (int ipsi = 0; ipsi < 5; ++ipsi) {
    const Field psi = random_field(s.mesh, 1, mix_seed(seed, 1000 + ipsi), true);
    r.identities.push_back(divergence_identity(s.sys, r.sol, psi));
  }
  return r;
}

}  // namespace

FineResult run_fine_solve(const ExperimentConfig& cfg, const RunContext& ctx) {
  FineResult r = fine_solve_one(cfg, cfg.gamma, cfg.eps_value, ctx.seed);

  CsvTable csv({"config_hash", "regime", "gamma", "eps", "h", "layers", "alpha", "mu",
                "f1", "f2", "f_scaled", "u_l2", "deps_u_l2", "p_l2_meanadj", "flux_net",
                "flux_l1", "flux_max_cylinder", "flux_sum_abs_cylinder", "div_norm",
                "energy_gap_rel", "pressure_mean_shift", "residual"});
  csv.row()
      .add(cfg.config_hash)
      .add(regime_label(cfg, cfg.gamma))
      .add(cfg.gamma)
      .add(r.eps)
      .add(r.mesh->h[0])
      .add(cfg.layers)
      .add(cfg.alpha)
      .add(cfg.mu)
      .add(cfg.f_prime[0])
      .add(cfg.f_prime[1])
      .add(cfg.f_scaled ? 1 : 0)
      .add(r.u_l2)
      .add(r.deps_l2)
      .add(r.p_l2_meanadj)
      .add(r.flux.net)
      .add(r.flux.l1)
      .add(r.flux.max_cylinder)
      .add(r.flux.sum_abs_cylinder)
      .add(r.sol.diag.div_norm)
      .add(r.energy.rel_gap)
      .add(r.sol.diag.pressure_mean_shift)
      .add(r.sol.diag.residual);
  r.csv = csv.str();
  write_text_file(ctx.out_dir, "fine_summary.csv", r.csv);

  CsvTable icsv({"config_hash", "regime", "gamma", "eps", "psi_index", "lhs_volume",
                 "rhs_surface", "stab_term", "lambda_term", "raw_rel", "corrected_rel"});
  for (size_t i = 0; i < r.identities.size(); ++i) {
    const auto& d = r.identities[i];
    icsv.row()
        .add(cfg.config_hash)
        .add(regime_label(cfg, cfg.gamma))
        .add(cfg.gamma)
        .add(r.eps)
        .add(static_cast<int>(i))
        .add(d.lhs_volume)
        .add(d.rhs_surface)
        .add(d.stab_term)
        .add(d.lambda_term)
        .add(d.raw_rel)
        .add(d.corrected_rel);
  }
  r.identity_csv = icsv.str();
  write_text_file(ctx.out_dir, "fine_identity.csv", r.identity_csv);

  if (cfg.write_vtk && !ctx.out_dir.empty()) {
    VtkWriter w;
    w.add("velocity", r.sol.velocity);
    w.add("pressure", r.sol.pressure);
    {
      std::lock_guard<std::mutex> lock(g_io_mutex);
      std::filesystem::create_directories(ctx.out_dir);
      w.write((std::filesystem::path(ctx.out_dir) / "fine_fields.vtk").string(), *r.mesh);
    }
    const VerticalAverage va = vertical_average(r.sol.velocity);
    VtkWriter w2;
    w2.add("vertical_average", va.average);
    std::lock_guard<std::mutex> lock(g_io_mutex);
    w2.write((std::filesystem::path(ctx.out_dir) / "fine_vertical_average.vtk").string(),
             *va.average.mesh);
  }
  return r;
}

// ---- scaling study ----

ScalingResult run_scaling_study(const ExperimentConfig& cfg, const RunContext& ctx) {
  struct Task {
    size_t ig, ie;
  };
  std::vector<Task> tasks;
  for (size_t ig = 0; ig < cfg.gamma_list.size(); ++ig)
    for (size_t ie = 0; ie < cfg.eps_list.size(); ++ie) tasks.push_back({ig, ie});

  std::vector<ScalingCase> cases(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (;;) {
      const size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const double gamma = cfg.gamma_list[tasks[t].ig];
      const double eps = cfg.eps_list[tasks[t].ie];
      try {
        const FineResult f = fine_solve_one(cfg, gamma, eps,
                                            mix_seed(ctx.seed, 77 * tasks[t].ig + tasks[t].ie));
        ScalingCase c;
        c.gamma = gamma;
        c.eps = eps;
        c.regime = f.regime;
        c.u_l2 = f.u_l2;
        c.deps_l2 = f.deps_l2;
        c.p_l2_meanadj = f.p_l2_meanadj;
        c.r_u = f.u_l2 * std::pow(eps, -f.regime.velocity_exponent);
        c.r_deps = f.deps_l2 * std::pow(eps, -f.regime.gradient_exponent);
        c.r_p = f.p_l2_meanadj * std::pow(eps, -f.regime.pressure_exponent);
        c.flux = f.flux;
        c.max_corrected_rel = 0;
        c.max_raw_rel = 0;
        c.max_abs_surface_term = 0;
        for (const auto& d : f.identities) {
          c.max_corrected_rel = std::max(c.max_corrected_rel, d.corrected_rel);
          c.max_raw_rel = std::max(c.max_raw_rel, d.raw_rel);
          c.max_abs_surface_term = std::max(c.max_abs_surface_term,
                                            std::abs(d.rhs_surface));
        }
        c.residual = f.sol.diag.residual;
        cases[t] = c;
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(ctx.workers, static_cast<int>(tasks.size())));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ScalingResult out;
  out.cases = std::move(cases);

  CsvTable csv({"config_hash", "regime", "gamma", "eps", "s_u", "s_deps", "s_p", "u_l2",
                "deps_u_l2", "p_l2_meanadj", "r_u", "r_deps", "r_p", "flux_net",
                "flux_l1", "flux_max_cylinder", "max_raw_rel", "max_corrected_rel",
                "max_abs_surface_term", "residual"});
  for (const auto& c : out.cases)
    csv.row()
        .add(cfg.config_hash)
        .add(regime_name(c.regime.kind))
        .add(c.gamma)
        .add(c.eps)
        .add(c.regime.velocity_exponent)
        .add(c.regime.gradient_exponent)
        .add(c.regime.pressure_exponent)
        .add(c.u_l2)
        .add(c.deps_l2)
        .add(c.p_l2_meanadj)
        .add(c.r_u)
        .add(c.r_deps)
        .add(c.r_p)
        .add(c.flux.net)
        .add(c.flux.l1)
        .add(c.flux.max_cylinder)
        .add(c.max_raw_rel)
        .add(c.max_corrected_rel)
        .add(c.max_abs_surface_term)
        .add(c.residual);
  out.csv = csv.str();
  write_text_file(ctx.out_dir, "scaling_cases.csv", out.csv);

  CsvTable scsv({"config_hash", "regime", "gamma", "ratio_u", "ratio_deps", "ratio_p",
                 "slope_u", "slope_deps", "slope_p", "bounded_factor4"});
  for (size_t ig = 0; ig < cfg.gamma_list.size(); ++ig) {
    const double gamma = cfg.gamma_list[ig];
    ScalingSummary s;
    s.gamma = gamma;
    std::vector<double> le, lu, ld, lp;
    double rumin = 1e300, rumax = 0, rdmin = 1e300, rdmax = 0, rpmin = 1e300, rpmax = 0;
    for (const auto& c : out.cases) {
      if (c.gamma != gamma) continue;
      rumin = std::min(rumin, c.r_u);
      rumax = std::max(rumax, c.r_u);
      rdmin = std::min(rdmin, c.r_deps);
      rdmax = std::max(rdmax, c.r_deps);
      rpmin = std::min(rpmin, c.r_p);
      rpmax = std::max(rpmax, c.r_p);
      le.push_back(std::log(c.eps));
      lu.push_back(std::log(std::max(c.u_l2, 1e-300)));
      ld.push_back(std::log(std::max(c.deps_l2, 1e-300)));
      lp.push_back(std::log(std::max(c.p_l2_meanadj, 1e-300)));
    }
    auto ratio = [](double lo, double hi) { return lo > 0 ? hi / lo : (hi > 0 ? 1e300 : 1.0); };
    s.ratio_u = ratio(rumin, rumax);
    s.ratio_deps = ratio(rdmin, rdmax);
    s.ratio_p = ratio(rpmin, rpmax);
    auto slope = [&](const std::vector<double>& y) {
      const size_t n = le.size();
      if (n < 2) return 0.0;
      double xm = 0, ym = 0;
      for (size_t i = 0; i < n; ++i) {
        xm += le[i];
        ym += y[i];
      }
      xm /= n;
      ym /= n;
      double num = 0, den = 0;
      for (size_t i = 0; i < n; ++i) {
        num += (le[i] - xm) * (y[i] - ym);
        den += (le[i] - xm) * (le[i] - xm);
      }
      return den > 0 ? num / den : 0.0;
    };
    s.slope_u = slope(lu);
    s.slope_deps = slope(ld);
    s.slope_p = slope(lp);
    out.summaries.push_back(s);
    scsv.row()
        .add(cfg.config_hash)
        .add(regime_name(classify_regime(gamma).kind))
        .add(gamma)
        .add(s.ratio_u)
        .add(s.ratio_deps)
        .add(s.ratio_p)
        .add(s.slope_u)
        .add(s.slope_deps)
        .add(s.slope_p)
        .add(s.bounded() ? 1 : 0);
  }
  out.summary_csv = scsv.str();
  write_text_file(ctx.out_dir, "scaling_summary.csv", out.summary_csv);
  return out;
}

// ---- unfolding checks ----

UnfoldCheckResult run_unfold_check(const ExperimentConfig& cfg, const RunContext& ctx) {
  UnfoldCheckResult out;
  out.max_identity_rel = 0;
  out.max_boundary_spread = 0;
  out.max_boundary_avg_dev = 0;
  const UnitCell cell = build_unit_cell(cfg.shape);

  CsvTable csv({"config_hash", "kind", "eps", "p", "field_index", "lhs", "rhs", "rel"});
  auto add_rows = [&](const UnfoldingReport& rep, int field_index) {
    for (const auto& row : rep.rows) {
      out.rows.push_back(row);
      out.max_identity_rel = std::max(out.max_identity_rel, row.rel);
      csv.row()
          .add(cfg.config_hash)
          .add(row.name)
          .add(row.eps)
          .add(row.p)
          .add(field_index)
          .add(row.lhs)
          .add(row.rhs)
          .add(row.rel);
    }
  };

  for (size_t ie = 0; ie < cfg.eps_list.size(); ++ie) {
    const double eps = cfg.eps_list[ie];
    const PerforatedDomain dom = build_perforated_domain(eps, cell, cfg.omega);
    auto mesh = std::make_shared<Mesh>(
        build_mesh(dom, eps / cfg.cells_per_eps, cfg.layers));

    for (int fi = 0; fi < cfg.unfold_fields; ++fi) {
      const Field v = random_field(mesh, 3, mix_seed(ctx.seed, 31 * ie + fi));
      add_rows(verify_unfolding_identities(v, eps), fi);
    }
    {
      Field ones(mesh, 3);
      std::fill(ones.v.begin(), ones.v.end(), 1.0);
      add_rows(verify_unfolding_identities(ones, eps), -1);
    }

    if (cfg.shape.kind != ObstacleKind::None) {
      // Y'-periodic surface data: g_eps(x') = g(x'/eps) unfolds to the same
      // micro trace in every macro cell.
      auto ref = std::make_shared<Mesh>(
          build_cell_mesh_3d(cell, 1.0 / cfg.cells_per_eps, cfg.layers));
      const Field gref = random_field(ref, 3, mix_seed(ctx.seed, 997 + ie));
      const Field gfine = periodic_replicate(gref, mesh);
      const UnfoldedField gb = unfold_boundary(gfine, eps);
      const double spread = boundary_cell_spread(gb);
      out.max_boundary_spread = std::max(out.max_boundary_spread, spread);
      csv.row()
          .add(cfg.config_hash)
          .add("periodic_spread")
          .add(eps)
          .add(0)
          .add(-2)
          .add(spread)
          .add(0.0)
          .add(spread);
      const auto unf_avg = unfolded_boundary_average(gb);
      const auto ref_avg = boundary_average(gref, FacetTag::Obstacle);
      double dev = 0;
      for (size_t c = 0; c < unf_avg.size(); ++c)
        dev = std::max(dev, std::abs(unf_avg[c] - ref_avg[c]));
      out.max_boundary_avg_dev = std::max(out.max_boundary_avg_dev, dev);
      csv.row()
          .add(cfg.config_hash)
          .add("boundary_avg_dev")
          .add(eps)
          .add(0)
          .add(-2)
          .add(dev)
          .add(0.0)
          .add(dev);
    }
  }
  out.csv = csv.str();
  write_text_file(ctx.out_dir, "unfold_check.csv", out.csv);
  return out;
}

// ---- effective-law tabulation ----

namespace {

Eigen::Matrix2d permeability_from_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open permeability csv: " + path);
  std::string header;
  if (!std::getline(is, header)) throw ConfigError("empty permeability csv");
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  int idx[4] = {-1, -1, -1, -1};
  const std::string names[4] = {"A11", "A12", "A21", "A22"};
  for (size_t i = 0; i < cols.size(); ++i)
    for (int k = 0; k < 4; ++k)
      if (cols[i] == names[k]) idx[k] = static_cast<int>(i);
  for (int k = 0; k < 4; ++k)
    if (idx[k] < 0) throw ConfigError("permeability csv lacks column " + names[k]);
  std::string line, last;
  while (std::getline(is, line))
    if (!line.empty()) last = line;
  if (last.empty()) throw ConfigError("permeability csv has no data rows");
  std::vector<std::string> cells;
  std::istringstream ls(last);
  std::string c;
  while (std::getline(ls, c, ',')) cells.push_back(c);
  Eigen::Matrix2d A;
  for (int k = 0; k < 4; ++k) {
    if (idx[k] >= static_cast<int>(cells.size()))
      throw ConfigError("permeability csv row too short");
    A(k / 2, k % 2) = Config::parse_number(cells[static_cast<size_t>(idx[k])]);
  }
  return A;
}

}  // namespace

DarcyResult run_darcy(const ExperimentConfig& cfg, const RunContext& ctx) {
  const UnitCell cell = build_unit_cell(cfg.shape);
  DarcyResult out;
  out.theta = cell.theta;
  out.mu1 = cell.mu1;
  out.g_mean = surface_forcing_mean(cfg.g, cfg.shape, cfg.cells_per_eps);

  const Regime regime = classify_regime(cfg.gamma);
  if (cfg.permeability) {
    out.A = cfg.permeability;
  } else if (!cfg.permeability_csv.empty()) {
    out.A = permeability_from_csv(cfg.permeability_csv);
  } else if (regime.kind == RegimeKind::HighGamma) {
    AssembleOptions opts;
    opts.delta = cfg.delta;
    auto mesh = std::make_shared<Mesh>(
        build_cell_mesh_3d(cell, cfg.h_list.front(), cfg.cell_layers));
    const CellSolution s1 = solve_cell_problem(mesh, 1, opts);
    const CellSolution s2 = solve_cell_problem(mesh, 2, opts);
    out.A = assemble_permeability(s1, s2).A;
  }

  EffectiveInputs in;
  in.theta = out.theta;
  in.mu1 = out.mu1;
  in.alpha = cfg.alpha;
  in.mu = cfg.mu;
  in.f_prime = cfg.f_prime;
  in.g_mean = out.g_mean;
  in.A = out.A;

  CsvTable csv({"config_hash", "regime", "gamma", "theta", "mu1", "alpha", "mu", "f1",
                "f2", "gmean1", "gmean2", "A11", "A12", "A21", "A22", "gradp1", "gradp2",
                "v1", "v2", "v3"});
  for (const auto& gp : cfg.gradp_list) {
    in.grad_p = gp;
    DarcyRow row{regime, gp, effective_velocity(regime, in)};
    out.rows.push_back(row);
    const Eigen::Matrix2d A = out.A.value_or(Eigen::Matrix2d::Zero());
    csv.row()
        .add(cfg.config_hash)
        .add(regime_name(regime.kind))
        .add(cfg.gamma)
        .add(out.theta)
        .add(out.mu1)
        .add(cfg.alpha)
        .add(cfg.mu)
        .add(cfg.f_prime[0])
        .add(cfg.f_prime[1])
        .add(out.g_mean[0])
        .add(out.g_mean[1])
        .add(A(0, 0))
        .add(A(0, 1))
        .add(A(1, 0))
        .add(A(1, 1))
        .add(gp[0])
        .add(gp[1])
        .add(row.v[0])
        .add(row.v[1])
        .add(0.0);
  }
  out.csv = csv.str();
  write_text_file(ctx.out_dir, "darcy.csv", out.csv);
  return out;
}

}  // namespace tpm
