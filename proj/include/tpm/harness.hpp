#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tpm/config.hpp"
#include "tpm/homogenization.hpp"
#include "tpm/unfolding.hpp"

namespace tpm {

enum class ExperimentKind : uint8_t { Cell, Fine, Scaling, UnfoldCheck, Darcy };

const char* experiment_name(ExperimentKind k);

/// Parsed experiment configuration.  The kind comes from the CLI
/// subcommand; everything else from the flat key = value file.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Fine;

  // geometry
  ObstacleShape shape = ObstacleShape::square(0.5);
  Rect omega;

  // numerics
  std::vector<double> h_list{1.0 / 16};  // cell-study spacings
  int cell_layers = 0;                   // 0: isotropic (1/h layers)
  int cells_per_eps = 4;                 // fine horizontal resolution, h = eps/n
  int layers = 8;                        // fine vertical layers
  double delta = 0.1;
  double solver_tol = 1e-9;

  // physics
  double mu = 1.0;
  double alpha = 1.0;
  double gamma = 0.0;
  std::vector<double> gamma_list{-2, 0, 2};
  Eigen::Vector2d f_prime{1, 0};
  bool f_scaled = true;  // apply f'_eps = f'/eps
  SurfaceForcing g;

  // epsilon
  double eps_value = 1.0 / 8;
  std::vector<double> eps_list{1.0 / 4, 1.0 / 8, 1.0 / 16};

  // unfold-check
  int unfold_fields = 10;

  // darcy
  std::vector<Eigen::Vector2d> gradp_list{{1, 0}};
  std::string permeability_csv;
  std::optional<Eigen::Matrix2d> permeability;

  // output
  bool write_vtk = false;

  std::string config_hash;  // canonical hash of the source config

  static ExperimentConfig from_config(ExperimentKind kind, const Config& cfg);
};

struct RunContext {
  std::string out_dir;  // empty: no files written
  uint64_t seed = 42;
  int workers = 1;
};

// ---- cell study ----

struct CellStudyRow {
  double h;
  int layers;
  PermeabilityTensor tensor;
  double staircase_area, staircase_perimeter;  // footprint measurements
  double analytic_area, analytic_perimeter;
};

struct CellStudyResult {
  std::vector<CellStudyRow> rows;
  std::string csv;
};

CellStudyResult run_cell_study(const ExperimentConfig& cfg, const RunContext& ctx);

// ---- fine solve ----

struct FineResult {
  double eps, gamma;
  Regime regime;
  MeshPtr mesh;
  StokesSolution sol;
  double u_l2, deps_l2, p_l2_meanadj;
  ObstacleFluxReport flux;
  EnergyIdentity energy;
  std::vector<DivergenceIdentity> identities;  // 5 seeded random psi
  std::string csv, identity_csv;
};

FineResult run_fine_solve(const ExperimentConfig& cfg, const RunContext& ctx);

// ---- scaling study ----

struct ScalingCase {
  double gamma, eps;
  Regime regime;
  double u_l2, deps_l2, p_l2_meanadj;
  double r_u, r_deps, r_p;  // norm * eps^{-exponent}
  ObstacleFluxReport flux;
  double max_corrected_rel, max_raw_rel, max_abs_surface_term;
  double residual;
};

struct ScalingSummary {
  double gamma;
  double ratio_u, ratio_deps, ratio_p;  // max r / min r over the eps list
  double slope_u, slope_deps, slope_p;  // fitted log-log slopes of the norms
  bool bounded(double factor = 4.0) const {
    return ratio_u <= factor && ratio_deps <= factor && ratio_p <= factor;
  }
};

struct ScalingResult {
  std::vector<ScalingCase> cases;
  std::vector<ScalingSummary> summaries;
  std::string csv, summary_csv;
};

ScalingResult run_scaling_study(const ExperimentConfig& cfg, const RunContext& ctx);

// ---- unfolding checks ----

struct UnfoldCheckResult {
  std::vector<IdentityRow> rows;  // all identities, all fields, all eps
  double max_identity_rel;
  double max_boundary_spread;   // periodic-g per-cell deviation
  double max_boundary_avg_dev;  // unfolded boundary average vs M_{dT'}[g']
  std::string csv;
};

UnfoldCheckResult run_unfold_check(const ExperimentConfig& cfg, const RunContext& ctx);

// ---- effective-law tabulation ----

struct DarcyRow {
  Regime regime;
  Eigen::Vector2d grad_p;
  Eigen::Vector2d v;
};

struct DarcyResult {
  double theta, mu1;
  Eigen::Vector2d g_mean;
  std::optional<Eigen::Matrix2d> A;
  std::vector<DarcyRow> rows;
  std::string csv;
};

DarcyResult run_darcy(const ExperimentConfig& cfg, const RunContext& ctx);

/// Parses a facet-table file for g (one "gx gy" pair per obstacle facet of
/// the reference footprint, mesh enumeration order).
SurfaceForcing load_surface_table(const std::string& path);

/// Writes `text` under dir/name (creating dir), serialized per file.
void write_text_file(const std::string& dir, const std::string& name,
                     const std::string& text);

}  // namespace tpm
