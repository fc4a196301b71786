#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <optional>
#include <vector>

#include "tpm/field.hpp"
#include "tpm/operators.hpp"

namespace tpm {

/// Surface forcing g' on the obstacle walls, given in cell-local
/// microstructure coordinates: either one constant 2-vector or a per-facet
/// table over the reference footprint's obstacle edges (extruded constant
/// in y3; the third component is identically zero).
struct SurfaceForcing {
  Eigen::Vector2d constant{0.0, 0.0};
  std::optional<std::vector<Eigen::Vector2d>> facet_table;

  bool is_zero() const {
    return !facet_table && constant[0] == 0.0 && constant[1] == 0.0;
  }
};

/// Robin data on the obstacle boundary: coefficient alpha * eps^gamma and
/// surface forcing g.
struct RobinParams {
  double alpha = 0.0;
  double gamma = 0.0;
  SurfaceForcing g;
};

enum class BCKind : uint8_t { Dirichlet0, NaturalRobin };

/// Per-tag boundary conditions.  The problems in scope pin exterior and
/// top/bottom to homogeneous Dirichlet and the obstacle walls to the Robin
/// condition; assemble_system rejects anything else (InconsistentTags).
struct BoundaryConditionSpec {
  BCKind exterior = BCKind::Dirichlet0;
  BCKind top = BCKind::Dirichlet0;
  BCKind bottom = BCKind::Dirichlet0;
  BCKind obstacle = BCKind::NaturalRobin;
  RobinParams robin;
};

/// Deterministic enumeration of the obstacle edges of the reference
/// footprint (used to address per-facet surface data).
struct ObstacleFacetIndexer {
  int period = 0;              // footprint cells per axis
  std::vector<int32_t> index;  // ((b*period)+a)*4 + face -> idx or -1
  int count = 0;

  static ObstacleFacetIndexer build(const ObstacleShape& shape, int period);
  static ObstacleFacetIndexer build(const Mesh& mesh);
  int local_index(const Mesh::Facet& f) const;
};

enum class MultiplierPolicy : uint8_t { Auto, On, Off };

struct AssembleOptions {
  double delta = 0.1;  // pressure-Laplacian stabilization coefficient
  MultiplierPolicy multiplier = MultiplierPolicy::Auto;
};

/// Assembled sparse saddle-point system for the weak form: velocity block
/// mu * (D_eps u, D_eps v) plus the Robin boundary mass, div_eps coupling,
/// pressure stabilization delta * sum_d h_d^2 (d_d p, d_d q), loads from
/// the volume forcing f' and the obstacle surface forcing g', and (when the
/// pressure constant is otherwise unconstrained) one scalar multiplier
/// enforcing mean-zero pressure.
struct SaddleSystem {
  MeshPtr mesh;
  BoundaryConditionSpec bc;
  double mu = 1.0, eps = 1.0, delta = 0.1;
  double robin_coeff = 0.0;  // alpha * eps^gamma
  Eigen::Vector2d f{0.0, 0.0};

  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd rhs;
  std::vector<int32_t> udof;  // active node -> first velocity dof (-1: fixed/slave)
  std::vector<int32_t> pdof;  // active node -> pressure dof (-1: slave)
  int n_dofs = 0;
  int lambda_dof = -1;

  Eigen::SparseMatrix<double> S;  // stabilization block, global indices
  Eigen::VectorXd pmass;          // integral weights of pressure test functions
  ObstacleFacetIndexer indexer;

  bool has_multiplier() const { return lambda_dof >= 0; }

  /// Global vector holding a scalar field's values at pressure dofs.
  Eigen::VectorXd pressure_vector(const Field& w) const;
};

SaddleSystem assemble_system(MeshPtr mesh, const BoundaryConditionSpec& bc, double mu,
                             double eps, const Eigen::Vector2d& volume_forcing,
                             const AssembleOptions& opts = {});

struct SolveDiagnostics {
  double residual = 0.0;             // |Kx - b| / max(|b|, 1e-300)
  double div_norm = 0.0;             // |div_eps u|_{L2}
  double pressure_mean_shift = 0.0;  // constant removed in post (no multiplier)
  double lambda = 0.0;
  double obstacle_flux = 0.0;        // integral of u . n over the obstacle walls
};

struct StokesSolution {
  Field velocity;
  Field pressure;  // mean-zero over the fluid part
  SolveDiagnostics diag;
};

/// Deterministic sparse LU solve.  Throws FactorizationFailure (with the
/// solver's pivot report) or SingularSystem.
StokesSolution solve_saddle(const SaddleSystem& sys);

/// Net flux of the solution through a tagged boundary.
double boundary_flux(const StokesSolution& sol, FacetTag tag);

/// Discrete divergence identity: integral of U~ . grad_eps psi over the box
/// against the obstacle surface term.  `corrected_rel` accounts for the
/// stabilization and multiplier fluxes of the discrete continuity equation;
/// `raw_rel` compares the two integrals alone.
struct DivergenceIdentity {
  double lhs_volume = 0.0;
  double rhs_surface = 0.0;
  double stab_term = 0.0;
  double lambda_term = 0.0;
  double scale = 1.0;
  double raw_rel = 0.0;
  double corrected_rel = 0.0;
};

DivergenceIdentity divergence_identity(const SaddleSystem& sys, const StokesSolution& sol,
                                       const Field& psi);

/// Discrete energy balance: mu |D_eps u|^2 + robin |u|^2_dT + stabilization
/// + multiplier work against the f and g loads.
struct EnergyIdentity {
  double viscous = 0.0;
  double robin = 0.0;
  double stabilization = 0.0;
  double lambda_work = 0.0;
  double load_f = 0.0;
  double load_g = 0.0;
  double rel_gap = 0.0;
};

EnergyIdentity energy_identity(const SaddleSystem& sys, const StokesSolution& sol);

/// g' evaluated on one obstacle facet (cell-local sampling).
Eigen::Vector2d surface_forcing_value(const SurfaceForcing& g,
                                      const ObstacleFacetIndexer& indexer,
                                      const Mesh::Facet& f);

/// Length-weighted mean of g' over the reference obstacle boundary,
/// M_{dT'}[g'].  `period` is the footprint resolution the facet table was
/// built for (ignored for constant g).
Eigen::Vector2d surface_forcing_mean(const SurfaceForcing& g, const ObstacleShape& shape,
                                     int period);

/// Mass exchange through the obstacle walls.  With u = 0 on the outer
/// boundary the net flux vanishes by mass conservation; the one-way
/// exchange integral |u . n| and the per-cylinder fluxes carry the
/// compressibility effect ("fluid disappearing through the cylinders").
struct ObstacleFluxReport {
  double net = 0.0;
  double l1 = 0.0;                // integral of |u . n| over the walls
  double max_cylinder = 0.0;      // max_k |net flux of one cylinder|
  double sum_abs_cylinder = 0.0;  // sum_k |net flux of cylinder k|
  int cylinders = 0;
};

ObstacleFluxReport obstacle_flux_report(const StokesSolution& sol, const SaddleSystem& sys);

}  // namespace tpm
