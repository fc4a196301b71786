#pragma once

#include <string>
#include <vector>

#include "tpm/field.hpp"
#include "tpm/operators.hpp"

namespace tpm {

/// Periodic unfolding of a conforming fine-mesh field: one micro field on
/// the reference cell Y_f per macro cell of omega.  Stores the source field
/// plus index arithmetic; micro values are read through the cell-local
/// change of variables y' = (x' - cell center)/eps, never copied per cell.
struct UnfoldedField {
  MeshPtr fine_mesh;
  MeshPtr ref_mesh;   // 3D mesh on Y_f with spacing h/eps and the same layers
  Field source;
  double eps = 1.0;
  int m = 1;          // fine cells per macro cell per axis
  int macro_nx = 0, macro_ny = 0;
  bool boundary_only = false;  // built by unfold_boundary

  int n_macro() const { return macro_nx * macro_ny; }

  /// Micro-field value: macro cell (kx,ky), reference structured node, comp.
  double value(int kx, int ky, long long ref_struct, int c) const {
    const auto ijk = ref_mesh->node_ijk(static_cast<int32_t>(ref_struct));
    const long long fine =
        fine_mesh->node_index(kx * m + ijk[0], ky * m + ijk[1], ijk[2]);
    return source.at_struct(fine, c);
  }
};

/// Unfold a conforming field (exact relabeling; throws NonconformingUnfold
/// if the fine lattice does not map node-to-node onto the reference cell).
UnfoldedField unfold(const Field& v, double eps);

/// Boundary unfolding of the trace on the obstacle walls dT_eps.
UnfoldedField unfold_boundary(const Field& trace, double eps);

/// Inverse of unfold on conforming fields (bitwise).
Field fold_back(const UnfoldedField& u);

/// L^p norm of the unfolded field over R^2 x Y_f (macro-cell quadrature on
/// the reference mesh).
double unfolded_norm_lp(const UnfoldedField& u, int p);

/// L^p norm of D_y of the unfolded field (isotropic reference gradient).
double unfolded_grad_norm_lp(const UnfoldedField& u, int p);

/// L^p norm of the boundary-unfolded trace over R^2 x dT.
double unfolded_boundary_norm_lp(const UnfoldedField& u, int p);

/// Componentwise mean of the boundary-unfolded field over R^2 x dT.
std::vector<double> unfolded_boundary_average(const UnfoldedField& u);

/// Max over macro cells of the max nodal deviation from the first cell's
/// micro field on dT (zero for unfoldings of Y'-periodic surface data).
double boundary_cell_spread(const UnfoldedField& u);

struct IdentityRow {
  std::string name;  // normv | normDv | unf_boun
  double eps;
  int p;
  double lhs, rhs, rel;
};

struct UnfoldingReport {
  std::vector<IdentityRow> rows;
  double max_rel() const;
  bool pass(double tol = 1e-12) const { return max_rel() <= tol; }
};

/// Evaluates the three norm identities for p in {1,2}:
///   |v^|_{L^p(R^2 x Y_f)}      = |Y'|^{1/p} |v|_{L^p}
///   |D_y v^|_{L^p}             = eps |Y'|^{1/p} |D_eps v|_{L^p}
///   |v^b|_{L^p(R^2 x dT)}      = eps^{1/p} |Y'|^{1/p} |v|_{L^p(dT_eps)}
UnfoldingReport verify_unfolding_identities(const Field& v, double eps);

/// Y'-periodic sampling g_eps(x') = g((x' - cell center)/eps): replicates a
/// reference-cell field into every macro cell of a conforming fine mesh.
Field periodic_replicate(const Field& ref_field, MeshPtr fine_mesh);

}  // namespace tpm
