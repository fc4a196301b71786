#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tpm/field.hpp"

namespace tpm {

/// Rescaling parameter entering D_eps, grad_eps, div_eps: the vertical
/// derivative carries a 1/epsilon factor.
struct AnisotropyParameter {
  double epsilon = 1.0;
};

// ---- anisotropic differential operators (element-center evaluation) ----

/// D_eps v: rows = components of v, cols = (x1, x2, y3) with the third
/// column scaled by 1/eps.  2D meshes produce ncomp x 2 tensors (no scaling).
TensorField anisotropic_gradient(const Field& v, AnisotropyParameter eps);

/// grad_eps of a scalar field (1 x dim tensor).
TensorField grad_eps(const Field& w, AnisotropyParameter eps);

/// div_eps of a vector field (1 x 1 tensor per cell).
TensorField div_eps(const Field& v, AnisotropyParameter eps);

// ---- integrals and norms (Gauss quadrature, deterministic order) ----

/// L^p norm over the field's support, p in {1,2}; pointwise Euclidean
/// magnitude across components.
double norm_lp(const Field& v, int p = 2);

/// ||D_eps v||_{L^p} over the support (Frobenius magnitude pointwise).
double seminorm_deps_lp(const Field& v, double epsilon, int p = 2);

/// ||div_eps v||_{L^2}.
double div_eps_norm(const Field& v, double epsilon);

/// Integral of D_eps u : D_eps w (full-gradient contraction).
double deps_inner(const Field& u, const Field& w, double epsilon);

/// Componentwise integral over the support.
std::vector<double> integral(const Field& v);

/// Componentwise mean over the field's domain (fluid part, or the whole box
/// for extended fields).  Throws EmptyRegion on zero-measure domains.
std::vector<double> region_average(const Field& v);

/// Componentwise surface mean over a boundary tag.  Throws EmptyRegion.
std::vector<double> boundary_average(const Field& v, FacetTag tag);

/// Surface L^p norm over a tag (Euclidean magnitude pointwise).
double surface_norm_lp(const Field& v, FacetTag tag, int p = 2);

/// Net flux of a vector field through a tagged boundary, outward from the
/// fluid: integral of u . n dsigma(x') dy3.  Throws UnknownTag if the mesh
/// has no such facets.
double boundary_net_flux(const Field& u, FacetTag tag);

/// Surface integral of (u . n) psi over a tag.
double surface_flux_pair(const Field& u, const Field& psi, FacetTag tag);

/// Volume integral of u . grad_eps(psi) over u's support.
double volume_grad_pair(const Field& u, const Field& psi, double epsilon);

/// Volume integral of div_eps(u) * psi.
double div_pair(const Field& u, const Field& psi, double epsilon);

/// delta * sum_d h_d^2 (d_d p, d_d q): the pressure-stabilization form
/// evaluated by the same quadrature the solver assembles.
double stabilization_pair(const Field& p, const Field& q, double delta);

// ---- field constructions ----

struct VerticalAverage {
  Field average;       // 2D field on the footprint mesh
  int masked_columns;  // horizontal nodes excluded (inside obstacles)
};

/// Trapezoidal average over y3 per horizontal node column.
VerticalAverage vertical_average(const Field& v3d);

/// Zero extension onto an unmasked box mesh on the same lattice; the result
/// carries the source fluid mask as integration support.
Field extend_by_zero(const Field& v, MeshPtr box);

/// Deterministic pseudo-random nodal field, values in [-1,1], periodic
/// slaves synced.  When zero_on_outer_boundary is set the field vanishes on
/// the box boundary (exterior walls, top and bottom).
Field random_field(MeshPtr mesh, int ncomp, uint64_t seed,
                   bool zero_on_outer_boundary = false);

/// True if the structured node lies on the domain's outer boundary
/// (non-periodic lateral walls; top/bottom in 3D).
bool node_on_outer_boundary(const Mesh& m, int32_t structured);

}  // namespace tpm
