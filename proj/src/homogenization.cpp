#include "tpm/homogenization.hpp"

#include <cmath>
#include <string>

#include "tpm/errors.hpp"

namespace tpm {

const char* regime_name(RegimeKind k) {
  switch (k) {
    case RegimeKind::LowGamma: return "lowgamma";
    case RegimeKind::MidGamma: return "midgamma";
    case RegimeKind::HighGamma: return "highgamma";
  }
  return "?";
}

Regime classify_regime(double gamma) {
  if (!std::isfinite(gamma)) throw Error("gamma must be finite");
  Regime r;
  r.gamma = gamma;
  if (gamma < -1.0) {
    r.kind = RegimeKind::LowGamma;
    r.velocity_exponent = 1.0;
    r.gradient_exponent = 0.0;
    r.pressure_exponent = gamma;
  } else if (gamma < 1.0) {
    r.kind = RegimeKind::MidGamma;
    r.velocity_exponent = -gamma;
    r.gradient_exponent = -(1.0 + gamma) / 2.0;
    r.pressure_exponent = -1.0;
  } else {
    r.kind = RegimeKind::HighGamma;
    r.velocity_exponent = -1.0;
    r.gradient_exponent = -1.0;
    r.pressure_exponent = -2.0;
  }
  return r;
}

CellSolution solve_cell_problem(MeshPtr cell_mesh, int index,
                                const AssembleOptions& opts) {
  if (index != 1 && index != 2) throw Error("cell problem index must be 1 or 2");
  const Mesh& m = *cell_mesh;
  if (m.kind != MeshKind::Cell3D || !m.periodic_x || !m.periodic_y)
    throw InconsistentTags("cell problems need the periodic 3D cell mesh");

  BoundaryConditionSpec bc;  // Dirichlet top/bottom, natural obstacle walls
  bc.robin.alpha = 0.0;
  bc.robin.gamma = 0.0;
  const Eigen::Vector2d e_i = index == 1 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);

  const SaddleSystem sys = assemble_system(cell_mesh, bc, /*mu=*/1.0, /*eps=*/1.0,
                                           e_i, opts);
  CellSolution cs;
  cs.index = index;
  cs.sol = solve_saddle(sys);
  cs.divergence_norm = cs.sol.diag.div_norm;
  cs.energy = deps_inner(cs.sol.velocity, cs.sol.velocity, 1.0);
  return cs;
}

PermeabilityTensor assemble_permeability(const CellSolution& s1, const CellSolution& s2) {
  const Field& w1 = s1.sol.velocity;
  const Field& w2 = s2.sol.velocity;
  if (w1.mesh.get() != w2.mesh.get())
    throw Error("cell solutions must share one mesh");
  const Mesh& m = *w1.mesh;

  PermeabilityTensor t;
  t.volume = m.fluid_volume;
  const double V = t.volume;
  t.A(0, 0) = deps_inner(w1, w1, 1.0) / V;
  t.A(0, 1) = deps_inner(w1, w2, 1.0) / V;
  t.A(1, 0) = deps_inner(w2, w1, 1.0) / V;
  t.A(1, 1) = deps_inner(w2, w2, 1.0) / V;

  const double frob = t.A.norm();
  t.provenance.h = m.h[0];
  t.provenance.layers = m.nc[2];
  t.provenance.asymmetry = frob > 0 ? std::abs(t.A(0, 1) - t.A(1, 0)) / frob : 0.0;
  if (std::abs(t.A(0, 1) - t.A(1, 0)) > 1e-8 * std::max(frob, 1e-300))
    throw AsymmetryExceedsTolerance("A12 - A21 = " +
                                    std::to_string(t.A(0, 1) - t.A(1, 0)));

  // Load formula (1/|Y_f|) int w^i . e_j, and the discrete weak-form variant
  // including the pressure-divergence cross term (q^j, div w^i).
  const CellSolution* sols[2] = {&s1, &s2};
  double raw = 0, wf = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double load = integral(sols[i]->sol.velocity)[j] / V;
      const double cross =
          div_pair(sols[i]->sol.velocity, sols[j]->sol.pressure, 1.0) / V;
      raw = std::max(raw, std::abs(t.A(i, j) - load));
      wf = std::max(wf, std::abs(t.A(i, j) - (load + cross)));
    }
  t.provenance.energy_load_gap_raw = frob > 0 ? raw / frob : raw;
  t.provenance.energy_load_gap_weakform = frob > 0 ? wf / frob : wf;
  for (int i = 0; i < 2; ++i) {
    t.provenance.residual[i] = sols[i]->sol.diag.residual;
    t.provenance.div_norm[i] = sols[i]->divergence_norm;
  }

  // Eigenvalues of the symmetric 2x2 tensor.
  const double tr = t.A.trace();
  const double det = t.A.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  t.eig_min = tr / 2.0 - disc;
  t.eig_max = tr / 2.0 + disc;
  return t;
}

Eigen::Vector2d effective_velocity(const Regime& regime, const EffectiveInputs& in) {
  if (!(in.alpha > 0)) throw Error("alpha must be positive");
  if (!(in.mu > 0)) throw Error("mu must be positive");
  switch (regime.kind) {
    case RegimeKind::LowGamma:
      if (in.mu1 <= 0)
        throw ZeroMu1("empty obstacle (mu1 = 0) makes the low-gamma law singular");
      return Eigen::Vector2d(-(in.theta / (in.alpha * in.mu1)) * in.grad_p);
    case RegimeKind::MidGamma:
      if (in.mu1 <= 0)
        throw ZeroMu1("empty obstacle (mu1 = 0) makes the mid-gamma law singular");
      return Eigen::Vector2d((in.theta / (in.alpha * in.mu1)) *
                             (in.f_prime - in.grad_p + in.mu1 * in.g_mean));
    case RegimeKind::HighGamma:
      if (!in.A)
        throw MissingPermeability("high-gamma law needs the permeability tensor");
      return Eigen::Vector2d(-(in.theta / in.mu) * (*in.A) * in.grad_p);
  }
  throw Error("unreachable regime");
}

}  // namespace tpm
