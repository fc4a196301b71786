#include "tpm/stokes.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <string>

#include "tpm/detail/quadrature.hpp"
#include "tpm/errors.hpp"

namespace tpm {

using detail::FacetQuad;
using detail::Quad;
using detail::make_facet_quad;
using detail::make_quad;

namespace {

int footprint_period(const Mesh& mesh) {
  if (mesh.kind == MeshKind::Fine3D && mesh.epsilon > 0)
    return static_cast<int>(std::llround(mesh.epsilon / mesh.h[0]));
  return mesh.nc[0];
}

}  // namespace

ObstacleFacetIndexer ObstacleFacetIndexer::build(const Mesh& mesh) {
  return build(mesh.cell.shape, footprint_period(mesh));
}

ObstacleFacetIndexer ObstacleFacetIndexer::build(const ObstacleShape& shape, int period) {
  ObstacleFacetIndexer x;
  x.period = period;
  const FootprintMask fp = build_footprint(shape, x.period);
  const int m = x.period;
  x.index.assign(static_cast<size_t>(m) * m * 4, -1);
  auto solid = [&](int a, int b) {
    if (a < 0 || b < 0 || a >= m || b >= m) return false;
    return fp.solid[static_cast<size_t>(b) * m + a] != 0;
  };
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a) {
      if (solid(a, b)) continue;
      const int nbr[4][2] = {{a - 1, b}, {a + 1, b}, {a, b - 1}, {a, b + 1}};
      for (int face = 0; face < 4; ++face)
        if (solid(nbr[face][0], nbr[face][1]))
          x.index[(static_cast<size_t>(b) * m + a) * 4 + face] = x.count++;
    }
  return x;
}

int ObstacleFacetIndexer::local_index(const Mesh::Facet& f) const {
  if (f.face >= 4) throw InconsistentTags("obstacle facet with vertical normal");
  const int a = f.cell_i % period;
  const int b = f.cell_j % period;
  const int idx = index[(static_cast<size_t>(b) * period + a) * 4 + f.face];
  if (idx < 0) throw InconsistentTags("facet not on the reference obstacle boundary");
  return idx;
}

Eigen::Vector2d surface_forcing_value(const SurfaceForcing& g,
                                      const ObstacleFacetIndexer& indexer,
                                      const Mesh::Facet& f) {
  if (!g.facet_table) return g.constant;
  const int idx = indexer.local_index(f);
  if (idx >= static_cast<int>(g.facet_table->size()))
    throw ConfigError("surface forcing table too short");
  return (*g.facet_table)[static_cast<size_t>(idx)];
}

Eigen::Vector2d surface_forcing_mean(const SurfaceForcing& g, const ObstacleShape& shape,
                                     int period) {
  if (!g.facet_table) return g.constant;
  const ObstacleFacetIndexer ix = ObstacleFacetIndexer::build(shape, period);
  if (static_cast<int>(g.facet_table->size()) != ix.count)
    throw ConfigError("surface forcing table size " +
                      std::to_string(g.facet_table->size()) + " != facet count " +
                      std::to_string(ix.count));
  Eigen::Vector2d acc{0, 0};
  for (const auto& v : *g.facet_table) acc += v;  // footprint edges share one length
  return ix.count ? Eigen::Vector2d(acc / ix.count) : Eigen::Vector2d{0, 0};
}

ObstacleFluxReport obstacle_flux_report(const StokesSolution& sol, const SaddleSystem& sys) {
  const Mesh& m = *sys.mesh;
  const Field& u = sol.velocity;
  const int period = sys.indexer.period;
  ObstacleFluxReport r;
  std::vector<long double> per_cyl;
  const int ncx = std::max(1, m.nc[0] / std::max(1, period));
  const int ncy = std::max(1, m.nc[1] / std::max(1, period));
  per_cyl.assign(static_cast<size_t>(ncx) * ncy, 0.0L);
  long double net = 0, l1 = 0;
  for (const auto& f : m.facets) {
    if (f.tag != FacetTag::Obstacle) continue;
    const auto g = m.facet_geometry(f);
    const FacetQuad fq = make_facet_quad(m, g);
    const int axis = f.face / 2;
    const double sgn = (f.face % 2) ? 1.0 : -1.0;
    long double facet_net = 0, facet_l1 = 0;
    for (int iq = 0; iq < fq.n_q; ++iq) {
      double un = 0;
      for (int a = 0; a < fq.n_nodes; ++a) un += fq.N[iq][a] * u.at(g.nodes[a], axis);
      facet_net += fq.w * sgn * un;
      facet_l1 += fq.w * std::abs(un);
    }
    net += facet_net;
    l1 += facet_l1;
    const int cx = f.cell_i / std::max(1, period);
    const int cy = f.cell_j / std::max(1, period);
    per_cyl[static_cast<size_t>(cy) * ncx + cx] += facet_net;
  }
  r.net = static_cast<double>(net);
  r.l1 = static_cast<double>(l1);
  int active_cyl = 0;
  for (const long double c : per_cyl) {
    if (c != 0.0L) ++active_cyl;
    r.max_cylinder = std::max(r.max_cylinder, static_cast<double>(std::abs(c)));
    r.sum_abs_cylinder += static_cast<double>(std::abs(c));
  }
  r.cylinders = m.kind == MeshKind::Cell3D ? m.obstacle_copies : active_cyl;
  return r;
}

Eigen::VectorXd SaddleSystem::pressure_vector(const Field& w) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_dofs);
  for (int id = 0; id < mesh->n_active(); ++id) {
    const int32_t ma = mesh->master[static_cast<size_t>(id)];
    if (ma != id) continue;
    const int32_t pd = pdof[static_cast<size_t>(ma)];
    if (pd >= 0) out[pd] = w.at(ma, 0);
  }
  return out;
}

SaddleSystem assemble_system(MeshPtr mesh, const BoundaryConditionSpec& bc, double mu,
                             double eps, const Eigen::Vector2d& volume_forcing,
                             const AssembleOptions& opts) {
  const Mesh& m = *mesh;
  if (bc.exterior != BCKind::Dirichlet0 || bc.top != BCKind::Dirichlet0 ||
      bc.bottom != BCKind::Dirichlet0)
    throw InconsistentTags("exterior/top/bottom must be homogeneous Dirichlet");
  if (bc.obstacle != BCKind::NaturalRobin)
    throw InconsistentTags("obstacle walls must carry the Robin condition");
  if (bc.robin.alpha < 0) throw InconsistentTags("Robin coefficient must be >= 0");
  if (!(mu > 0) || !(eps > 0)) throw InconsistentTags("need mu > 0 and eps > 0");

  SaddleSystem sys;
  sys.mesh = mesh;
  sys.bc = bc;
  sys.mu = mu;
  sys.eps = eps;
  sys.delta = opts.delta;
  sys.robin_coeff = bc.robin.alpha * std::pow(eps, bc.robin.gamma);
  sys.f = volume_forcing;
  sys.indexer = ObstacleFacetIndexer::build(m);

  const int dim = m.dim;
  const int n_active = m.n_active();

  // DOF numbering: per master node, dim velocity dofs (unless Dirichlet)
  // followed by one pressure dof; one trailing multiplier if gauged.
  sys.udof.assign(static_cast<size_t>(n_active), -1);
  sys.pdof.assign(static_cast<size_t>(n_active), -1);
  int next = 0;
  for (int id = 0; id < n_active; ++id) {
    if (m.master[static_cast<size_t>(id)] != id) continue;
    const int32_t s = m.node_struct[static_cast<size_t>(id)];
    if (!node_on_outer_boundary(m, s)) {
      sys.udof[static_cast<size_t>(id)] = next;
      next += dim;
    }
    sys.pdof[static_cast<size_t>(id)] = next++;
  }

  // Pressure gauge: the Robin boundary term pins the pressure constant
  // whenever the obstacle boundary carries free velocity dofs; otherwise a
  // scalar multiplier enforces mean-zero pressure.
  bool obstacle_pins_pressure = false;
  for (const auto& f : m.facets) {
    if (f.tag != FacetTag::Obstacle) continue;
    const auto g = m.facet_geometry(f);
    for (int a = 0; a < g.n_nodes; ++a) {
      const int32_t ma = m.master[static_cast<size_t>(g.nodes[a])];
      if (sys.udof[static_cast<size_t>(ma)] >= 0) {
        obstacle_pins_pressure = true;
        break;
      }
    }
    if (obstacle_pins_pressure) break;
  }
  bool gauge = false;
  switch (opts.multiplier) {
    case MultiplierPolicy::Auto: gauge = !obstacle_pins_pressure; break;
    case MultiplierPolicy::On: gauge = true; break;
    case MultiplierPolicy::Off: gauge = false; break;
  }
  if (!gauge && !obstacle_pins_pressure)
    throw SingularSystem("pressure constant unconstrained (no obstacle boundary) "
                         "and the mean-zero multiplier is disabled");
  if (gauge) sys.lambda_dof = next++;
  sys.n_dofs = next;

  // Element matrices of the uniform lattice.
  const Quad q = make_quad(m);
  const int nn = q.n_nodes;
  double G[3][8][8] = {};   // int d_d(phi_a) d_d(phi_b)
  double Dm[3][8][8] = {};  // int phi_a d_d(phi_b)
  double phi_int[8] = {};   // int phi_a
  for (int iq = 0; iq < q.n_q; ++iq)
    for (int a = 0; a < nn; ++a) {
      phi_int[a] += q.w * q.N[iq][a];
      for (int b = 0; b < nn; ++b)
        for (int d = 0; d < dim; ++d) {
          G[d][a][b] += q.w * q.dN[iq][a][d] * q.dN[iq][b][d];
          Dm[d][a][b] += q.w * q.N[iq][a] * q.dN[iq][b][d];
        }
    }
  const double zscale = dim == 3 ? 1.0 / eps : 1.0;
  double stiff[8][8];
  double stab[8][8];
  for (int a = 0; a < nn; ++a)
    for (int b = 0; b < nn; ++b) {
      stiff[a][b] = mu * (G[0][a][b] + G[1][a][b] +
                          (dim == 3 ? zscale * zscale * G[2][a][b] : 0.0));
      double s = 0;
      for (int d = 0; d < dim; ++d) s += m.h[d] * m.h[d] * G[d][a][b];
      stab[a][b] = opts.delta * s;
    }

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<Eigen::Triplet<double>> strips;
  trips.reserve(static_cast<size_t>(m.n_struct_cells()) * nn * nn * (dim + 2));
  sys.rhs = Eigen::VectorXd::Zero(sys.n_dofs);
  sys.pmass = Eigen::VectorXd::Zero(sys.n_dofs);

  int32_t nodes[8];
  const int nz = dim == 3 ? m.nc[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < m.nc[1]; ++j)
      for (int i = 0; i < m.nc[0]; ++i) {
        if (!m.is_fluid(i, j, dim == 3 ? k : 0)) continue;
        m.cell_nodes(i, j, dim == 3 ? k : 0, nodes);
        int32_t mast[8];
        for (int a = 0; a < nn; ++a)
          mast[a] = m.master[static_cast<size_t>(nodes[a])];
        for (int a = 0; a < nn; ++a) {
          const int32_t ua = sys.udof[static_cast<size_t>(mast[a])];
          const int32_t pa = sys.pdof[static_cast<size_t>(mast[a])];
          sys.pmass[pa] += phi_int[a];
          if (ua >= 0)
            for (int c = 0; c < 2 && c < dim; ++c)
              sys.rhs[ua + c] += volume_forcing[c] * phi_int[a];
          for (int b = 0; b < nn; ++b) {
            const int32_t ub = sys.udof[static_cast<size_t>(mast[b])];
            const int32_t pb = sys.pdof[static_cast<size_t>(mast[b])];
            if (ua >= 0 && ub >= 0)
              for (int c = 0; c < dim; ++c)
                trips.emplace_back(ua + c, ub + c, stiff[a][b]);
            for (int c = 0; c < dim; ++c) {
              const double sc = (dim == 3 && c == 2) ? zscale : 1.0;
              if (ua >= 0)  // momentum row a, pressure basis b: -(p, div_eps phi)
                trips.emplace_back(ua + c, pb, -sc * Dm[c][b][a]);
              if (ub >= 0)  // continuity row a, velocity basis b: -(div_eps u, q)
                trips.emplace_back(pa, ub + c, -sc * Dm[c][a][b]);
            }
            trips.emplace_back(pa, pb, -stab[a][b]);
            strips.emplace_back(pa, pb, stab[a][b]);
          }
        }
      }

  // Robin boundary mass and surface load on the obstacle walls.
  for (const auto& f : m.facets) {
    if (f.tag != FacetTag::Obstacle) continue;
    const auto g = m.facet_geometry(f);
    const FacetQuad fq = make_facet_quad(m, g);
    double fm[4][4] = {};
    double fphi[4] = {};
    for (int iq = 0; iq < fq.n_q; ++iq)
      for (int a = 0; a < fq.n_nodes; ++a) {
        fphi[a] += fq.w * fq.N[iq][a];
        for (int b = 0; b < fq.n_nodes; ++b)
          fm[a][b] += fq.w * fq.N[iq][a] * fq.N[iq][b];
      }
    const Eigen::Vector2d gv =
        surface_forcing_value(bc.robin.g, sys.indexer, f);
    for (int a = 0; a < fq.n_nodes; ++a) {
      const int32_t ma = m.master[static_cast<size_t>(g.nodes[a])];
      const int32_t ua = sys.udof[static_cast<size_t>(ma)];
      if (ua < 0) continue;
      for (int c = 0; c < 2 && c < dim; ++c) sys.rhs[ua + c] += gv[c] * fphi[a];
      if (sys.robin_coeff != 0.0)
        for (int b = 0; b < fq.n_nodes; ++b) {
          const int32_t mb = m.master[static_cast<size_t>(g.nodes[b])];
          const int32_t ub = sys.udof[static_cast<size_t>(mb)];
          if (ub < 0) continue;
          for (int c = 0; c < dim; ++c)
            trips.emplace_back(ua + c, ub + c, sys.robin_coeff * fm[a][b]);
        }
    }
  }

  if (gauge)
    for (int id = 0; id < n_active; ++id) {
      const int32_t pd = sys.pdof[static_cast<size_t>(id)];
      if (pd < 0 || sys.pmass[pd] == 0.0) continue;
      trips.emplace_back(pd, sys.lambda_dof, sys.pmass[pd]);
      trips.emplace_back(sys.lambda_dof, pd, sys.pmass[pd]);
    }

  sys.K.resize(sys.n_dofs, sys.n_dofs);
  sys.K.setFromTriplets(trips.begin(), trips.end());
  sys.K.makeCompressed();
  sys.S.resize(sys.n_dofs, sys.n_dofs);
  sys.S.setFromTriplets(strips.begin(), strips.end());
  sys.S.makeCompressed();
  return sys;
}

StokesSolution solve_saddle(const SaddleSystem& sys) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(sys.K);
  lu.factorize(sys.K);
  if (lu.info() != Eigen::Success)
    throw FactorizationFailure("sparse LU failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(sys.rhs);
  if (lu.info() != Eigen::Success)
    throw FactorizationFailure("back substitution failed");

  const double bnorm = sys.rhs.norm();
  const double residual =
      bnorm > 0 ? (sys.K * x - sys.rhs).norm() / bnorm : (sys.K * x).norm();
  if (!std::isfinite(residual) || residual > 1e-6)
    throw SingularSystem("solver residual " + std::to_string(residual));

  const Mesh& m = *sys.mesh;
  StokesSolution sol;
  sol.velocity = Field(sys.mesh, m.dim);
  sol.pressure = Field(sys.mesh, 1);
  for (int id = 0; id < m.n_active(); ++id) {
    const int32_t ma = m.master[static_cast<size_t>(id)];
    const int32_t ud = sys.udof[static_cast<size_t>(ma)];
    const int32_t pd = sys.pdof[static_cast<size_t>(ma)];
    for (int c = 0; c < m.dim; ++c)
      sol.velocity.at(id, c) = ud >= 0 ? x[ud + c] : 0.0;
    sol.pressure.at(id, 0) = x[pd];
  }
  sol.diag.lambda = sys.has_multiplier() ? x[sys.lambda_dof] : 0.0;
  sol.diag.residual = residual;

  if (!sys.has_multiplier()) {
    const double shift = region_average(sol.pressure)[0];
    for (int id = 0; id < m.n_active(); ++id) sol.pressure.at(id, 0) -= shift;
    sol.diag.pressure_mean_shift = shift;
  }
  if (!sol.velocity.all_finite() || !sol.pressure.all_finite())
    throw FactorizationFailure("non-finite entries in the solution");

  sol.diag.div_norm = div_eps_norm(sol.velocity, sys.eps);
  sol.diag.obstacle_flux = m.count_facets(FacetTag::Obstacle) > 0
                               ? boundary_net_flux(sol.velocity, FacetTag::Obstacle)
                               : 0.0;
  return sol;
}

double boundary_flux(const StokesSolution& sol, FacetTag tag) {
  return boundary_net_flux(sol.velocity, tag);
}

DivergenceIdentity divergence_identity(const SaddleSystem& sys, const StokesSolution& sol,
                                       const Field& psi) {
  const double eps = sys.eps;
  DivergenceIdentity r;
  r.lhs_volume = volume_grad_pair(sol.velocity, psi, eps);
  r.rhs_surface = surface_flux_pair(sol.velocity, psi, FacetTag::Obstacle);
  r.stab_term = stabilization_pair(sol.pressure, psi, sys.delta);
  r.lambda_term = sys.has_multiplier() ? sol.diag.lambda * integral(psi)[0] : 0.0;
  const double unorm = norm_lp(sol.velocity, 2);
  const double gnorm = seminorm_deps_lp(psi, eps, 2);
  r.scale = std::max({std::abs(r.lhs_volume), std::abs(r.rhs_surface),
                      unorm * gnorm, 1e-300});
  r.raw_rel = std::abs(r.lhs_volume - r.rhs_surface) / r.scale;
  // Discrete continuity: (div_eps u, psi) = -stab(p, psi) + lambda * int(psi),
  // and exact integration by parts gives
  // lhs = rhs_surface - (div_eps u, psi).
  r.corrected_rel =
      std::abs(r.lhs_volume - (r.rhs_surface + r.stab_term - r.lambda_term)) / r.scale;
  return r;
}

EnergyIdentity energy_identity(const SaddleSystem& sys, const StokesSolution& sol) {
  const Mesh& m = *sys.mesh;
  EnergyIdentity e;
  const double dnorm = seminorm_deps_lp(sol.velocity, sys.eps, 2);
  e.viscous = sys.mu * dnorm * dnorm;
  if (m.count_facets(FacetTag::Obstacle) > 0) {
    const double bn = surface_norm_lp(sol.velocity, FacetTag::Obstacle, 2);
    e.robin = sys.robin_coeff * bn * bn;
  }
  e.stabilization = stabilization_pair(sol.pressure, sol.pressure, sys.delta);
  e.lambda_work = sys.has_multiplier()
                      ? -sol.diag.lambda * integral(sol.pressure)[0]
                      : 0.0;
  const auto ui = integral(sol.velocity);
  e.load_f = sys.f[0] * ui[0] + sys.f[1] * ui[1];
  e.load_g = 0.0;
  if (!sys.bc.robin.g.is_zero()) {
    long double acc = 0;
    for (const auto& f : m.facets) {
      if (f.tag != FacetTag::Obstacle) continue;
      const auto g = m.facet_geometry(f);
      const FacetQuad fq = make_facet_quad(m, g);
      const Eigen::Vector2d gv = surface_forcing_value(sys.bc.robin.g, sys.indexer, f);
      for (int iq = 0; iq < fq.n_q; ++iq)
        for (int c = 0; c < 2; ++c) {
          double uval = 0;
          for (int a = 0; a < fq.n_nodes; ++a)
            uval += fq.N[iq][a] * sol.velocity.at(g.nodes[a], c);
          acc += fq.w * gv[c] * uval;
        }
    }
    e.load_g = static_cast<double>(acc);
  }
  const double lhs = e.viscous + e.robin + e.stabilization + e.lambda_work;
  const double rhs = e.load_f + e.load_g;
  const double scale = std::max({std::abs(e.viscous), std::abs(e.robin),
                                 std::abs(e.load_f), std::abs(e.load_g), 1e-300});
  e.rel_gap = std::abs(lhs - rhs) / scale;
  return e;
}

}  // namespace tpm
