#include "tpm/unfolding.hpp"

#include <algorithm>
#include <cmath>

#include "tpm/detail/quadrature.hpp"
#include "tpm/errors.hpp"

namespace tpm {

using detail::FacetQuad;
using detail::Quad;
using detail::make_facet_quad;
using detail::make_quad;

namespace {

double pth_root(double x, int p) { return p == 2 ? std::sqrt(x) : x; }

UnfoldedField unfold_impl(const Field& v, double eps, bool boundary_only) {
  const Mesh& fm = *v.mesh;
  if (fm.dim != 3 || fm.kind != MeshKind::Fine3D)
    throw NonconformingUnfold("unfolding expects a 3D fine-domain field");
  if (std::abs(fm.epsilon - eps) > 1e-12 * eps)
    throw NonconformingUnfold("eps does not match the mesh period");
  const double q = eps / fm.h[0];
  if (std::abs(q - std::round(q)) > 1e-9 || fm.h[0] != fm.h[1])
    throw NonconformingUnfold("eps/h is not an integer");
  const int m = static_cast<int>(std::round(q));

  UnfoldedField u;
  u.fine_mesh = v.mesh;
  u.source = v;
  u.eps = eps;
  u.m = m;
  u.macro_nx = fm.nc[0] / m;
  u.macro_ny = fm.nc[1] / m;
  u.boundary_only = boundary_only;
  u.ref_mesh = std::make_shared<Mesh>(build_cell_mesh_3d(fm.cell, 1.0 / m, fm.nc[2]));

  // Node-to-node conformity: the fluid mask of every macro cell must match
  // the reference cell mask.
  const Mesh& rm = *u.ref_mesh;
  for (int ky = 0; ky < u.macro_ny; ++ky)
    for (int kx = 0; kx < u.macro_nx; ++kx)
      for (int k = 0; k < fm.nc[2]; ++k)
        for (int b = 0; b < m; ++b)
          for (int a = 0; a < m; ++a)
            if (fm.is_fluid(kx * m + a, ky * m + b, k) != rm.is_fluid(a, b, k))
              throw NonconformingUnfold("macro cell mask differs from the reference cell");
  return u;
}

}  // namespace

UnfoldedField unfold(const Field& v, double eps) { return unfold_impl(v, eps, false); }

UnfoldedField unfold_boundary(const Field& trace, double eps) {
  return unfold_impl(trace, eps, true);
}

Field fold_back(const UnfoldedField& u) {
  const Mesh& fm = *u.fine_mesh;
  const Mesh& rm = *u.ref_mesh;
  Field out(u.fine_mesh, u.source.ncomp);
  for (int ky = 0; ky < u.macro_ny; ++ky)
    for (int kx = 0; kx < u.macro_nx; ++kx)
      for (int id = 0; id < rm.n_active(); ++id) {
        const auto ijk = rm.node_ijk(rm.node_struct[static_cast<size_t>(id)]);
        const int32_t fid = fm.node_id[static_cast<size_t>(
            fm.node_index(kx * u.m + ijk[0], ky * u.m + ijk[1], ijk[2]))];
        if (fid < 0) continue;
        for (int c = 0; c < out.ncomp; ++c)
          out.at(fid, c) = u.value(kx, ky, rm.node_struct[static_cast<size_t>(id)], c);
      }
  return out;
}

namespace {

/// Gathers the micro nodal values of one reference element.
struct MicroGather {
  const UnfoldedField& u;
  int kx, ky;
  double vals[8][8];  // [node][comp]

  void load(const int32_t ref_nodes[8], int nn, int ncomp) {
    const Mesh& rm = *u.ref_mesh;
    for (int a = 0; a < nn; ++a) {
      const int32_t rs = rm.node_struct[static_cast<size_t>(ref_nodes[a])];
      for (int c = 0; c < ncomp; ++c) vals[a][c] = u.value(kx, ky, rs, c);
    }
  }
};

}  // namespace

double unfolded_norm_lp(const UnfoldedField& u, int p) {
  const Mesh& rm = *u.ref_mesh;
  const Quad q = make_quad(rm);
  const double cell_area = u.eps * u.eps;  // |Y'_{k',eps}| with |Y'| = 1
  int32_t nodes[8];
  long double acc = 0;
  for (int ky = 0; ky < u.macro_ny; ++ky)
    for (int kx = 0; kx < u.macro_nx; ++kx) {
      MicroGather g{u, kx, ky, {}};
      long double cell_acc = 0;
      for (int k = 0; k < rm.nc[2]; ++k)
        for (int j = 0; j < rm.nc[1]; ++j)
          for (int i = 0; i < rm.nc[0]; ++i) {
            if (!rm.is_fluid(i, j, k)) continue;
            rm.cell_nodes(i, j, k, nodes);
            g.load(nodes, q.n_nodes, u.source.ncomp);
            for (int iq = 0; iq < q.n_q; ++iq) {
              double s2 = 0;
              for (int c = 0; c < u.source.ncomp; ++c) {
                double val = 0;
                for (int a = 0; a < q.n_nodes; ++a) val += q.N[iq][a] * g.vals[a][c];
                s2 += val * val;
              }
              cell_acc += q.w * (p == 2 ? s2 : std::sqrt(s2));
            }
          }
      acc += cell_area * cell_acc;
    }
  return pth_root(static_cast<double>(acc), p);
}

double unfolded_grad_norm_lp(const UnfoldedField& u, int p) {
  const Mesh& rm = *u.ref_mesh;
  const Quad q = make_quad(rm);
  const double cell_area = u.eps * u.eps;
  int32_t nodes[8];
  long double acc = 0;
  for (int ky = 0; ky < u.macro_ny; ++ky)
    for (int kx = 0; kx < u.macro_nx; ++kx) {
      MicroGather g{u, kx, ky, {}};
      long double cell_acc = 0;
      for (int k = 0; k < rm.nc[2]; ++k)
        for (int j = 0; j < rm.nc[1]; ++j)
          for (int i = 0; i < rm.nc[0]; ++i) {
            if (!rm.is_fluid(i, j, k)) continue;
            rm.cell_nodes(i, j, k, nodes);
            g.load(nodes, q.n_nodes, u.source.ncomp);
            for (int iq = 0; iq < q.n_q; ++iq) {
              double frob2 = 0;
              for (int c = 0; c < u.source.ncomp; ++c)
                for (int d = 0; d < 3; ++d) {
                  double gv = 0;
                  for (int a = 0; a < q.n_nodes; ++a) gv += q.dN[iq][a][d] * g.vals[a][c];
                  frob2 += gv * gv;
                }
              cell_acc += q.w * (p == 2 ? frob2 : std::sqrt(frob2));
            }
          }
      acc += cell_area * cell_acc;
    }
  return pth_root(static_cast<double>(acc), p);
}

namespace {

template <typename Fn>
void for_each_ref_obstacle_facet(const UnfoldedField& u, Fn&& fn) {
  const Mesh& rm = *u.ref_mesh;
  for (const auto& f : rm.facets) {
    if (f.tag != FacetTag::Obstacle) continue;
    fn(f, rm.facet_geometry(f));
  }
}

}  // namespace

double unfolded_boundary_norm_lp(const UnfoldedField& u, int p) {
  const Mesh& rm = *u.ref_mesh;
  const double cell_area = u.eps * u.eps;
  long double acc = 0;
  for (int ky = 0; ky < u.macro_ny; ++ky)
    for (int kx = 0; kx < u.macro_nx; ++kx) {
      long double cell_acc = 0;
      for_each_ref_obstacle_facet(u, [&](const Mesh::Facet&, const Mesh::FacetGeometry& g) {
        const FacetQuad fq = make_facet_quad(rm, g);
        double vals[4][8];
        for (int a = 0; a < fq.n_nodes; ++a) {
          const int32_t rs = rm.node_struct[static_cast<size_t>(g.nodes[a])];
          for (int c = 0; c < u.source.ncomp; ++c) vals[a][c] = u.value(kx, ky, rs, c);
        }
        for (int iq = 0; iq < fq.n_q; ++iq) {
          double s2 = 0;
          for (int c = 0; c < u.source.ncomp; ++c) {
            double val = 0;
            for (int a = 0; a < fq.n_nodes; ++a) val += fq.N[iq][a] * vals[a][c];
            s2 += val * val;
          }
          cell_acc += fq.w * (p == 2 ? s2 : std::sqrt(s2));
        }
      });
      acc += cell_area * cell_acc;
    }
  return pth_root(static_cast<double>(acc), p);
}

std::vector<double> unfolded_boundary_average(const UnfoldedField& u) {
  const Mesh& rm = *u.ref_mesh;
  const int nc = u.source.ncomp;
  std::vector<long double> acc(static_cast<size_t>(nc), 0.0L);
  long double measure = 0;
  for (int ky = 0; ky < u.macro_ny; ++ky)
    for (int kx = 0; kx < u.macro_nx; ++kx)
      for_each_ref_obstacle_facet(u, [&](const Mesh::Facet&, const Mesh::FacetGeometry& g) {
        const FacetQuad fq = make_facet_quad(rm, g);
        measure += g.area;
        double vals[4][8];
        for (int a = 0; a < fq.n_nodes; ++a) {
          const int32_t rs = rm.node_struct[static_cast<size_t>(g.nodes[a])];
          for (int c = 0; c < nc; ++c) vals[a][c] = u.value(kx, ky, rs, c);
        }
        for (int iq = 0; iq < fq.n_q; ++iq)
          for (int c = 0; c < nc; ++c) {
            double val = 0;
            for (int a = 0; a < fq.n_nodes; ++a) val += fq.N[iq][a] * vals[a][c];
            acc[static_cast<size_t>(c)] += fq.w * val;
          }
      });
  if (!(measure > 0)) throw EmptyRegion("no obstacle boundary to average over");
  std::vector<double> out(static_cast<size_t>(nc));
  for (int c = 0; c < nc; ++c)
    out[static_cast<size_t>(c)] = static_cast<double>(acc[static_cast<size_t>(c)] / measure);
  return out;
}

double boundary_cell_spread(const UnfoldedField& u) {
  const Mesh& rm = *u.ref_mesh;
  double spread = 0;
  for_each_ref_obstacle_facet(u, [&](const Mesh::Facet&, const Mesh::FacetGeometry& g) {
    for (int a = 0; a < g.n_nodes; ++a) {
      const int32_t rs = rm.node_struct[static_cast<size_t>(g.nodes[a])];
      for (int c = 0; c < u.source.ncomp; ++c) {
        const double ref = u.value(0, 0, rs, c);
        for (int ky = 0; ky < u.macro_ny; ++ky)
          for (int kx = 0; kx < u.macro_nx; ++kx)
            spread = std::max(spread, std::abs(u.value(kx, ky, rs, c) - ref));
      }
    }
  });
  return spread;
}

Field periodic_replicate(const Field& ref_field, MeshPtr fine_mesh) {
  const Mesh& rm = *ref_field.mesh;
  const Mesh& fm = *fine_mesh;
  if (rm.dim != 3 || fm.dim != 3 || rm.nc[2] != fm.nc[2])
    throw NonconformingUnfold("replicate expects matching 3D meshes");
  const int m = rm.nc[0];
  if (fm.nc[0] % m != 0 || fm.nc[1] % m != 0)
    throw NonconformingUnfold("fine mesh is not a multiple of the reference cell");
  Field out(fine_mesh, ref_field.ncomp);
  for (int id = 0; id < fm.n_active(); ++id) {
    const auto [i, j, k] = fm.node_ijk(fm.node_struct[static_cast<size_t>(id)]);
    const int a = i % m, b = j % m;
    const long long rs = rm.node_index(a, b, k);
    for (int c = 0; c < out.ncomp; ++c) out.at(id, c) = ref_field.at_struct(rs, c);
  }
  return out;
}

double UnfoldingReport::max_rel() const {
  double m = 0;
  for (const auto& r : rows) m = std::max(m, r.rel);
  return m;
}

UnfoldingReport verify_unfolding_identities(const Field& v, double eps) {
  UnfoldingReport rep;
  const UnfoldedField u = unfold(v, eps);
  auto rel = [](double lhs, double rhs) {
    const double s = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return std::abs(lhs - rhs) / s;
  };
  for (int p : {1, 2}) {
    {
      const double lhs = unfolded_norm_lp(u, p);
      const double rhs = norm_lp(v, p);  // |Y'| = 1
      rep.rows.push_back({"normv", eps, p, lhs, rhs, rel(lhs, rhs)});
    }
    {
      const double lhs = unfolded_grad_norm_lp(u, p);
      const double rhs = eps * seminorm_deps_lp(v, eps, p);
      rep.rows.push_back({"normDv", eps, p, lhs, rhs, rel(lhs, rhs)});
    }
    {
      const double lhs = unfolded_boundary_norm_lp(u, p);
      const double rhs =
          std::pow(eps, 1.0 / p) * surface_norm_lp(v, FacetTag::Obstacle, p);
      rep.rows.push_back({"unf_boun", eps, p, lhs, rhs, rel(lhs, rhs)});
    }
  }
  return rep;
}

}  // namespace tpm
