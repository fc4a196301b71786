#include "tpm/operators.hpp"

#include <cmath>
#include <random>

#include "tpm/detail/quadrature.hpp"
#include "tpm/errors.hpp"

namespace tpm {

using detail::FacetQuad;
using detail::Quad;
using detail::make_facet_quad;
using detail::make_quad;

bool Field::all_finite() const {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void Field::sync_periodic() {
  for (int id = 0; id < mesh->n_active(); ++id) {
    const int32_t m = mesh->master[static_cast<size_t>(id)];
    if (m != id)
      for (int c = 0; c < ncomp; ++c) at(id, c) = at(m, c);
  }
}

namespace {

template <typename PerCell>
void for_each_supported_cell(const Field& v, PerCell&& fn) {
  const Mesh& m = *v.mesh;
  const int nz = m.dim == 3 ? m.nc[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < m.nc[1]; ++j)
      for (int i = 0; i < m.nc[0]; ++i) {
        const long long c = m.cell_index(i, j, m.dim == 3 ? k : 0);
        if (!v.cell_in_support(c)) continue;
        fn(i, j, k, c);
      }
}

double pth_root(double x, int p) { return p == 2 ? std::sqrt(x) : x; }

}  // namespace

TensorField anisotropic_gradient(const Field& v, AnisotropyParameter eps) {
  const Mesh& m = *v.mesh;
  TensorField t(v.mesh, v.ncomp, m.dim);
  const Quad q = make_quad(m);
  // Element-center derivatives: average of the Gauss-point derivatives
  // (exact for multilinear data at the centroid).
  int32_t nodes[8];
  for_each_supported_cell(v, [&](int i, int j, int k, long long cidx) {
    m.cell_nodes(i, j, m.dim == 3 ? k : 0, nodes);
    for (int c = 0; c < v.ncomp; ++c)
      for (int d = 0; d < m.dim; ++d) {
        long double g = 0;
        for (int iq = 0; iq < q.n_q; ++iq)
          for (int a = 0; a < q.n_nodes; ++a)
            g += q.dN[iq][a][d] * v.at(nodes[a], c);
        double val = static_cast<double>(g) / q.n_q;
        if (m.dim == 3 && d == 2) val /= eps.epsilon;
        t.at(cidx, c, d) = val;
      }
  });
  return t;
}

TensorField grad_eps(const Field& w, AnisotropyParameter eps) {
  if (w.ncomp != 1) throw Error("grad_eps expects a scalar field");
  return anisotropic_gradient(w, eps);
}

TensorField div_eps(const Field& v, AnisotropyParameter eps) {
  const Mesh& m = *v.mesh;
  if (v.ncomp != m.dim) throw Error("div_eps expects a dim-component field");
  TensorField g = anisotropic_gradient(v, eps);
  TensorField out(v.mesh, 1, 1);
  for (long long c = 0; c < m.n_struct_cells(); ++c) {
    double s = 0;
    for (int d = 0; d < m.dim; ++d) s += g.at(c, d, d);
    out.at(c, 0, 0) = s;
  }
  return out;
}

double norm_lp(const Field& v, int p) {
  const Mesh& m = *v.mesh;
  const Quad q = make_quad(m);
  int32_t nodes[8];
  long double acc = 0;
  for_each_supported_cell(v, [&](int i, int j, int k, long long) {
    m.cell_nodes(i, j, m.dim == 3 ? k : 0, nodes);
    for (int iq = 0; iq < q.n_q; ++iq) {
      double s2 = 0;
      for (int c = 0; c < v.ncomp; ++c) {
        double val = 0;
        for (int a = 0; a < q.n_nodes; ++a) val += q.N[iq][a] * v.at(nodes[a], c);
        s2 += val * val;
      }
      acc += q.w * (p == 2 ? s2 : std::sqrt(s2));
    }
  });
  return pth_root(static_cast<double>(acc), p);
}

double seminorm_deps_lp(const Field& v, double epsilon, int p) {
  const Mesh& m = *v.mesh;
  const Quad q = make_quad(m);
  const double zscale = m.dim == 3 ? 1.0 / epsilon : 1.0;
  int32_t nodes[8];
  long double acc = 0;
  for_each_supported_cell(v, [&](int i, int j, int k, long long) {
    m.cell_nodes(i, j, m.dim == 3 ? k : 0, nodes);
    for (int iq = 0; iq < q.n_q; ++iq) {
      double frob2 = 0;
      for (int c = 0; c < v.ncomp; ++c)
        for (int d = 0; d < m.dim; ++d) {
          double g = 0;
          for (int a = 0; a < q.n_nodes; ++a) g += q.dN[iq][a][d] * v.at(nodes[a], c);
          if (d == 2) g *= zscale;
          frob2 += g * g;
        }
      acc += q.w * (p == 2 ? frob2 : std::sqrt(frob2));
    }
  });
  return pth_root(static_cast<double>(acc), p);
}

double deps_inner(const Field& u, const Field& w, double epsilon) {
  const Mesh& m = *u.mesh;
  if (u.ncomp != w.ncomp) throw Error("deps_inner expects matching components");
  const Quad q = make_quad(m);
  const double zscale = m.dim == 3 ? 1.0 / epsilon : 1.0;
  int32_t nodes[8];
  long double acc = 0;
  for_each_supported_cell(u, [&](int i, int j, int k, long long) {
    m.cell_nodes(i, j, m.dim == 3 ? k : 0, nodes);
    for (int iq = 0; iq < q.n_q; ++iq)
      for (int c = 0; c < u.ncomp; ++c)
        for (int d = 0; d < m.dim; ++d) {
          double gu = 0, gw = 0;
          for (int a = 0; a < q.n_nodes; ++a) {
            gu += q.dN[iq][a][d] * u.at(nodes[a], c);
            gw += q.dN[iq][a][d] * w.at(nodes[a], c);
          }
          const double s = d == 2 ? zscale : 1.0;
          acc += q.w * s * gu * s * gw;
        }
  });
  return static_cast<double>(acc);
}

double div_eps_norm(const Field& v, double epsilon) {
  const Mesh& m = *v.mesh;
  if (v.ncomp != m.dim) throw Error("div_eps_norm expects a dim-component field");
  const Quad q = make_quad(m);
  const double zscale = m.dim == 3 ? 1.0 / epsilon : 1.0;
  int32_t nodes[8];
  long double acc = 0;
  for_each_supported_cell(v, [&](int i, int j, int k, long long) {
    m.cell_nodes(i, j, m.dim == 3 ? k : 0, nodes);
    for (int iq = 0; iq < q.n_q; ++iq) {
      double div = 0;
      for (int d = 0; d < m.dim; ++d) {
        double g = 0;
        for (int a = 0; a < q.n_nodes; ++a) g += q.dN[iq][a][d] * v.at(nodes[a], d);
        div += d == 2 ? g * zscale : g;
      }
      acc += q.w * div * div;
    }
  });
  return std::sqrt(static_cast<double>(acc));
}

std::vector<double> integral(const Field& v) {
  const Mesh& m = *v.mesh;
  const Quad q = make_quad(m);
  int32_t nodes[8];
  std::vector<long double> acc(static_cast<size_t>(v.ncomp), 0.0L);
  for_each_supported_cell(v, [&](int i, int j, int k, long long) {
    m.cell_nodes(i, j, m.dim == 3 ? k : 0, nodes);
    for (int iq = 0; iq < q.n_q; ++iq)
      for (int c = 0; c < v.ncomp; ++c) {
        double val = 0;
        for (int a = 0; a < q.n_nodes; ++a) val += q.N[iq][a] * v.at(nodes[a], c);
        acc[static_cast<size_t>(c)] += q.w * val;
      }
  });
  std::vector<double> out(acc.begin(), acc.end());
  return out;
}

std::vector<double> region_average(const Field& v) {
  const double vol = v.domain_volume();
  if (!(vol > 0)) throw EmptyRegion("field domain has zero measure");
  std::vector<double> out = integral(v);
  for (double& x : out) x /= vol;
  return out;
}

namespace {

template <typename PerFacet>
void for_each_tagged_facet(const Field& v, FacetTag tag, PerFacet&& fn) {
  const Mesh& m = *v.mesh;
  for (const auto& f : m.facets) {
    if (f.tag != tag) continue;
    fn(f, m.facet_geometry(f));
  }
}

}  // namespace

std::vector<double> boundary_average(const Field& v, FacetTag tag) {
  const Mesh& m = *v.mesh;
  long double area = 0;
  std::vector<long double> acc(static_cast<size_t>(v.ncomp), 0.0L);
  for_each_tagged_facet(v, tag, [&](const Mesh::Facet&, const Mesh::FacetGeometry& g) {
    const FacetQuad fq = make_facet_quad(m, g);
    area += g.area;
    for (int iq = 0; iq < fq.n_q; ++iq)
      for (int c = 0; c < v.ncomp; ++c) {
        double val = 0;
        for (int a = 0; a < fq.n_nodes; ++a) val += fq.N[iq][a] * v.at(g.nodes[a], c);
        acc[static_cast<size_t>(c)] += fq.w * val;
      }
  });
  if (!(area > 0))
    throw EmptyRegion(std::string("no facets tagged ") + facet_tag_name(tag));
  std::vector<double> out(v.ncomp);
  for (int c = 0; c < v.ncomp; ++c)
    out[static_cast<size_t>(c)] = static_cast<double>(acc[static_cast<size_t>(c)] / area);
  return out;
}

double surface_norm_lp(const Field& v, FacetTag tag, int p) {
  const Mesh& m = *v.mesh;
  long double acc = 0;
  for_each_tagged_facet(v, tag, [&](const Mesh::Facet&, const Mesh::FacetGeometry& g) {
    const FacetQuad fq = make_facet_quad(m, g);
    for (int iq = 0; iq < fq.n_q; ++iq) {
      double s2 = 0;
      for (int c = 0; c < v.ncomp; ++c) {
        double val = 0;
        for (int a = 0; a < fq.n_nodes; ++a) val += fq.N[iq][a] * v.at(g.nodes[a], c);
        s2 += val * val;
      }
      acc += fq.w * (p == 2 ? s2 : std::sqrt(s2));
    }
  });
  return pth_root(static_cast<double>(acc), p);
}

double boundary_net_flux(const Field& u, FacetTag tag) {
  const Mesh& m = *u.mesh;
  if (u.ncomp != m.dim) throw Error("boundary_net_flux expects a dim-component field");
  long double acc = 0;
  for_each_tagged_facet(u, tag, [&](const Mesh::Facet& f, const Mesh::FacetGeometry& g) {
    const int axis = f.face / 2;
    const double sgn = (f.face % 2) ? 1.0 : -1.0;
    const FacetQuad fq = make_facet_quad(m, g);
    for (int iq = 0; iq < fq.n_q; ++iq) {
      double val = 0;
      for (int a = 0; a < fq.n_nodes; ++a) val += fq.N[iq][a] * u.at(g.nodes[a], axis);
      acc += fq.w * sgn * val;
    }
  });
  return static_cast<double>(acc);
}

double surface_flux_pair(const Field& u, const Field& psi, FacetTag tag) {
  const Mesh& m = *u.mesh;
  if (u.ncomp != m.dim || psi.ncomp != 1)
    throw Error("surface_flux_pair expects vector u and scalar psi");
  long double acc = 0;
  for_each_tagged_facet(u, tag, [&](const Mesh::Facet& f, const Mesh::FacetGeometry& g) {
    const int axis = f.face / 2;
    const double sgn = (f.face % 2) ? 1.0 : -1.0;
    const FacetQuad fq = make_facet_quad(m, g);
    for (int iq = 0; iq < fq.n_q; ++iq) {
      double un = 0, pv = 0;
      for (int a = 0; a < fq.n_nodes; ++a) {
        un += fq.N[iq][a] * u.at(g.nodes[a], axis);
        pv += fq.N[iq][a] * psi.at(g.nodes[a], 0);
      }
      acc += fq.w * sgn * un * pv;
    }
  });
  return static_cast<double>(acc);
}

double volume_grad_pair(const Field& u, const Field& psi, double epsilon) {
  const Mesh& m = *u.mesh;
  if (u.ncomp != m.dim || psi.ncomp != 1)
    throw Error("volume_grad_pair expects vector u and scalar psi");
  const Quad q = make_quad(m);
  const double zscale = m.dim == 3 ? 1.0 / epsilon : 1.0;
  int32_t nodes[8];
  long double acc = 0;
  for_each_supported_cell(u, [&](int i, int j, int k, long long) {
    m.cell_nodes(i, j, m.dim == 3 ? k : 0, nodes);
    for (int iq = 0; iq < q.n_q; ++iq)
      for (int d = 0; d < m.dim; ++d) {
        double uval = 0, gval = 0;
        for (int a = 0; a < q.n_nodes; ++a) {
          uval += q.N[iq][a] * u.at(nodes[a], d);
          gval += q.dN[iq][a][d] * psi.at(nodes[a], 0);
        }
        if (d == 2) gval *= zscale;
        acc += q.w * uval * gval;
      }
  });
  return static_cast<double>(acc);
}

double div_pair(const Field& u, const Field& psi, double epsilon) {
  const Mesh& m = *u.mesh;
  if (u.ncomp != m.dim || psi.ncomp != 1)
    throw Error("div_pair expects vector u and scalar psi");
  const Quad q = make_quad(m);
  const double zscale = m.dim == 3 ? 1.0 / epsilon : 1.0;
  int32_t nodes[8];
  long double acc = 0;
  for_each_supported_cell(u, [&](int i, int j, int k, long long) {
    m.cell_nodes(i, j, m.dim == 3 ? k : 0, nodes);
    for (int iq = 0; iq < q.n_q; ++iq) {
      double div = 0, pval = 0;
      for (int a = 0; a < q.n_nodes; ++a) {
        pval += q.N[iq][a] * psi.at(nodes[a], 0);
        for (int d = 0; d < m.dim; ++d) {
          const double g = q.dN[iq][a][d] * u.at(nodes[a], d);
          div += d == 2 ? g * zscale : g;
        }
      }
      acc += q.w * div * pval;
    }
  });
  return static_cast<double>(acc);
}

double stabilization_pair(const Field& p, const Field& q_field, double delta) {
  const Mesh& m = *p.mesh;
  if (p.ncomp != 1 || q_field.ncomp != 1)
    throw Error("stabilization_pair expects scalar fields");
  const Quad q = make_quad(m);
  int32_t nodes[8];
  long double acc = 0;
  for_each_supported_cell(p, [&](int i, int j, int k, long long) {
    m.cell_nodes(i, j, m.dim == 3 ? k : 0, nodes);
    for (int iq = 0; iq < q.n_q; ++iq)
      for (int d = 0; d < m.dim; ++d) {
        double gp = 0, gq = 0;
        for (int a = 0; a < q.n_nodes; ++a) {
          gp += q.dN[iq][a][d] * p.at(nodes[a], 0);
          gq += q.dN[iq][a][d] * q_field.at(nodes[a], 0);
        }
        acc += q.w * delta * m.h[d] * m.h[d] * gp * gq;
      }
  });
  return static_cast<double>(acc);
}

VerticalAverage vertical_average(const Field& v) {
  const Mesh& m3 = *v.mesh;
  if (m3.dim != 3) throw Error("vertical_average expects a 3D field");
  auto surf = std::make_shared<Mesh>(build_surface_mesh(m3));
  Field out(surf, v.ncomp);
  const int nz = m3.snz();
  const double hz = m3.h[2];
  for (int id2 = 0; id2 < surf->n_active(); ++id2) {
    const auto [i, j, k2] = surf->node_ijk(surf->node_struct[static_cast<size_t>(id2)]);
    (void)k2;
    for (int c = 0; c < v.ncomp; ++c) {
      long double acc = 0;
      for (int k = 0; k < nz; ++k) {
        const double w = (k == 0 || k == nz - 1) ? 0.5 * hz : hz;
        acc += w * v.at_struct(m3.node_index(i, j, k), c);
      }
      out.at(id2, c) = static_cast<double>(acc);
    }
  }
  const int masked = static_cast<int>(surf->n_struct_nodes()) - surf->n_active();
  return {std::move(out), masked};
}

Field extend_by_zero(const Field& v, MeshPtr box) {
  const Mesh& src = *v.mesh;
  if (box->dim != src.dim || box->nc != src.nc || box->h != src.h ||
      box->origin != src.origin)
    throw Error("extension target must share the source lattice");
  Field out(box, v.ncomp);
  for (int id = 0; id < src.n_active(); ++id) {
    const int32_t s = src.node_struct[static_cast<size_t>(id)];
    const int32_t bid = box->node_id[static_cast<size_t>(s)];
    for (int c = 0; c < v.ncomp; ++c) out.at(bid, c) = v.at(id, c);
  }
  out.support = src.cell_fluid;
  return out;
}

bool node_on_outer_boundary(const Mesh& m, int32_t structured) {
  const auto [i, j, k] = m.node_ijk(structured);
  if (!m.periodic_x && (i == 0 || i == m.nc[0])) return true;
  if (!m.periodic_y && (j == 0 || j == m.nc[1])) return true;
  if (m.dim == 3 && (k == 0 || k == m.nc[2])) return true;
  return false;
}

Field random_field(MeshPtr mesh, int ncomp, uint64_t seed, bool zero_on_outer_boundary) {
  Field f(mesh, ncomp);
  std::mt19937_64 rng(seed);
  auto uniform_sym = [&rng]() {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  };
  for (int id = 0; id < mesh->n_active(); ++id) {
    const bool zero = zero_on_outer_boundary &&
                      node_on_outer_boundary(*mesh, mesh->node_struct[static_cast<size_t>(id)]);
    for (int c = 0; c < ncomp; ++c) {
      const double val = uniform_sym();  // consume deterministically even when zeroed
      f.at(id, c) = zero ? 0.0 : val;
    }
  }
  f.sync_periodic();
  return f;
}

}  // namespace tpm
