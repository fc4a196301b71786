#include "tpm/mesh.hpp"

#include <cmath>
#include <string>

#include "tpm/errors.hpp"

namespace tpm {

const char* facet_tag_name(FacetTag t) {
  switch (t) {
    case FacetTag::Exterior: return "exterior";
    case FacetTag::Obstacle: return "obstacle";
    case FacetTag::Top: return "top";
    case FacetTag::Bottom: return "bottom";
  }
  return "?";
}

void Mesh::cell_nodes(int i, int j, int k, int32_t out[8]) const {
  int n = 0;
  const int kz = dim == 3 ? 1 : 0;
  for (int dk = 0; dk <= kz; ++dk)
    for (int dj = 0; dj <= 1; ++dj)
      for (int di = 0; di <= 1; ++di)
        out[n++] = node_id[static_cast<size_t>(node_index(i + di, j + dj, k + dk))];
}

Mesh::FacetGeometry Mesh::facet_geometry(const Facet& f) const {
  FacetGeometry g{};
  const int i = f.cell_i, j = f.cell_j, k = f.cell_k;
  const int axis = f.face / 2;
  const int side = f.face % 2;  // 0: low face, 1: high face
  g.normal = {0, 0, 0};
  g.normal[axis] = side ? 1.0 : -1.0;
  if (dim == 2) {
    g.n_nodes = 2;
    if (axis == 0) {
      const int ii = i + side;
      g.nodes[0] = node_id[static_cast<size_t>(node_index(ii, j, 0))];
      g.nodes[1] = node_id[static_cast<size_t>(node_index(ii, j + 1, 0))];
      g.area = h[1];
      g.tangential_h = {h[1], 0};
    } else {
      const int jj = j + side;
      g.nodes[0] = node_id[static_cast<size_t>(node_index(i, jj, 0))];
      g.nodes[1] = node_id[static_cast<size_t>(node_index(i + 1, jj, 0))];
      g.area = h[0];
      g.tangential_h = {h[0], 0};
    }
    return g;
  }
  g.n_nodes = 4;
  if (axis == 0) {
    const int ii = i + side;
    g.nodes[0] = node_id[static_cast<size_t>(node_index(ii, j, k))];
    g.nodes[1] = node_id[static_cast<size_t>(node_index(ii, j + 1, k))];
    g.nodes[2] = node_id[static_cast<size_t>(node_index(ii, j, k + 1))];
    g.nodes[3] = node_id[static_cast<size_t>(node_index(ii, j + 1, k + 1))];
    g.area = h[1] * h[2];
    g.tangential_h = {h[1], h[2]};
  } else if (axis == 1) {
    const int jj = j + side;
    g.nodes[0] = node_id[static_cast<size_t>(node_index(i, jj, k))];
    g.nodes[1] = node_id[static_cast<size_t>(node_index(i + 1, jj, k))];
    g.nodes[2] = node_id[static_cast<size_t>(node_index(i, jj, k + 1))];
    g.nodes[3] = node_id[static_cast<size_t>(node_index(i + 1, jj, k + 1))];
    g.area = h[0] * h[2];
    g.tangential_h = {h[0], h[2]};
  } else {
    const int kk = k + side;
    g.nodes[0] = node_id[static_cast<size_t>(node_index(i, j, kk))];
    g.nodes[1] = node_id[static_cast<size_t>(node_index(i + 1, j, kk))];
    g.nodes[2] = node_id[static_cast<size_t>(node_index(i, j + 1, kk))];
    g.nodes[3] = node_id[static_cast<size_t>(node_index(i + 1, j + 1, kk))];
    g.area = h[0] * h[1];
    g.tangential_h = {h[0], h[1]};
  }
  return g;
}

int Mesh::count_facets(FacetTag t) const {
  int n = 0;
  for (const auto& f : facets)
    if (f.tag == t) ++n;
  return n;
}

namespace {

bool near_integer(double x, double tol = 1e-9) {
  return std::abs(x - std::round(x)) <= tol * std::max(1.0, std::abs(x));
}

void check_square_conforming(const ObstacleShape& shape, int m) {
  if (shape.kind != ObstacleKind::Square) return;
  // Obstacle edges sit at cell-local +-s/2; grid lines at -1/2 + a/m.
  // Conformity: m*(1 - s)/2 integer (then m*(1 + s)/2 is too, since m is).
  const double q = m * (1.0 - shape.size) / 2.0;
  if (!near_integer(q))
    throw NonconformingSpacing("square side " + std::to_string(shape.size) +
                               " is not grid-aligned at " + std::to_string(m) +
                               " cells per period");
}

}  // namespace

FootprintMask build_footprint(const ObstacleShape& shape, int m) {
  FootprintMask f;
  f.m = m;
  f.solid.assign(static_cast<size_t>(m) * m, 0);
  if (shape.kind == ObstacleKind::None) return f;
  check_square_conforming(shape, m);
  const double hl = 1.0 / m;
  for (int b = 0; b < m; ++b) {
    for (int a = 0; a < m; ++a) {
      const double y1 = -0.5 + (a + 0.5) * hl;
      const double y2 = -0.5 + (b + 0.5) * hl;
      if (shape.contains(y1, y2)) {
        f.solid[static_cast<size_t>(b) * m + a] = 1;
        ++f.solid_count;
      }
    }
  }
  auto solid_at = [&](int a, int b) {
    if (a < 0 || b < 0 || a >= m || b >= m) return false;
    return f.solid[static_cast<size_t>(b) * m + a] != 0;
  };
  int edges = 0;
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a)
      if (solid_at(a, b)) {
        if (!solid_at(a - 1, b)) ++edges;
        if (!solid_at(a + 1, b)) ++edges;
        if (!solid_at(a, b - 1)) ++edges;
        if (!solid_at(a, b + 1)) ++edges;
      }
  f.area = f.solid_count * hl * hl;
  f.perimeter = edges * hl;
  return f;
}

namespace {

struct BuildSpec {
  int dim;
  MeshKind kind;
  std::array<int, 3> nc;
  std::array<double, 3> h;
  std::array<double, 3> origin;
  bool periodic_x = false, periodic_y = false;
  UnitCell cell;
  double epsilon = 0.0;
  Rect omega;
  // obstacle stamping: footprint repeated every `period` cells (0 = single
  // copy covering the whole horizontal grid, i.e. a cell mesh)
  FootprintMask footprint;
  int period = 0;
  // when non-empty, overrides footprint stamping: full horizontal solid mask
  std::vector<uint8_t> horizontal_solid;
};

Mesh finish_build(const BuildSpec& s) {
  Mesh m;
  m.dim = s.dim;
  m.kind = s.kind;
  m.nc = s.nc;
  m.h = s.h;
  m.origin = s.origin;
  m.periodic_x = s.periodic_x;
  m.periodic_y = s.periodic_y;
  m.cell = s.cell;
  m.epsilon = s.epsilon;
  m.omega = s.omega;

  const int nx = s.nc[0], ny = s.nc[1], nz = s.dim == 3 ? s.nc[2] : 1;
  const int fm = s.footprint.m;

  // Obstacle mask: footprint stamped per period (fine mesh) or once (cell mesh).
  m.cell_fluid.assign(static_cast<size_t>(nx) * ny * nz, 1);
  auto footprint_solid = [&](int i, int j) -> bool {
    if (!s.horizontal_solid.empty())
      return s.horizontal_solid[static_cast<size_t>(j) * nx + i] != 0;
    if (fm == 0) return false;
    const int a = s.period ? i % s.period : i;
    const int b = s.period ? j % s.period : j;
    if (a >= fm || b >= fm) return false;
    return s.footprint.solid[static_cast<size_t>(b) * fm + a] != 0;
  };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (footprint_solid(i, j))
          m.cell_fluid[static_cast<size_t>(m.cell_index(i, j, s.dim == 3 ? k : 0))] = 0;

  // Active nodes: corners of fluid cells.
  m.node_id.assign(static_cast<size_t>(m.n_struct_nodes()), -1);
  const int kz = s.dim == 3 ? 1 : 0;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        if (!m.is_fluid(i, j, s.dim == 3 ? k : 0)) continue;
        for (int dk = 0; dk <= kz; ++dk)
          for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di)
              m.node_id[static_cast<size_t>(m.node_index(i + di, j + dj, k + dk))] = 0;
      }
  for (long long n = 0; n < m.n_struct_nodes(); ++n)
    if (m.node_id[static_cast<size_t>(n)] == 0) {
      m.node_id[static_cast<size_t>(n)] = static_cast<int32_t>(m.node_struct.size());
      m.node_struct.push_back(static_cast<int32_t>(n));
    }

  // Periodic master map (lateral faces of cell meshes).
  m.master.resize(m.node_struct.size());
  for (int id = 0; id < m.n_active(); ++id) m.master[static_cast<size_t>(id)] = id;
  if (s.periodic_x || s.periodic_y) {
    for (int id = 0; id < m.n_active(); ++id) {
      auto [i, j, k] = m.node_ijk(m.node_struct[static_cast<size_t>(id)]);
      int mi = i, mj = j;
      if (s.periodic_x && mi == nx) mi = 0;
      if (s.periodic_y && mj == ny) mj = 0;
      if (mi != i || mj != j) {
        const int32_t mid = m.node_id[static_cast<size_t>(m.node_index(mi, mj, k))];
        if (mid < 0) throw Error("periodic master node inactive");
        m.master[static_cast<size_t>(id)] = mid;
      }
    }
  }

  // Boundary facets, deterministic order: cells ascending, faces -x..+z.
  auto neighbor_state = [&](int i, int j, int k, int face) -> int {
    // 0 fluid, 1 solid, 2 outside, 3 periodic-wrap-fluid
    int ni = i, nj = j, nk = k;
    switch (face) {
      case 0: ni = i - 1; break;
      case 1: ni = i + 1; break;
      case 2: nj = j - 1; break;
      case 3: nj = j + 1; break;
      case 4: nk = k - 1; break;
      case 5: nk = k + 1; break;
    }
    bool wrapped = false;
    if (s.periodic_x) {
      if (ni < 0) { ni = nx - 1; wrapped = true; }
      if (ni >= nx) { ni = 0; wrapped = true; }
    }
    if (s.periodic_y) {
      if (nj < 0) { nj = ny - 1; wrapped = true; }
      if (nj >= ny) { nj = 0; wrapped = true; }
    }
    if (ni < 0 || nj < 0 || ni >= nx || nj >= ny || nk < 0 || nk >= nz) return 2;
    const bool fluid = m.is_fluid(ni, nj, s.dim == 3 ? nk : 0);
    if (wrapped) return fluid ? 3 : 1;
    return fluid ? 0 : 1;
  };
  const int n_faces = s.dim == 3 ? 6 : 4;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        if (!m.is_fluid(i, j, s.dim == 3 ? k : 0)) continue;
        for (int face = 0; face < n_faces; ++face) {
          const int st = neighbor_state(i, j, k, face);
          if (st == 0 || st == 3) continue;  // interior or periodic pair
          FacetTag tag;
          if (st == 1) {
            tag = FacetTag::Obstacle;
          } else {
            tag = (face == 4)   ? FacetTag::Bottom
                  : (face == 5) ? FacetTag::Top
                                : FacetTag::Exterior;
          }
          m.facets.push_back({i, j, s.dim == 3 ? k : 0,
                              static_cast<uint8_t>(face), tag});
        }
      }

  long long fluid_cells = 0;
  for (uint8_t c : m.cell_fluid) fluid_cells += c;
  m.fluid_volume = static_cast<double>(fluid_cells) * m.cell_volume();
  m.obstacle_area_measured = s.footprint.area;
  m.obstacle_perimeter_measured = s.footprint.perimeter;
  return m;
}

}  // namespace

Mesh build_mesh(const PerforatedDomain& domain, double h, int layers) {
  if (!(h > 0.0) || layers < 1) throw NonconformingSpacing("need h > 0 and layers >= 1");
  const double q = domain.epsilon / h;
  if (!near_integer(q))
    throw NonconformingSpacing("epsilon/h = " + std::to_string(q) + " not integer");
  const int mcells = static_cast<int>(std::round(q));

  BuildSpec s;
  s.dim = 3;
  s.kind = MeshKind::Fine3D;
  s.nc = {domain.nx_cells * mcells, domain.ny_cells * mcells, layers};
  s.h = {h, h, 1.0 / layers};
  s.origin = {domain.omega.x0, domain.omega.y0, 0.0};
  s.cell = domain.cell;
  s.epsilon = domain.epsilon;
  s.omega = domain.omega;
  s.footprint = build_footprint(domain.cell.shape, mcells);
  s.period = mcells;
  Mesh m = finish_build(s);
  m.obstacle_copies = static_cast<int>(domain.cell_indices.size());
  return m;
}

Mesh build_cell_mesh_3d(const UnitCell& cell, double h, int layers) {
  if (!(h > 0.0)) throw NonconformingSpacing("need h > 0");
  const double q = 1.0 / h;
  if (!near_integer(q)) throw NonconformingSpacing("1/h not integer");
  const int mcells = static_cast<int>(std::round(q));
  if (layers == 0) layers = mcells;

  BuildSpec s;
  s.dim = 3;
  s.kind = MeshKind::Cell3D;
  s.nc = {mcells, mcells, layers};
  s.h = {h, h, 1.0 / layers};
  s.origin = {-0.5, -0.5, 0.0};
  s.periodic_x = s.periodic_y = true;
  s.cell = cell;
  s.omega = Rect{-0.5, -0.5, 0.5, 0.5};
  s.footprint = build_footprint(cell.shape, mcells);
  s.period = 0;
  Mesh m = finish_build(s);
  m.obstacle_copies = cell.shape.kind == ObstacleKind::None ? 0 : 1;
  return m;
}

Mesh build_cell_mesh_2d(const UnitCell& cell, double h) {
  if (!(h > 0.0)) throw NonconformingSpacing("need h > 0");
  const double q = 1.0 / h;
  if (!near_integer(q)) throw NonconformingSpacing("1/h not integer");
  const int mcells = static_cast<int>(std::round(q));

  BuildSpec s;
  s.dim = 2;
  s.kind = MeshKind::Cell2D;
  s.nc = {mcells, mcells, 0};
  s.h = {h, h, 0.0};
  s.origin = {-0.5, -0.5, 0.0};
  s.periodic_x = s.periodic_y = true;
  s.cell = cell;
  s.omega = Rect{-0.5, -0.5, 0.5, 0.5};
  s.footprint = build_footprint(cell.shape, mcells);
  s.period = 0;
  Mesh m = finish_build(s);
  m.obstacle_copies = cell.shape.kind == ObstacleKind::None ? 0 : 1;
  return m;
}

Mesh build_box_mesh_like(const Mesh& src) {
  BuildSpec s;
  s.dim = src.dim;
  s.kind = src.dim == 3 ? MeshKind::Box3D : MeshKind::Box2D;
  s.nc = src.nc;
  s.h = src.h;
  s.origin = src.origin;
  s.periodic_x = src.periodic_x;
  s.periodic_y = src.periodic_y;
  s.cell = build_unit_cell(ObstacleShape::none());
  s.epsilon = src.epsilon;
  s.omega = src.omega;
  return finish_build(s);
}

Mesh build_surface_mesh(const Mesh& m3) {
  if (m3.dim != 3) throw Error("build_surface_mesh needs a 3D mesh");
  BuildSpec s;
  s.dim = 2;
  s.kind = MeshKind::Surface2D;
  s.nc = {m3.nc[0], m3.nc[1], 0};
  s.h = {m3.h[0], m3.h[1], 0.0};
  s.origin = {m3.origin[0], m3.origin[1], 0.0};
  s.periodic_x = m3.periodic_x;
  s.periodic_y = m3.periodic_y;
  s.cell = m3.cell;
  s.epsilon = m3.epsilon;
  s.omega = m3.omega;
  s.horizontal_solid.assign(static_cast<size_t>(m3.nc[0]) * m3.nc[1], 0);
  for (int j = 0; j < m3.nc[1]; ++j)
    for (int i = 0; i < m3.nc[0]; ++i)
      s.horizontal_solid[static_cast<size_t>(j) * m3.nc[0] + i] =
          m3.cell_fluid[static_cast<size_t>(m3.cell_index(i, j, 0))] ? 0 : 1;
  Mesh m = finish_build(s);
  m.obstacle_copies = m3.obstacle_copies;
  m.obstacle_area_measured = m3.obstacle_area_measured;
  m.obstacle_perimeter_measured = m3.obstacle_perimeter_measured;
  return m;
}

}  // namespace tpm
