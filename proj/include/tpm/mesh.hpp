#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "tpm/geometry.hpp"

namespace tpm {

enum class FacetTag : uint8_t { Exterior, Obstacle, Top, Bottom };

const char* facet_tag_name(FacetTag t);

enum class MeshKind : uint8_t { Fine3D, Cell3D, Cell2D, Box3D, Box2D, Surface2D };

/// Structured rectangular/hexahedral mesh with an obstacle mask, tagged
/// boundary facets and (for cell meshes) periodic identification of the
/// lateral faces.  Nodes and cells are addressed by structured (i,j,k)
/// indices; only nodes adjacent to at least one fluid cell are active.
/// Immutable after construction.
struct Mesh {
  int dim = 3;
  MeshKind kind = MeshKind::Box3D;
  std::array<int, 3> nc{0, 0, 0};      // cells per axis (nc[2] = 0 in 2D)
  std::array<double, 3> h{0, 0, 0};    // spacing per axis
  std::array<double, 3> origin{0, 0, 0};
  bool periodic_x = false, periodic_y = false;

  // Geometry provenance.
  UnitCell cell;        // microstructure (kind None for plain boxes)
  double epsilon = 0.0; // period of the perforation (fine meshes), else 0
  Rect omega;           // horizontal extent

  std::vector<uint8_t> cell_fluid;   // per structured cell
  std::vector<int32_t> node_id;      // structured node -> active id, -1 if inactive
  std::vector<int32_t> node_struct;  // active id -> structured node
  std::vector<int32_t> master;       // active id -> periodic master active id

  // Faces: 0:-x 1:+x 2:-y 3:+y 4:-z 5:+z.
  struct Facet {
    int32_t cell_i, cell_j, cell_k;
    uint8_t face;
    FacetTag tag;
  };
  std::vector<Facet> facets;  // boundary facets of fluid cells, deterministic order

  double fluid_volume = 0.0;               // sum over fluid cells
  double obstacle_area_measured = 0.0;     // footprint staircase area (per cell copy)
  double obstacle_perimeter_measured = 0.0;// footprint staircase perimeter (per cell copy)
  int obstacle_copies = 0;

  // ---- structured helpers ----
  int snx() const { return nc[0] + 1; }
  int sny() const { return nc[1] + 1; }
  int snz() const { return dim == 3 ? nc[2] + 1 : 1; }
  long long n_struct_nodes() const { return 1LL * snx() * sny() * snz(); }
  long long n_struct_cells() const {
    return 1LL * nc[0] * nc[1] * (dim == 3 ? nc[2] : 1);
  }
  int n_active() const { return static_cast<int>(node_struct.size()); }

  long long node_index(int i, int j, int k) const {
    return (static_cast<long long>(k) * sny() + j) * snx() + i;
  }
  long long cell_index(int i, int j, int k) const {
    return (static_cast<long long>(k) * nc[1] + j) * nc[0] + i;
  }
  bool is_fluid(int i, int j, int k) const {
    return cell_fluid[static_cast<size_t>(cell_index(i, j, k))] != 0;
  }
  std::array<double, 3> node_coord(int i, int j, int k) const {
    return {origin[0] + i * h[0], origin[1] + j * h[1], origin[2] + k * h[2]};
  }
  std::array<int, 3> node_ijk(int32_t structured) const {
    const int i = static_cast<int>(structured % snx());
    const int j = static_cast<int>((structured / snx()) % sny());
    const int k = static_cast<int>(structured / (1LL * snx() * sny()));
    return {i, j, k};
  }

  /// Active ids of a cell's corner nodes (4 in 2D, 8 in 3D), lexicographic
  /// in (i,j,k).  All corners of a fluid cell are active.
  void cell_nodes(int i, int j, int k, int32_t out[8]) const;

  /// Active ids of a facet's corner nodes (2 in 2D, 4 in 3D) plus its
  /// outward normal (pointing out of the owning fluid cell) and area.
  struct FacetGeometry {
    int32_t nodes[4];
    int n_nodes;
    std::array<double, 3> normal;
    double area;
    std::array<double, 2> tangential_h;  // in-plane spacings (quadrature)
  };
  FacetGeometry facet_geometry(const Facet& f) const;

  double cell_volume() const { return h[0] * h[1] * (dim == 3 ? h[2] : 1.0); }

  int count_facets(FacetTag t) const;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// 2D footprint of the obstacle on an m x m cell-local grid over Y'
/// (cell-center in/out staircase rule; grid-exact for conforming squares).
struct FootprintMask {
  int m = 0;                  // local cells per axis
  std::vector<uint8_t> solid; // m*m, 1 = obstacle
  double area = 0.0;          // staircase area in Y' units
  double perimeter = 0.0;     // staircase perimeter in Y' units
  int solid_count = 0;
};

FootprintMask build_footprint(const ObstacleShape& shape, int m);

/// Rescaled fine mesh on omega_eps x (0,1): horizontal spacing h
/// (eps/h integer), `layers` vertical cells.  Exterior/top/bottom boundaries
/// are tagged; obstacle walls are tagged Obstacle.
Mesh build_mesh(const PerforatedDomain& domain, double h, int layers);

/// 3D cell mesh on Y_f = Y'_f x (0,1): periodic lateral faces, Dirichlet
/// top/bottom tags, obstacle boundary tagged.  layers = 0 selects 1/h.
Mesh build_cell_mesh_3d(const UnitCell& cell, double h, int layers = 0);

/// 2D cell mesh on Y'_f, periodic in both directions.
Mesh build_cell_mesh_2d(const UnitCell& cell, double h);

/// Unmasked copy of `m` on the same lattice (zero-extension target).
Mesh build_box_mesh_like(const Mesh& m);

/// 2D horizontal mesh under a 3D mesh (for vertical averages); keeps the
/// obstacle footprint mask.
Mesh build_surface_mesh(const Mesh& m3);

}  // namespace tpm
