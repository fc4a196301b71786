#include <doctest.h>

#include <cmath>
#include <memory>

#include "tpm/operators.hpp"

using namespace tpm;

namespace {

MeshPtr fine_mesh(const char* shape, double size, double eps, int cells_per_eps,
                  int layers) {
  ObstacleShape s;
  if (shape == std::string("square")) s = ObstacleShape::square(size);
  else if (shape == std::string("disk")) s = ObstacleShape::disk(size);
  else s = ObstacleShape::none();
  const UnitCell cell = build_unit_cell(s);
  const PerforatedDomain dom = build_perforated_domain(eps, cell);
  return std::make_shared<Mesh>(build_mesh(dom, eps / cells_per_eps, layers));
}

}  // namespace

TEST_CASE("cell-mesh extrusion masks the obstacle column") {
  // square side 0.5 at h = 1/8: 8^3 cells minus 4*4*8 masked
  const UnitCell cell = build_unit_cell(ObstacleShape::square(0.5));
  const Mesh m = build_cell_mesh_3d(cell, 1.0 / 8.0, 8);
  long long fluid = 0;
  for (uint8_t c : m.cell_fluid) fluid += c;
  CHECK(m.n_struct_cells() == 512);
  CHECK(fluid == 512 - 128);
  CHECK(m.fluid_volume == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(m.obstacle_area_measured == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(m.obstacle_perimeter_measured == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("fine mesh cell counts match the perforation") {
  // eps = 1/4, h = 1/16, 8 layers: 16*16*8 cells minus 4*4 obstacles of 2*2*8
  const MeshPtr m = fine_mesh("square", 0.5, 0.25, 4, 8);
  long long fluid = 0;
  for (uint8_t c : m->cell_fluid) fluid += c;
  CHECK(m->n_struct_cells() == 16 * 16 * 8);
  CHECK(fluid == 2048 - 512);
  CHECK(m->count_facets(FacetTag::Obstacle) > 0);
  CHECK(m->count_facets(FacetTag::Top) > 0);
  CHECK(m->count_facets(FacetTag::Bottom) > 0);
  CHECK(m->count_facets(FacetTag::Exterior) > 0);
}

TEST_CASE("empty obstacle keeps the full 2D grid") {
  const UnitCell cell = build_unit_cell(ObstacleShape::none());
  const Mesh m = build_cell_mesh_2d(cell, 0.25);
  CHECK(m.n_struct_cells() == 16);
  CHECK(m.count_facets(FacetTag::Obstacle) == 0);
  long long fluid = 0;
  for (uint8_t c : m.cell_fluid) fluid += c;
  CHECK(fluid == 16);
}

TEST_CASE("square obstacles demand conforming spacing") {
  const UnitCell cell = build_unit_cell(ObstacleShape::square(0.5));
  CHECK_THROWS_AS(build_cell_mesh_3d(cell, 1.0 / 10.0, 4), NonconformingSpacing);
  CHECK_NOTHROW(build_cell_mesh_3d(cell, 1.0 / 8.0, 4));
  // disks never demand conformity; the staircase is measured instead
  const UnitCell dk = build_unit_cell(ObstacleShape::disk(0.25));
  const Mesh m = build_cell_mesh_3d(dk, 1.0 / 10.0, 4);
  CHECK(m.obstacle_area_measured > 0.0);
  CHECK(m.obstacle_perimeter_measured > 0.0);
}

TEST_CASE("boundary facets carry exactly one tag and pair up periodically") {
  const UnitCell cell = build_unit_cell(ObstacleShape::square(0.5));
  const Mesh m = build_cell_mesh_3d(cell, 1.0 / 8.0, 4);
  // periodic lateral faces produce no Exterior facets
  CHECK(m.count_facets(FacetTag::Exterior) == 0);
  // involution: master of a master is itself
  for (int id = 0; id < m.n_active(); ++id) {
    const int32_t ma = m.master[static_cast<size_t>(id)];
    CHECK(m.master[static_cast<size_t>(ma)] == ma);
  }
}

TEST_CASE("anisotropic gradient on affine fields is exact") {
  const MeshPtr m = fine_mesh("none", 0, 0.5, 4, 4);
  Field v(m, 3);
  SUBCASE("v = (y3, 0, 0), eps = 1/2: (D_eps v)_{1,3} = 2") {
    for (int id = 0; id < m->n_active(); ++id) {
      const auto [i, j, k] = m->node_ijk(m->node_struct[static_cast<size_t>(id)]);
      (void)i;
      (void)j;
      v.at(id, 0) = m->node_coord(0, 0, k)[2];
    }
    const TensorField t = anisotropic_gradient(v, {0.5});
    for (long long c = 0; c < m->n_struct_cells(); ++c) {
      CHECK(t.at(c, 0, 2) == doctest::Approx(2.0).epsilon(1e-13));
      CHECK(t.at(c, 0, 0) == doctest::Approx(0.0).epsilon(1e-13));
      CHECK(t.at(c, 2, 2) == doctest::Approx(0.0).epsilon(1e-13));
    }
  }
  SUBCASE("v = (x1, 0, 0): (D_eps v)_{1,1} = 1, vertical column 0") {
    for (int id = 0; id < m->n_active(); ++id) {
      const auto [i, j, k] = m->node_ijk(m->node_struct[static_cast<size_t>(id)]);
      (void)j;
      (void)k;
      v.at(id, 0) = m->node_coord(i, 0, 0)[0];
    }
    const TensorField t = anisotropic_gradient(v, {0.25});
    for (long long c = 0; c < m->n_struct_cells(); ++c) {
      CHECK(t.at(c, 0, 0) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(t.at(c, 0, 2) == doctest::Approx(0.0).epsilon(1e-13));
    }
  }
  SUBCASE("div_eps of (0,0,y3) with eps = 1/4 is 4 everywhere") {
    for (int id = 0; id < m->n_active(); ++id) {
      const auto [i, j, k] = m->node_ijk(m->node_struct[static_cast<size_t>(id)]);
      (void)i;
      (void)j;
      v.at(id, 2) = m->node_coord(0, 0, k)[2];
    }
    const TensorField d = div_eps(v, {0.25});
    for (long long c = 0; c < m->n_struct_cells(); ++c)
      CHECK(d.at(c, 0, 0) == doctest::Approx(4.0).epsilon(1e-13));
  }
}

TEST_CASE("anisotropic gradient is linear in the field") {
  const MeshPtr m = fine_mesh("square", 0.5, 0.5, 4, 4);
  const Field a = random_field(m, 3, 11);
  const Field b = random_field(m, 3, 12);
  Field combo(m, 3);
  for (size_t i = 0; i < combo.v.size(); ++i) combo.v[i] = 2.5 * a.v[i] - 0.75 * b.v[i];
  const TensorField ta = anisotropic_gradient(a, {0.5});
  const TensorField tb = anisotropic_gradient(b, {0.5});
  const TensorField tc = anisotropic_gradient(combo, {0.5});
  double max_dev = 0;
  for (size_t i = 0; i < tc.data.size(); ++i)
    max_dev = std::max(max_dev,
                       std::abs(tc.data[i] - (2.5 * ta.data[i] - 0.75 * tb.data[i])));
  CHECK(max_dev <= 1e-12);
}

TEST_CASE("vertical average: trapezoid rule cases") {
  const MeshPtr m = fine_mesh("none", 0, 0.5, 4, 8);
  Field v(m, 3);
  SUBCASE("constant field averages to itself") {
    for (int id = 0; id < m->n_active(); ++id)
      for (int c = 0; c < 3; ++c) v.at(id, c) = 3.5;
    const VerticalAverage va = vertical_average(v);
    for (int id = 0; id < va.average.mesh->n_active(); ++id)
      CHECK(va.average.at(id, 0) == doctest::Approx(3.5).epsilon(1e-14));
    CHECK(va.masked_columns == 0);
  }
  SUBCASE("v1 = y3 averages to 1/2 exactly under the trapezoid rule") {
    for (int id = 0; id < m->n_active(); ++id) {
      const auto [i, j, k] = m->node_ijk(m->node_struct[static_cast<size_t>(id)]);
      (void)i;
      (void)j;
      v.at(id, 0) = m->node_coord(0, 0, k)[2];
    }
    const VerticalAverage va = vertical_average(v);
    for (int id = 0; id < va.average.mesh->n_active(); ++id)
      CHECK(va.average.at(id, 0) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("v1 = 6 y3 (1 - y3) averages to 1 up to O(h^2)") {
    for (int id = 0; id < m->n_active(); ++id) {
      const auto [i, j, k] = m->node_ijk(m->node_struct[static_cast<size_t>(id)]);
      (void)i;
      (void)j;
      const double y = m->node_coord(0, 0, k)[2];
      v.at(id, 0) = 6.0 * y * (1.0 - y);
    }
    const VerticalAverage va = vertical_average(v);
    const double h = 1.0 / 8.0;
    for (int id = 0; id < va.average.mesh->n_active(); ++id)
      CHECK(va.average.at(id, 0) == doctest::Approx(1.0 - h * h).epsilon(1e-13));
  }
}

TEST_CASE("masked columns are excluded from the vertical average") {
  const MeshPtr m = fine_mesh("square", 0.5, 0.5, 4, 8);
  Field v(m, 3);
  const VerticalAverage va = vertical_average(v);
  // 2x2 obstacle cells per macro cell leave one interior node column each
  CHECK(va.masked_columns == 4);
}

TEST_CASE("zero extension preserves the L2 norm and scales means by theta") {
  const MeshPtr m = fine_mesh("square", 0.5, 0.5, 4, 8);
  const MeshPtr box = std::make_shared<Mesh>(build_box_mesh_like(*m));

  SUBCASE("constant 1 extends to mean theta over the box") {
    Field v(m, 1);
    std::fill(v.v.begin(), v.v.end(), 1.0);
    const Field ext = extend_by_zero(v, box);
    CHECK(region_average(ext)[0] == doctest::Approx(0.75).epsilon(1e-14));
  }
  SUBCASE("zero extends to zero") {
    Field v(m, 1);
    const Field ext = extend_by_zero(v, box);
    CHECK(norm_lp(ext, 2) == 0.0);
  }
  SUBCASE("L2 norm is preserved for random fields") {
    const Field v = random_field(m, 3, 99);
    const Field ext = extend_by_zero(v, box);
    CHECK(norm_lp(ext, 2) == doctest::Approx(norm_lp(v, 2)).epsilon(1e-15));
    CHECK(norm_lp(ext, 1) == doctest::Approx(norm_lp(v, 1)).epsilon(1e-15));
  }
}

TEST_CASE("vertical average commutes with scaling after extension") {
  const MeshPtr m = fine_mesh("square", 0.5, 0.25, 4, 8);
  const MeshPtr box = std::make_shared<Mesh>(build_box_mesh_like(*m));
  const Field v = random_field(m, 3, 5);
  Field scaled = v;
  for (double& x : scaled.v) x *= -3.25;
  const VerticalAverage a1 = vertical_average(extend_by_zero(v, box));
  const VerticalAverage a2 = vertical_average(extend_by_zero(scaled, box));
  double max_dev = 0;
  for (size_t i = 0; i < a1.average.v.size(); ++i)
    max_dev = std::max(max_dev, std::abs(a2.average.v[i] + 3.25 * a1.average.v[i]));
  CHECK(max_dev <= 1e-13);
}

TEST_CASE("norms are positive definite on nonzero fields") {
  const MeshPtr m = fine_mesh("square", 0.5, 0.5, 4, 4);
  const Field v = random_field(m, 3, 3);
  CHECK(norm_lp(v, 2) > 0);
  CHECK(norm_lp(v, 1) > 0);
  CHECK(seminorm_deps_lp(v, 0.5, 2) > 0);
  Field z(m, 3);
  CHECK(norm_lp(z, 2) == 0.0);
  CHECK(seminorm_deps_lp(z, 0.5, 2) == 0.0);
  // the D_eps seminorm vanishes on constants
  Field c(m, 3);
  std::fill(c.v.begin(), c.v.end(), 7.0);
  CHECK(seminorm_deps_lp(c, 0.5, 2) <= 1e-12);
}

TEST_CASE("region and boundary averages") {
  const MeshPtr m = fine_mesh("square", 0.5, 0.5, 4, 4);
  SUBCASE("constant field averages to the constant") {
    Field v(m, 2);
    for (int id = 0; id < m->n_active(); ++id) {
      v.at(id, 0) = 1.0;
      v.at(id, 1) = 0.0;
    }
    const auto ra = region_average(v);
    CHECK(ra[0] == doctest::Approx(1.0).epsilon(1e-14));
    const auto ba = boundary_average(v, FacetTag::Obstacle);
    CHECK(ba[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ba[1] == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("odd-symmetric field averages to zero on the symmetric cell") {
    const UnitCell cell = build_unit_cell(ObstacleShape::square(0.5));
    const auto cm = std::make_shared<Mesh>(build_cell_mesh_2d(cell, 1.0 / 8.0));
    Field v(cm, 1);
    for (int id = 0; id < cm->n_active(); ++id) {
      const auto [i, j, k] = cm->node_ijk(cm->node_struct[static_cast<size_t>(id)]);
      (void)j;
      (void)k;
      v.at(id, 0) = cm->node_coord(i, 0, 0)[0];  // y1
    }
    CHECK(std::abs(region_average(v)[0]) <= 1e-14);
  }
  SUBCASE("empty regions are rejected") {
    const MeshPtr box = fine_mesh("none", 0, 0.5, 4, 4);
    Field v(box, 1);
    CHECK_THROWS_AS(boundary_average(v, FacetTag::Obstacle), EmptyRegion);
  }
}

TEST_CASE("constant closed-surface flux vanishes") {
  const MeshPtr m = fine_mesh("disk", 0.25, 0.25, 8, 4);
  Field u(m, 3);
  for (int id = 0; id < m->n_active(); ++id) {
    u.at(id, 0) = 2.0;
    u.at(id, 1) = -1.0;
    u.at(id, 2) = 0.5;
  }
  CHECK(std::abs(boundary_net_flux(u, FacetTag::Obstacle)) <= 1e-13);
}
