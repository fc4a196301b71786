#include <doctest.h>

#include <cmath>
#include <random>

#include "tpm/geometry.hpp"

using namespace tpm;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("unit cell constants are exact per shape") {
  const UnitCell sq = build_unit_cell(ObstacleShape::square(0.5));
  CHECK(sq.theta == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(sq.mu1 == doctest::Approx(2.0).epsilon(1e-15));

  const UnitCell dk = build_unit_cell(ObstacleShape::disk(0.25));
  CHECK(dk.theta == doctest::Approx(1.0 - kPi / 16.0).epsilon(1e-15));
  CHECK(dk.mu1 == doctest::Approx(kPi / 2.0).epsilon(1e-15));

  const UnitCell none = build_unit_cell(ObstacleShape::none());
  CHECK(none.theta == 1.0);
  CHECK(none.mu1 == 0.0);
}

TEST_CASE("shapes not strictly inside Y' are rejected") {
  CHECK_THROWS_AS(build_unit_cell(ObstacleShape::square(1.0)), ShapeTooLarge);
  CHECK_THROWS_AS(build_unit_cell(ObstacleShape::square(-0.1)), ShapeTooLarge);
  CHECK_THROWS_AS(build_unit_cell(ObstacleShape::disk(0.5)), ShapeTooLarge);
  CHECK_NOTHROW(build_unit_cell(ObstacleShape::square(0.999)));
  CHECK_NOTHROW(build_unit_cell(ObstacleShape::disk(0.499)));
}

TEST_CASE("perforated domain tiles omega with one obstacle per cell") {
  const UnitCell sq = build_unit_cell(ObstacleShape::square(0.5));

  const PerforatedDomain d4 = build_perforated_domain(0.25, sq);
  CHECK(d4.nx_cells == 4);
  CHECK(d4.ny_cells == 4);
  CHECK(d4.cell_indices.size() == 16);
  // physical obstacle side = eps * side
  CHECK(d4.epsilon * sq.shape.size == doctest::Approx(0.125).epsilon(1e-15));

  const UnitCell dk = build_unit_cell(ObstacleShape::disk(0.25));
  const PerforatedDomain d2 = build_perforated_domain(0.5, dk);
  CHECK(d2.cell_indices.size() == 4);
  CHECK(d2.epsilon * dk.shape.size == doctest::Approx(0.125).epsilon(1e-15));

  const PerforatedDomain d3 = build_perforated_domain(1.0 / 3.0, sq);
  CHECK(d3.cell_indices.size() == 9);

  CHECK_THROWS_AS(build_perforated_domain(0.3, sq), NonconformingEpsilon);
}

TEST_CASE("obstacle count is (1/eps)^2 on the unit square") {
  const UnitCell sq = build_unit_cell(ObstacleShape::square(0.25));
  for (int n : {1, 2, 5, 8}) {
    const PerforatedDomain d = build_perforated_domain(1.0 / n, sq);
    CHECK(static_cast<int>(d.cell_indices.size()) == n * n);
  }
}

TEST_CASE("cell fluid areas tile theta |omega| exactly for squares") {
  const UnitCell sq = build_unit_cell(ObstacleShape::square(0.5));
  const PerforatedDomain d = build_perforated_domain(0.125, sq);
  const double per_cell = d.epsilon * d.epsilon * sq.fluid_area;
  const double total = per_cell * static_cast<double>(d.cell_indices.size());
  CHECK(total == doctest::Approx(sq.theta * d.omega.width() * d.omega.height())
                     .epsilon(1e-15));
}

TEST_CASE("kappa follows the half-open centered-cell convention") {
  CHECK(kappa({0.3, -0.7}, 1.0) == std::array<long long, 2>{0, -1});
  CHECK(kappa({0.5, 0.5}, 1.0) == std::array<long long, 2>{1, 1});
  CHECK(kappa({0.26, 0.0}, 0.5) == std::array<long long, 2>{1, 0});
}

TEST_CASE("kappa is idempotent under re-centering") {
  std::mt19937_64 rng(2026);
  auto uni = [&](double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const double eps = 1.0 / (1 + static_cast<int>(rng() % 8));
    const long long k1 = static_cast<long long>(rng() % 41) - 20;
    const long long k2 = static_cast<long long>(rng() % 41) - 20;
    const double y1 = uni(-0.5, 0.4999);
    const double y2 = uni(-0.5, 0.4999);
    const std::array<double, 2> x{eps * (static_cast<double>(k1) + y1),
                                  eps * (static_cast<double>(k2) + y2)};
    CHECK(kappa(x, eps) == std::array<long long, 2>{k1, k2});
  }
}
