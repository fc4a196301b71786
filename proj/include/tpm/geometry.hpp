#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tpm/errors.hpp"

namespace tpm {

enum class ObstacleKind : uint8_t { None, Square, Disk };

/// Obstacle T' in unit-cell coordinates, Y' = [-1/2,1/2]^2.
/// `size` is the side length (Square) or radius (Disk).
struct ObstacleShape {
  ObstacleKind kind = ObstacleKind::None;
  double size = 0.0;

  static ObstacleShape none() { return {ObstacleKind::None, 0.0}; }
  static ObstacleShape square(double side) { return {ObstacleKind::Square, side}; }
  static ObstacleShape disk(double radius) { return {ObstacleKind::Disk, radius}; }

  /// Throws ShapeTooLarge unless the closure of T' is strictly inside Y'.
  void validate() const;

  /// True if the cell-local point y' lies in the open obstacle interior.
  bool contains(double y1, double y2) const;

  /// Half-width of the obstacle's bounding box (0 for None).
  double half_extent() const;

  const char* kind_name() const;
};

/// Reference cell Y' with its exact geometric constants.
/// |Y'| = 1, so theta = fluid_area and mu1 = obstacle_perimeter.
struct UnitCell {
  ObstacleShape shape;
  double fluid_area = 1.0;          // |Y'_f|
  double obstacle_perimeter = 0.0;  // |dT'|
  double theta = 1.0;               // |Y'_f| / |Y'|
  double mu1 = 0.0;                 // |dT'| / |Y'|
};

UnitCell build_unit_cell(const ObstacleShape& shape);

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// The rescaled perforated domain omega_eps x (0,1): omega is tiled by
/// (1/eps)^2 square cells of side eps anchored at its corner, each carrying
/// one obstacle copy eps*T' at the cell center.  Obstacles never touch
/// d(omega) because T' is strictly interior to Y'.
struct PerforatedDomain {
  double epsilon = 1.0;
  UnitCell cell;
  Rect omega;
  int nx_cells = 0, ny_cells = 0;                 // macro cells per axis
  std::vector<std::array<int, 2>> cell_indices;   // cells carrying an obstacle

  std::array<double, 2> cell_center(int kx, int ky) const {
    return {omega.x0 + epsilon * (kx + 0.5), omega.y0 + epsilon * (ky + 0.5)};
  }
};

PerforatedDomain build_perforated_domain(double epsilon, const UnitCell& cell,
                                         const Rect& omega = Rect{});

/// Paper's cell-index map: kappa(x') = k'  iff  x' in k' + [-1/2,1/2)^2,
/// applied to x'/eps.  Half-open cells resolve the tie on cell faces.
std::array<long long, 2> kappa(const std::array<double, 2>& x_prime, double epsilon);

}  // namespace tpm
