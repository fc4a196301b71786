#include "tpm/geometry.hpp"

#include <cmath>
#include <string>

namespace tpm {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTol = 1e-12;
}  // namespace

void ObstacleShape::validate() const {
  switch (kind) {
    case ObstacleKind::None:
      return;
    case ObstacleKind::Square:
      if (size <= 0.0) throw ShapeTooLarge("square side must be positive");
      if (size >= 1.0 - kTol)
        throw ShapeTooLarge("square side " + std::to_string(size) +
                            " not strictly inside Y' (need side < 1)");
      return;
    case ObstacleKind::Disk:
      if (size <= 0.0) throw ShapeTooLarge("disk radius must be positive");
      if (size >= 0.5 - kTol)
        throw ShapeTooLarge("disk radius " + std::to_string(size) +
                            " not strictly inside Y' (need radius < 1/2)");
      return;
  }
  throw Error("unreachable obstacle kind");
}

bool ObstacleShape::contains(double y1, double y2) const {
  switch (kind) {
    case ObstacleKind::None:
      return false;
    case ObstacleKind::Square:
      return std::abs(y1) < 0.5 * size && std::abs(y2) < 0.5 * size;
    case ObstacleKind::Disk:
      return y1 * y1 + y2 * y2 < size * size;
  }
  return false;
}

double ObstacleShape::half_extent() const {
  switch (kind) {
    case ObstacleKind::None:
      return 0.0;
    case ObstacleKind::Square:
      return 0.5 * size;
    case ObstacleKind::Disk:
      return size;
  }
  return 0.0;
}

const char* ObstacleShape::kind_name() const {
  switch (kind) {
    case ObstacleKind::None:
      return "none";
    case ObstacleKind::Square:
      return "square";
    case ObstacleKind::Disk:
      return "disk";
  }
  return "?";
}

UnitCell build_unit_cell(const ObstacleShape& shape) {
  shape.validate();
  UnitCell c;
  c.shape = shape;
  switch (shape.kind) {
    case ObstacleKind::None:
      c.fluid_area = 1.0;
      c.obstacle_perimeter = 0.0;
      break;
    case ObstacleKind::Square:
      c.fluid_area = 1.0 - shape.size * shape.size;
      c.obstacle_perimeter = 4.0 * shape.size;
      break;
    case ObstacleKind::Disk:
      c.fluid_area = 1.0 - kPi * shape.size * shape.size;
      c.obstacle_perimeter = 2.0 * kPi * shape.size;
      break;
  }
  c.theta = c.fluid_area;  // |Y'| = 1
  c.mu1 = c.obstacle_perimeter;
  return c;
}

namespace {

int integer_count(double length, double epsilon, const char* what) {
  const double q = length / epsilon;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
    throw NonconformingEpsilon(std::string(what) + "/epsilon = " + std::to_string(q) +
                               " is not a positive integer");
  return static_cast<int>(r);
}

}  // namespace

PerforatedDomain build_perforated_domain(double epsilon, const UnitCell& cell,
                                         const Rect& omega) {
  if (!(epsilon > 0.0) || epsilon >= 1.0 + kTol)
    throw NonconformingEpsilon("epsilon must satisfy 0 < epsilon <= 1");
  integer_count(1.0, epsilon, "1");  // 1/eps integer (harness restriction)

  PerforatedDomain d;
  d.epsilon = epsilon;
  d.cell = cell;
  d.omega = omega;
  d.nx_cells = integer_count(omega.width(), epsilon, "omega width");
  d.ny_cells = integer_count(omega.height(), epsilon, "omega height");

  if (cell.shape.kind != ObstacleKind::None) {
    const double e = epsilon * cell.shape.half_extent();
    d.cell_indices.reserve(static_cast<size_t>(d.nx_cells) * d.ny_cells);
    for (int ky = 0; ky < d.ny_cells; ++ky) {
      for (int kx = 0; kx < d.nx_cells; ++kx) {
        const auto c = d.cell_center(kx, ky);
        if (c[0] - e <= omega.x0 + kTol || c[0] + e >= omega.x1 - kTol ||
            c[1] - e <= omega.y0 + kTol || c[1] + e >= omega.y1 - kTol)
          throw ObstacleTouchesBoundary("obstacle in cell (" + std::to_string(kx) +
                                        "," + std::to_string(ky) +
                                        ") touches d(omega)");
        d.cell_indices.push_back({kx, ky});
      }
    }
  }
  return d;
}

std::array<long long, 2> kappa(const std::array<double, 2>& x_prime, double epsilon) {
  // x'/eps in k' + [-1/2,1/2)  <=>  k' = floor(x'/eps + 1/2)
  const double s1 = x_prime[0] / epsilon + 0.5;
  const double s2 = x_prime[1] / epsilon + 0.5;
  return {static_cast<long long>(std::floor(s1)), static_cast<long long>(std::floor(s2))};
}

}  // namespace tpm
