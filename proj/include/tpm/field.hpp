#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "tpm/mesh.hpp"

namespace tpm {

/// Nodal field on a structured mesh: one value per active node per
/// component, interleaved.  Fields produced by extend_by_zero carry a
/// `support` mask (per structured cell of the source) so integrals see the
/// extension as exactly zero on obstacle cells.
struct Field {
  MeshPtr mesh;
  int ncomp = 1;
  std::vector<double> v;
  std::optional<std::vector<uint8_t>> support;

  Field() = default;
  Field(MeshPtr m, int nc)
      : mesh(std::move(m)), ncomp(nc),
        v(static_cast<size_t>(mesh->n_active()) * nc, 0.0) {}

  double& at(int32_t active, int c) { return v[static_cast<size_t>(active) * ncomp + c]; }
  double at(int32_t active, int c) const { return v[static_cast<size_t>(active) * ncomp + c]; }

  /// Value by structured node index; inactive nodes read as 0.
  double at_struct(long long structured, int c) const {
    const int32_t id = mesh->node_id[static_cast<size_t>(structured)];
    return id < 0 ? 0.0 : at(id, c);
  }

  bool cell_in_support(long long cell) const {
    if (support) return (*support)[static_cast<size_t>(cell)] != 0;
    return mesh->cell_fluid[static_cast<size_t>(cell)] != 0;
  }

  /// Volume of the field's domain: the full box for extended fields,
  /// the fluid part otherwise.
  double domain_volume() const {
    if (support) return static_cast<double>(mesh->n_struct_cells()) * mesh->cell_volume();
    return mesh->fluid_volume;
  }

  bool all_finite() const;

  /// Copies master values onto periodic slave nodes.
  void sync_periodic();
};

/// Piecewise-constant tensor data per structured cell (element-center
/// evaluation of gradients); non-fluid cells hold zeros.
struct TensorField {
  MeshPtr mesh;
  int rows = 0, cols = 0;
  std::vector<double> data;  // cell-major, row-major within a cell

  TensorField() = default;
  TensorField(MeshPtr m, int r, int c)
      : mesh(std::move(m)), rows(r), cols(c),
        data(static_cast<size_t>(mesh->n_struct_cells()) * r * c, 0.0) {}

  double& at(long long cell, int r, int c) {
    return data[(static_cast<size_t>(cell) * rows + r) * cols + c];
  }
  double at(long long cell, int r, int c) const {
    return data[(static_cast<size_t>(cell) * rows + r) * cols + c];
  }
};

}  // namespace tpm
