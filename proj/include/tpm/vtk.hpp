#pragma once

#include <string>
#include <vector>

#include "tpm/field.hpp"

namespace tpm {

/// Writes fields on one structured mesh as a legacy ASCII VTK file
/// (DATASET STRUCTURED_POINTS, point data).  Masked nodes are emitted as
/// zeros; a fluid_mask point scalar distinguishes them.
struct VtkWriter {
  std::string title = "thinporous fields";

  struct Entry {
    std::string name;
    const Field* field;
  };

  void add(const std::string& name, const Field& f) { entries.push_back({name, &f}); }
  void write(const std::string& path, const Mesh& mesh) const;

 private:
  std::vector<Entry> entries;
};

}  // namespace tpm
