#include "tpm/vtk.hpp"

#include <fstream>

#include "tpm/csv.hpp"
#include "tpm/errors.hpp"

namespace tpm {

void VtkWriter::write(const std::string& path, const Mesh& mesh) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path);

  const int snx = mesh.snx(), sny = mesh.sny(), snz = mesh.snz();
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
  os << "DATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << snx << ' ' << sny << ' ' << snz << '\n';
  os << "ORIGIN " << format_double(mesh.origin[0]) << ' ' << format_double(mesh.origin[1])
     << ' ' << format_double(mesh.origin[2]) << '\n';
  os << "SPACING " << format_double(mesh.h[0]) << ' ' << format_double(mesh.h[1]) << ' '
     << format_double(mesh.dim == 3 ? mesh.h[2] : 1.0) << '\n';
  os << "POINT_DATA " << mesh.n_struct_nodes() << '\n';

  os << "SCALARS fluid_mask int 1\nLOOKUP_TABLE default\n";
  for (long long n = 0; n < mesh.n_struct_nodes(); ++n)
    os << (mesh.node_id[static_cast<size_t>(n)] >= 0 ? 1 : 0) << '\n';

  for (const auto& e : entries) {
    const Field& f = *e.field;
    if (f.ncomp == 1) {
      os << "SCALARS " << e.name << " double 1\nLOOKUP_TABLE default\n";
      for (long long n = 0; n < mesh.n_struct_nodes(); ++n)
        os << format_double(f.at_struct(n, 0)) << '\n';
    } else {
      os << "VECTORS " << e.name << " double\n";
      for (long long n = 0; n < mesh.n_struct_nodes(); ++n) {
        os << format_double(f.at_struct(n, 0)) << ' ' << format_double(f.at_struct(n, 1))
           << ' ' << format_double(f.ncomp > 2 ? f.at_struct(n, 2) : 0.0) << '\n';
      }
    }
  }
  if (!os) throw Error("write failed: " + path);
}

}  // namespace tpm
