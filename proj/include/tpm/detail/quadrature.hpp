#pragma once

#include "tpm/mesh.hpp"

namespace tpm::detail {

inline constexpr double kGaussOffset = 0.28867513459481288225;  // 1/(2*sqrt(3))

/// Tensor-product Q1 basis sampled at the 2^dim Gauss points of one
/// element of a uniform mesh.  Node order matches Mesh::cell_nodes
/// (i fastest), quadrature weight exact for per-axis degree <= 3.
struct Quad {
  int dim, n_nodes, n_q;
  double w = 0;
  double N[8][8];
  double dN[8][8][3];
};

inline Quad make_quad(const Mesh& m) {
  Quad q;
  q.dim = m.dim;
  q.n_nodes = m.dim == 3 ? 8 : 4;
  q.n_q = q.n_nodes;
  q.w = m.cell_volume() / q.n_q;
  const double xi[2] = {0.5 - kGaussOffset, 0.5 + kGaussOffset};
  const int kbits = m.dim == 3 ? 1 : 0;
  for (int qk = 0; qk <= kbits; ++qk)
    for (int qj = 0; qj <= 1; ++qj)
      for (int qi = 0; qi <= 1; ++qi) {
        const int iq = qi + 2 * qj + 4 * qk;
        const double x[3] = {xi[qi], xi[qj], xi[qk]};
        for (int ak = 0; ak <= kbits; ++ak)
          for (int aj = 0; aj <= 1; ++aj)
            for (int ai = 0; ai <= 1; ++ai) {
              const int a = ai + 2 * aj + 4 * ak;
              const int bit[3] = {ai, aj, ak};
              double f[3];
              for (int d = 0; d < 3; ++d) f[d] = bit[d] ? x[d] : 1.0 - x[d];
              if (m.dim == 2) f[2] = 1.0;
              q.N[iq][a] = f[0] * f[1] * f[2];
              for (int d = 0; d < m.dim; ++d) {
                double g = (bit[d] ? 1.0 : -1.0) / m.h[d];
                for (int e = 0; e < 3; ++e)
                  if (e != d) g *= (m.dim == 2 && e == 2) ? 1.0 : f[e];
                q.dN[iq][a][d] = g;
              }
              if (m.dim == 2) q.dN[iq][a][2] = 0.0;
            }
      }
  return q;
}

/// Bilinear basis on a facet at its Gauss points, node order matching
/// Mesh::FacetGeometry.
struct FacetQuad {
  int n_nodes, n_q;
  double w = 0;
  double N[4][4];
};

inline FacetQuad make_facet_quad(const Mesh& m, const Mesh::FacetGeometry& g) {
  FacetQuad q;
  q.n_nodes = g.n_nodes;
  q.n_q = g.n_nodes;
  q.w = g.area / q.n_q;
  const double xi[2] = {0.5 - kGaussOffset, 0.5 + kGaussOffset};
  if (m.dim == 2) {
    for (int iq = 0; iq < 2; ++iq) {
      q.N[iq][0] = 1.0 - xi[iq];
      q.N[iq][1] = xi[iq];
    }
    return q;
  }
  for (int q2 = 0; q2 <= 1; ++q2)
    for (int q1 = 0; q1 <= 1; ++q1) {
      const int iq = q1 + 2 * q2;
      for (int a2 = 0; a2 <= 1; ++a2)
        for (int a1 = 0; a1 <= 1; ++a1) {
          const int a = a1 + 2 * a2;
          q.N[iq][a] = (a1 ? xi[q1] : 1.0 - xi[q1]) * (a2 ? xi[q2] : 1.0 - xi[q2]);
        }
    }
  return q;
}

}  // namespace tpm::detail
