#pragma once

#include <Eigen/Dense>
#include <optional>

#include "tpm/stokes.hpp"

namespace tpm {

enum class RegimeKind : uint8_t { LowGamma, MidGamma, HighGamma };

const char* regime_name(RegimeKind k);

/// gamma regime with the a-priori scale exponents: the bounds read
/// |u|   <= C eps^{velocity_exponent}
/// |D_eps u| <= C eps^{gradient_exponent}
/// |p|   <= C eps^{pressure_exponent}.
struct Regime {
  double gamma = 0.0;
  RegimeKind kind = RegimeKind::MidGamma;
  double velocity_exponent = 0.0;
  double gradient_exponent = 0.0;
  double pressure_exponent = 0.0;
};

Regime classify_regime(double gamma);

/// One cell problem on Y_f: -Delta w^i + grad q^i = e_i, div w^i = 0,
/// w^i = 0 at y3 in {0,1}, lateral periodicity, homogeneous natural
/// condition on the obstacle walls; mean-zero pressure.
struct CellSolution {
  int index = 1;  // i in {1,2}
  StokesSolution sol;
  double divergence_norm = 0.0;
  double energy = 0.0;  // int |D w^i|^2
};

CellSolution solve_cell_problem(MeshPtr cell_mesh, int index,
                                const AssembleOptions& opts = {});

/// 2x2 permeability tensor A_ij = (1/|Y_f|) int D w^i : D w^j with the
/// load-formula cross-check and its stabilization-aware variant.
struct PermeabilityTensor {
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  double volume = 0.0;  // discrete |Y_f|
  double eig_min = 0.0, eig_max = 0.0;

  struct Provenance {
    double h = 0.0;
    int layers = 0;
    double energy_load_gap_raw = 0.0;       // vs (1/|Y_f|) int w^i . e_j
    double energy_load_gap_weakform = 0.0;  // vs load + (q^j, div w^i)/|Y_f|
    double asymmetry = 0.0;                 // |A12 - A21| / |A|_F
    double residual[2] = {0.0, 0.0};
    double div_norm[2] = {0.0, 0.0};
  } provenance;
};

PermeabilityTensor assemble_permeability(const CellSolution& s1, const CellSolution& s2);

/// Data entering the effective Darcy laws.
struct EffectiveInputs {
  double theta = 1.0;
  double mu1 = 0.0;
  double alpha = 1.0;
  double mu = 1.0;
  Eigen::Vector2d grad_p{0.0, 0.0};
  Eigen::Vector2d f_prime{0.0, 0.0};
  Eigen::Vector2d g_mean{0.0, 0.0};
  std::optional<Eigen::Matrix2d> A;
};

/// Horizontal effective velocity v~' per regime (v~3 = 0 always):
///   gamma < -1:      -theta/(alpha mu1) grad p
///   -1 <= gamma < 1:  theta/(alpha mu1) (f' - grad p + mu1 M_{dT'}[g'])
///   gamma >= 1:      -theta/mu A grad p
Eigen::Vector2d effective_velocity(const Regime& regime, const EffectiveInputs& in);

}  // namespace tpm
