#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "homog/box_grid.hpp"
#include "homog/cell_geometry.hpp"
#include "homog/cell_problems.hpp"

namespace homog {

/// Upscaled coefficient set. Tensors are dim x dim and dimensionless.
struct EffectiveCoefficients {
  Eigen::MatrixXd D_O;     ///< oxygen diffusion
  Eigen::MatrixXd D_plus;  ///< proton diffusion
  Eigen::MatrixXd M_plus;  ///< proton mobility
  Eigen::MatrixXd eps;     ///< permittivity
  double porosity = 1;
  double Lambda = 0;       ///< interface measure per cell
  double beta_O_bar = 0;
  double beta_plus_bar = 0;

  int dim() const noexcept { return static_cast<int>(D_O.rows()); }
};

/// Volume averages of the corrected unit gradients:
///   D_O(i,k)    = int_{Y^p} (delta_ik - d_i N_O^k)
///   D_plus(i,k) = int_{Y^p} (delta_ik - d_i N_+^k)
///   M_plus(i,k) = int_{Y^p} (delta_ik - d_i N_phi^k)
///   eps(i,k)    = int_Y eps(y) (delta_ik - d_i N_phi^k)
/// using element-midpoint gradients (exact for Q1). The betas are left at zero;
/// set them with scale_reaction().
EffectiveCoefficients assemble_tensors(const UnitCell& cell, const CorrectorSet& correctors);

/// Convenience: solve every corrector and assemble.
EffectiveCoefficients compute_effective_coefficients(const UnitCell& cell, const LinearControls& controls = {},
                                                     int threads = 1);

struct DimensionlessParameters {
  double lambda = 0;
  double gamma = 0;
  double beta_O = 0;     ///< i0 L / (4 e D_O), per unit interface measure
  double beta_plus = 0;  ///< i0 L / (e D_plus)
  double beta_O_bar = 0;     ///< Lambda * beta_O
  double beta_plus_bar = 0;  ///< Lambda * beta_plus
};

/// lambda = lambda_D / L, gamma = eps_solid / eps_pore and the interface-scaled
/// reaction numbers. i0 and eps_solid may be zero; everything else must be positive.
DimensionlessParameters derive_dimensionless(const Nondimensionalization& nd, double Lambda);

/// Sets beta_O_bar = Lambda * beta_O and beta_plus_bar = Lambda * beta_plus.
void scale_reaction(EffectiveCoefficients& coeffs, double beta_O, double beta_plus);

/// sigma_s(x, y) with x a macro point and y in the unit cell.
using SurfaceChargeDensity = std::function<double(const Point& x, const Point& y)>;

struct SurfaceChargeResult {
  std::vector<double> rho_s;  ///< one value per macro grid node
  bool warning_no_interface = false;  ///< nonzero sigma_s requested on a cell without interface
};

/// rho_s(x) = sum over interface faces of sigma_s(x, face midpoint) * face area (|Y| = 1).
SurfaceChargeResult homogenize_surface_charge(const SurfaceChargeDensity& sigma_s, const UnitCell& cell,
                                              const BoxGrid& macro_grid);

}  // namespace homog
