#pragma once

#include <vector>

#include "homog/macro_solver.hpp"

namespace homog {

/// Thin-double-layer limit on an insulating matrix: C_+ = -rho_s / p is fixed and
///   -div(D_O grad C_O)            = beta_O_bar R
///   -div(C_+ M_plus grad Phi)     = beta_plus_bar R + div(D_plus grad C_+)
/// with Phi = Phi_D_H on E_+ and zero total proton flux elsewhere; C_O as in the
/// macro problem. Phi_D_O and C_plus_D of the boundary data are not used.
struct TDLProblem {
  BoxGrid grid;
  EffectiveCoefficients coeffs;  ///< computed with gamma = 0
  ReactionParameters reaction;
  BoundaryData bc;
  std::vector<double> rho_s;  ///< nodal, <= 0 everywhere
};

void validate(const TDLProblem& problem);

/// C_+ = -rho_s / p at every node.
std::vector<double> tdl_proton_concentration(const TDLProblem& problem);

MacroState thin_double_layer_solve(const TDLProblem& problem, const SolverControls& controls = {},
                                   const MacroState* initial = nullptr);

struct TDLResidual {
  double oxygen = 0;
  double proton = 0;  ///< reduced potential equation
};

/// Relative residuals of the reduced equations at a state (its C_plus is ignored).
TDLResidual tdl_residual(const TDLProblem& problem, const MacroState& state);

/// Closed-form tensors of straight channels along x_1 (and x_3) blocked in x_2:
/// diag(p, 0, p) in 3D, diag(p, 0) in 2D, eps = lambda^2 times the same.
EffectiveCoefficients straight_channel_tensors(double p, double lambda_sq, int dim = 3);

/// Solves a macro problem whose data do not depend on x_2 by dropping that axis
/// and broadcasting the reduced solution. Throws InvalidArgument for x_2-dependent
/// data or tensors that couple x_2 to the other axes.
MacroState straight_channel_macro(const MacroProblem& problem, const SolverControls& controls = {});

}  // namespace homog
