#pragma once

#include <vector>

#include "homog/box_grid.hpp"
#include "homog/cell_geometry.hpp"
#include "homog/effective_tensors.hpp"
#include "homog/macro_solver.hpp"

namespace homog {

/// Resolved 2D problem on Omega = [0, L_0] x [0, L_1] tiled with copies of the
/// unit cell scaled by r:
///   -Lap C_O = 0, -div(grad C_+ + C_+ grad Phi) = 0   in the pore phase
///   -div(eps(x/r) grad Phi) = C_+                      in Omega
/// with interface terms r beta_O R, r beta_plus R and r sigma_s. Boundary data
/// as in the macro problem.
struct MicroProblem {
  double r = 0.25;  ///< L_a / r must be an integer on every axis
  UnitCell cell;    ///< 2D, n >= 8
  std::vector<double> lengths{1.0, 1.0};
  double beta_O = 0;
  double beta_plus = 0;
  ReactionParameters reaction;
  SurfaceChargeDensity sigma_s;  ///< empty means zero
  BoundaryData bc;
};

struct MicroState {
  BoxGrid grid;  ///< fine grid, spacing r / n
  std::vector<double> C_O;     ///< zero on nodes that touch no pore voxel
  std::vector<double> C_plus;
  std::vector<double> Phi;
  std::vector<double> pore_weight;  ///< pore area of each node's control volume

  std::vector<IterationRecord> history;
  int outer_iterations = 0;
  bool converged = false;
  bool diverged = false;
  double residual = 0;
  ReactionCounters reaction;
};

/// Fine grid of a micro problem (validates the tiling).
BoxGrid micro_grid(const MicroProblem& problem);

MicroState solve_micro(const MicroProblem& problem, const SolverControls& controls = {});

struct MicroMacroError {
  double C_O = 0;     ///< L2 over the pore phase
  double C_plus = 0;  ///< L2 over the pore phase
  double Phi_L2 = 0;
  double Phi_H1 = 0;  ///< H1 seminorm
};

/// Errors of the micro fields against the macro fields interpolated
/// (multilinearly) onto the fine grid. The micro grid must refine the macro grid.
MicroMacroError micro_macro_error(const MicroState& micro, const MacroState& macro, const UnitCell& cell);

}  // namespace homog
