#pragma once

// Discrete steady Nernst-Planck-Poisson system with Butler-Volmer sources on an
// edge graph, shared by the macro and the resolved micro solver, and the damped
// fixed-point driver used by every nonlinear solve.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "finite_volume.hpp"
#include "homog/macro_solver.hpp"

namespace homog::detail {

enum class Equation { oxygen, proton, potential };

const char* equation_name(Equation eq);

struct CoupledFields {
  std::vector<double> C_O;
  std::vector<double> C_plus;
  std::vector<double> Phi;
};

struct CoupledSystem {
  std::size_t num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<CrossFace> cross;

  std::vector<char> active_O;     ///< concentration unknowns exist (pore-touching)
  std::vector<char> active_plus;
  std::vector<char> dirichlet_O;
  std::vector<char> dirichlet_plus;
  std::vector<char> dirichlet_phi;
  std::vector<double> value_O;    ///< Dirichlet values
  std::vector<double> value_plus;
  std::vector<double> value_phi;

  std::vector<double> reaction_O;     ///< per-node factor multiplying R in the oxygen balance
  std::vector<double> reaction_plus;  ///< same for the proton balance
  std::vector<double> charge;         ///< per-node factor multiplying C_+ in the Poisson balance
  std::vector<double> fixed_charge;   ///< integrated fixed charge per node
  std::vector<double> source_O;       ///< integrated forcing per node
  std::vector<double> source_plus;
  std::vector<double> source_phi;
  ReactionParameters reaction;

  /// Nodes with no coupling in an equation (kept at their current value);
  /// filled by prepare().
  std::vector<char> isolated_O;
  std::vector<char> isolated_plus;
  std::vector<char> isolated_phi;
};

/// Resizes empty per-node vectors to zero and checks every equation for
/// components without a Dirichlet anchor (SingularSystemError).
void prepare(CoupledSystem& sys);

struct LinearSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  std::vector<char> free;  ///< rows carrying a balance equation
};

/// Butler-Volmer rate (beta = 1) at every node carrying a reaction weight.
std::vector<double> reaction_rates(const CoupledSystem& sys, const CoupledFields& u, ReactionCounters* counters);

/// Linear system of one equation with the other fields frozen at `u` and the
/// reaction at `rate`. With `linearized`, the Poisson charge is replaced by its
/// Boltzmann linearization about u (C_+ e^{-(Phi - Phi_u)} to first order) and
/// the reaction of the oxygen and proton equations by its tangent in the
/// equation's own unknown.
LinearSystem assemble(const CoupledSystem& sys, Equation eq, const CoupledFields& u, bool linearized,
                      const std::vector<double>& rate);

double relative_residual(const LinearSystem& ls, const std::vector<double>& x);

ResidualNorms coupled_residual(const CoupledSystem& sys, const CoupledFields& u, ReactionCounters* counters);

/// One Gummel sweep: linearized Poisson, then proton and oxygen, each with the
/// fields updated so far and its reaction linearized in its own unknown.
CoupledFields gummel_step(const CoupledSystem& sys, const CoupledFields& u, ReactionCounters* counters);

/// One Newton step on the fully coupled system (all three fields at once).
CoupledFields newton_step(const CoupledSystem& sys, const CoupledFields& u, ReactionCounters* counters);

std::vector<double> solve_linear(const LinearSystem& ls, Equation eq);

/// Per-node flux balance of the oxygen equation: sum of fluxes leaving the node
/// minus its sources (zero on solved free rows).
std::vector<double> oxygen_imbalance(const CoupledSystem& sys, const CoupledFields& u);

struct FixedPointResult {
  CoupledFields fields;
  std::vector<IterationRecord> history;
  int iterations = 0;
  bool converged = false;
  double residual = 0;
};

/// u <- u + omega (step(u) - u) with residual-driven damping: omega halves while
/// the residual would grow (down to min_damping) and resets after
/// `reset_after` consecutive decreases. Stops when the residual is below tol_nl.
FixedPointResult damped_fixed_point(CoupledFields u, const std::function<CoupledFields(const CoupledFields&)>& step,
                                    const std::function<ResidualNorms(const CoupledFields&)>& residual,
                                    const SolverControls& controls);

/// Damped Gummel sweeps from `initial`; when they do not converge, damped Newton
/// steps from `initial`, keeping whichever run ends with the smaller residual.
FixedPointResult solve_coupled(const CoupledSystem& sys, CoupledFields initial, const SolverControls& controls,
                               ReactionCounters* counters);

}  // namespace homog::detail
