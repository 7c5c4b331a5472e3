#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "homog/box_grid.hpp"
#include "homog/effective_tensors.hpp"

namespace homog {

using ScalarField = std::function<double(const Point&)>;

ScalarField constant_field(double value);

struct ReactionParameters {
  double alpha_c = 0.5;  ///< cathodic transfer coefficient, in (0, 1)
  double n_plus = 1;     ///< reaction order in C_+
  double n_O = 1;        ///< reaction order in C_O
  double Phi_0 = 0;      ///< equilibrium potential
};

/// Running totals over reaction-rate evaluations.
struct ReactionCounters {
  std::size_t evaluations = 0;
  std::size_t clamped = 0;   ///< exponent argument clipped to [-700, 700]
  std::size_t negative = 0;  ///< evaluations that returned < 0 (must stay 0)
};

/// beta * [C_+]^+^n_plus * [C_O]^+^n_O * exp(-alpha_c (Phi - Phi_0)), always >= 0.
double butler_volmer_rate(double beta, double c_plus, double c_o, double phi, const ReactionParameters& params,
                          ReactionCounters* counters = nullptr);

/// Dirichlet data. E_+ is the face x_1 = 0 (protons enter), E_O the face x_1 = L_1
/// (oxygen enters). C_O is fixed on E_O, C_+ on E_+, Phi on both; every other
/// boundary part carries zero normal flux.
struct BoundaryData {
  ScalarField C_O_D = constant_field(1.0);
  ScalarField C_plus_D = constant_field(1.0);
  ScalarField Phi_D_O = constant_field(0.0);
  ScalarField Phi_D_H = constant_field(0.0);
};

/// Optional volume sources added to the right-hand sides (used for manufactured solutions).
struct Forcing {
  ScalarField oxygen;
  ScalarField proton;
  ScalarField potential;
};

/// Upscaled steady problem
///   -div(D_O grad C_O)                       = beta_O_bar R
///   -div(D_plus grad C_+ + C_+ M_plus grad Phi) = beta_plus_bar R
///   -div(eps grad Phi)                        = p C_+ + rho_s
/// with R = [C_+]^n_plus [C_O]^n_O exp(-alpha_c (Phi - Phi_0)).
struct MacroProblem {
  BoxGrid grid;
  EffectiveCoefficients coeffs;
  ReactionParameters reaction;
  BoundaryData bc;
  std::vector<double> rho_s;  ///< nodal values; empty means zero
  Forcing forcing;
};

/// Throws InvalidArgument when the problem violates its invariants.
void validate(const MacroProblem& problem);

enum class ReactingSpecies { oxygen, proton };

double butler_volmer_rate(double c_plus, double c_o, double phi, const MacroProblem& problem, ReactingSpecies species,
                          ReactionCounters* counters = nullptr);

struct SolverControls {
  double tol_nl = 1e-8;         ///< combined relative residual
  int max_outer = 200;
  double damping = 1.0;         ///< initial (and reset) damping factor
  double min_damping = 1.0 / 1024;
  int reset_after = 3;          ///< consecutive decreases before the damping is reset
};

struct IterationRecord {
  int iteration = 0;
  double residual = 0;
  double residual_O = 0;
  double residual_plus = 0;
  double residual_phi = 0;
  double damping = 1;
};

struct MacroState {
  BoxGrid grid;
  std::vector<double> C_O;
  std::vector<double> C_plus;
  std::vector<double> Phi;

  std::vector<IterationRecord> history;  ///< entry 0 is the initial state
  int outer_iterations = 0;
  bool converged = false;
  bool diverged = false;
  double residual = 0;
  ReactionCounters reaction;
  std::size_t positive_overpotential_nodes = 0;  ///< nodes with Phi - Phi_0 > 0
};

struct ResidualNorms {
  double oxygen = 0;
  double proton = 0;
  double potential = 0;
  double combined() const { return std::max({oxygen, proton, potential}); }
};

/// Dirichlet data extended across the domain: C_O and C_+ constant along x_1 from
/// their Dirichlet face, Phi linear in x_1 between its two faces.
MacroState initial_guess(const MacroProblem& problem);

/// Damped Gummel (Picard) iteration, with damped Newton steps on the coupled
/// system as a fallback; see the README for the scheme. Starts from
/// `initial` when given, else from initial_guess(). A run that does not reach
/// tol_nl returns the last iterate with `diverged = true`.
MacroState solve_macro(const MacroProblem& problem, const SolverControls& controls = {},
                       const MacroState* initial = nullptr);

/// Relative residuals of the three discrete equations at a state.
ResidualNorms macro_residual(const MacroProblem& problem, const MacroState& state);

struct FluxBalance {
  double boundary_flux = 0;      ///< total outward flux of -D_O grad C_O through the boundary
  double integrated_source = 0;  ///< integral of beta_O_bar R (+ oxygen forcing)
  double relative_mismatch = 0;
};

/// Discrete divergence theorem for the oxygen equation on a solved state.
FluxBalance oxygen_flux_balance(const MacroProblem& problem, const MacroState& state);

enum class GradientEnergySign { as_printed, flipped };

/// H = int sum_k C_k (log C_k - 1) + C_+ Phi - lambda^2 |grad Phi|^2 (as_printed) or
/// with +lambda^2 |grad Phi|^2 (flipped). Nodal terms use trapezoidal weights, the
/// gradient term cell-midpoint gradients; C log C -> 0 as C -> 0.
double free_energy(const MacroState& state, double lambda_sq,
                   GradientEnergySign sign = GradientEnergySign::as_printed);

struct EquilibriumBlock {
  std::array<int, 3> block{};  ///< block coordinates
  double spread = 0;           ///< max - min of log C_+ + Phi over the block's nodes
  std::size_t nodes = 0;
  std::size_t excluded = 0;    ///< nodes with C_+ <= 0
};

struct LocalEquilibriumReport {
  std::vector<EquilibriumBlock> blocks;
  double max_spread = 0;
  std::size_t excluded = 0;  ///< distinct nodes with C_+ <= 0
};

/// Spread of the proton chemical potential log C_+ + Phi over blocks of
/// `block_cells` grid cells per axis. A diagnostic only.
LocalEquilibriumReport check_local_equilibrium(const MacroState& state, int block_cells);

}  // namespace homog
