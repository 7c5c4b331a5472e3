#pragma once

#include <cstdint>
#include <vector>

#include "homog/cell_geometry.hpp"

namespace homog {

enum class CorrectorSpecies { oxygen, proton, potential };

const char* to_string(CorrectorSpecies s) noexcept;

/// Periodic zero-mean corrector N^k for one species and direction.
///
/// Values live on the n^dim periodic nodes (node i at y = i/n). Oxygen and proton
/// correctors only carry unknowns on nodes touching a pore voxel; the potential
/// corrector lives on the whole cell except, for gamma = 0, nodes surrounded by
/// solid. Nodes without an unknown hold 0 and have `in_domain == false`.
struct CorrectorField {
  CorrectorSpecies species = CorrectorSpecies::oxygen;
  int direction = 0;  ///< 0-based axis k
  std::vector<double> values;
  std::vector<bool> in_domain;
  std::uint64_t cell_fingerprint = 0;
  int iterations = 0;
  double relative_residual = 0;
};

struct LinearControls {
  double tolerance = 1e-10;  ///< relative residual
  int max_iteration_factor = 10;  ///< max iterations = factor * unknowns
};

/// -div(grad(N - y_k)) = 0 in the pore phase, zero normal flux of (N - y_k) on the
/// interface, zero mean over the pore phase.
CorrectorField solve_corrector_oxygen(const UnitCell& cell, int k, const LinearControls& controls = {});

/// -div(eps(y) grad(N - y_k)) = 0 in all of Y, zero mean over Y.
CorrectorField solve_corrector_potential(const UnitCell& cell, int k, const LinearControls& controls = {});

/// -lap(N_+ - y_k) = -lap(N_phi - y_k) in the pore phase with the matching interface
/// flux condition, zero mean over the pore phase. `n_phi` must be the potential
/// corrector of the same cell and direction.
CorrectorField solve_corrector_proton(const UnitCell& cell, int k, const CorrectorField& n_phi,
                                      const LinearControls& controls = {});

/// All 3*dim correctors, indexed [direction].
struct CorrectorSet {
  std::vector<CorrectorField> oxygen;
  std::vector<CorrectorField> proton;
  std::vector<CorrectorField> potential;
};

/// Solves every corrector; independent solves run on up to `threads` threads.
/// Results do not depend on the thread count.
CorrectorSet solve_all_correctors(const UnitCell& cell, const LinearControls& controls = {}, int threads = 1);

/// Mean of a corrector over its domain (pore phase for oxygen/proton, Y for potential).
double corrector_mean(const UnitCell& cell, const CorrectorField& field);

/// Relative residual of the discrete weak form, tested against every basis function.
/// `n_phi` is required for proton correctors.
double weak_form_residual(const UnitCell& cell, const CorrectorField& field,
                          const CorrectorField* n_phi = nullptr);

}  // namespace homog
