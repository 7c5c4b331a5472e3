#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "homog/box_grid.hpp"
#include "homog/cell_problems.hpp"
#include "homog/effective_tensors.hpp"
#include "homog/macro_solver.hpp"

namespace homog {

/// Shortest round-trip decimal form. Throws IoError for NaN and infinities.
std::string format_double(double x);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

using NamedField = std::pair<std::string, const std::vector<double>*>;

/// Legacy ASCII VTK structured points with one scalar point field per entry.
std::string vtk_structured_points(const BoxGrid& grid, const std::vector<NamedField>& fields,
                                  const std::string& title);

/// Corrector fields of a unit cell on its n^dim periodic nodes (zero outside
/// each corrector's domain) plus the voxel phase as cell data.
std::string correctors_vtk(const UnitCell& cell, const CorrectorSet& correctors);

/// One row per node: coordinates, C_O, C_plus, Phi.
std::string state_csv(const MacroState& state);

/// iteration, residual, residual_O, residual_plus, residual_phi, damping
std::string iteration_log_csv(const std::vector<IterationRecord>& history);

std::string tensors_json(const EffectiveCoefficients& coeffs);
EffectiveCoefficients parse_tensors_json(const std::string& text);

}  // namespace homog
