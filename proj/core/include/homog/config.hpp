#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "homog/cell_geometry.hpp"
#include "homog/effective_tensors.hpp"
#include "homog/macro_solver.hpp"

namespace homog {

struct GeometryConfig {
  std::string kind = "channel";  ///< channel | inclusion | bitmap
  int dim = 2;
  int n = 32;
  double porosity = 0.6;            ///< channel
  std::vector<double> sides{0.5};   ///< inclusion
  std::string file;                 ///< bitmap, resolved against the config directory

  bool operator==(const GeometryConfig&) const = default;
};

struct DimensionlessConfig {
  double lambda = 1;
  double gamma = 1;
  double beta_O_bar = 0;
  double beta_plus_bar = 0;

  bool operator==(const DimensionlessConfig&) const = default;
};

/// sigma_s(x) = constant + sum_a linear[a] x_a + sum_a quadratic[a] x_a^2
struct SurfaceChargeConfig {
  double constant = 0;
  std::vector<double> linear;
  std::vector<double> quadratic;

  double operator()(const Point& x) const;
  bool is_zero() const;
  bool operator==(const SurfaceChargeConfig&) const = default;
};

struct MacroConfig {
  std::vector<double> lengths{1.0, 1.0};
  std::vector<int> cells{32, 32};
  double C_O_D = 1;
  double C_plus_D = 1;
  double Phi_D_O = 0;
  double Phi_D_H = 0;
  SurfaceChargeConfig sigma_s;

  bool operator==(const MacroConfig&) const = default;
};

struct SolverConfig {
  double tol_nl = 1e-8;
  double tol_lin = 1e-10;
  int max_outer = 200;
  double damping = 1.0;
  double min_damping = 1.0 / 1024;
  int block_cells = 4;
  std::string free_energy_sign = "as_printed";  ///< as_printed | flipped

  bool operator==(const SolverConfig&) const = default;
};

struct MicroConfig {
  std::vector<double> r_list{0.25, 0.125, 0.0625};

  bool operator==(const MicroConfig&) const = default;
};

struct RunConfig {
  GeometryConfig geometry;
  std::optional<Nondimensionalization> physical;
  std::optional<DimensionlessConfig> dimensionless;
  ReactionParameters reaction;
  MacroConfig macro;
  SolverConfig solver;
  MicroConfig micro;
  std::string output_dir = "out";

  bool operator==(const RunConfig& other) const;
};

/// Parses the key-value format described in the README. Throws ConfigError
/// (with the offending line) for syntax errors, unknown sections or keys, bad
/// values and violated invariants. Relative bitmap paths resolve against `base_dir`.
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig parse_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// Checks cross-field invariants (throws ConfigError).
void validate(const RunConfig& config);

CellSpec cell_spec(const RunConfig& config, double lambda_sq, double gamma);

/// lambda, gamma and the interface-scaled betas. Without a parameter block
/// lambda = gamma = 1 and the betas are zero.
DimensionlessParameters resolve_parameters(const RunConfig& config, double Lambda);

SolverControls solver_controls(const RunConfig& config);

}  // namespace homog
