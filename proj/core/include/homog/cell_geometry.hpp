#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace homog {

using Point = std::array<double, 3>;

enum class Phase : std::uint8_t { pore = 0, solid = 1 };

/// Periodic reference cell Y = [0,1]^dim discretized by n^dim voxels.
///
/// Voxel (i0, i1, i2) covers [i0/n, (i0+1)/n] x ... and its linear index is
/// i0 + n*(i1 + n*i2). Indices wrap periodically. The permittivity is
/// lambda_sq on pore voxels and gamma on solid voxels.
class UnitCell {
 public:
  UnitCell(int dim, int n, std::vector<Phase> phase, double lambda_sq, double gamma);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / n_; }
  double lambda_sq() const noexcept { return lambda_sq_; }
  double gamma() const noexcept { return gamma_; }

  std::size_t num_voxels() const noexcept { return phase_.size(); }
  const std::vector<Phase>& phases() const noexcept { return phase_; }
  Phase phase(std::size_t voxel) const { return phase_[voxel]; }
  bool is_pore(std::size_t voxel) const { return phase_[voxel] == Phase::pore; }
  std::size_t pore_count() const noexcept { return pore_count_; }
  bool has_solid() const noexcept { return pore_count_ < phase_.size(); }

  /// Permittivity of a voxel.
  double permittivity(std::size_t voxel) const { return is_pore(voxel) ? lambda_sq_ : gamma_; }

  /// Linear index of (possibly out-of-range) integer coordinates, wrapped periodically.
  std::size_t index(std::array<int, 3> ijk) const noexcept;
  std::array<int, 3> coords(std::size_t voxel) const noexcept;

  /// Same geometry with different permittivities.
  UnitCell with_permittivity(double lambda_sq, double gamma) const;

  /// Hash of geometry and permittivities, used to detect mixing fields of different cells.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

 private:
  int dim_;
  int n_;
  std::vector<Phase> phase_;
  double lambda_sq_;
  double gamma_;
  std::size_t pore_count_ = 0;
  std::uint64_t fingerprint_ = 0;
};

/// Pore slab normal to y2: the pore occupies round(p*n) voxel layers centred in the
/// cell, the rest is one solid slab (joined across the periodic boundary).
struct ChannelShape {
  double porosity = 0.6;
};

/// Centred axis-aligned solid box with the given side lengths (one per axis).
struct InclusionShape {
  std::vector<double> sides;
};

/// 2D bitmap of 0 (pore) / 1 (solid), see parse_bitmap().
struct BitmapShape {
  std::filesystem::path file;
};

using CellShape = std::variant<ChannelShape, InclusionShape, BitmapShape>;

struct CellSpec {
  CellShape shape = ChannelShape{};
  int dim = 2;
  int n = 32;  ///< ignored for bitmaps, whose size defines n
  double lambda_sq = 1.0;
  double gamma = 1.0;
};

UnitCell build_cell(const CellSpec& spec);

/// Parses a square 2D bitmap. Accepts an optional PBM-style "P1 <w> <h>" header,
/// '#' comments and digits separated by optional whitespace. '1' marks solid.
/// The first text row is the top of the cell (largest y2).
UnitCell parse_bitmap(std::string_view text, double lambda_sq, double gamma);

/// |Y^p| / |Y| as pore voxel count over n^dim.
double porosity(const UnitCell& cell);

/// One voxel face separating a pore voxel from a solid voxel.
struct InterfaceFace {
  Point midpoint{};  ///< in [0,1]^dim; unused coordinates are 0
  double area = 0;   ///< (1/n)^(dim-1)
  int axis = 0;      ///< normal direction
  std::size_t pore_voxel = 0;
  std::size_t solid_voxel = 0;
};

/// All pore/solid faces, periodic wrap included.
std::vector<InterfaceFace> interface_faces(const UnitCell& cell);

/// (dim-1)-dimensional measure of the pore/solid interface.
double interface_measure(const UnitCell& cell);

/// Physical constants and scales; only enters through lambda, gamma and the betas.
struct Nondimensionalization {
  double i0 = 0;         ///< exchange current density
  double L = 1;          ///< catalyst-layer length
  double e = 1.602176634e-19;
  double D_O = 1;
  double D_plus = 1;
  double eps_pore = 1;
  double eps_solid = 1;
  double R = 8.314462618;
  double T = 298.15;
  double F = 96485.33212;
  double z_plus = 1;
  double c_bar = 1;
  double k_B = 1.380649e-23;

  /// sqrt(eps_pore R T / (2 z_plus^2 e F c_bar))
  double debye_length() const;

  bool operator==(const Nondimensionalization&) const = default;
};

}  // namespace homog
