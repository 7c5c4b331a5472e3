#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "homog/cell_geometry.hpp"

namespace homog {

/// Uniform node grid on the box [0, L_0] x ... x [0, L_{d-1}], d = 1..3.
///
/// Axis a has `cells(a)` intervals and `cells(a) + 1` nodes; node (i0, i1, i2) has
/// linear index i0 + (N0+1) * (i1 + (N1+1) * i2). Each node owns the box-shaped
/// control volume between the midpoints to its neighbours.
class BoxGrid {
 public:
  BoxGrid() = default;
  BoxGrid(std::vector<double> lengths, std::vector<int> cells);

  int dim() const noexcept { return static_cast<int>(cells_.size()); }
  int cells(int axis) const { return cells_[static_cast<std::size_t>(axis)]; }
  int nodes_along(int axis) const { return cells_[static_cast<std::size_t>(axis)] + 1; }
  double length(int axis) const { return lengths_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return lengths_[static_cast<std::size_t>(axis)] / cells_[static_cast<std::size_t>(axis)]; }
  const std::vector<double>& lengths() const noexcept { return lengths_; }
  const std::vector<int>& cell_counts() const noexcept { return cells_; }

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_cells() const noexcept;
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

  std::size_t node_index(std::array<int, 3> ijk) const noexcept;
  std::array<int, 3> node_coords(std::size_t node) const noexcept;
  Point node_position(std::size_t node) const noexcept;

  /// Width of the control volume of a node along one axis (h, or h/2 on the boundary).
  double dual_width(std::size_t node, int axis) const;
  double control_volume(std::size_t node) const;
  double volume() const;

  bool on_low_face(std::size_t node, int axis) const { return node_coords(node)[static_cast<std::size_t>(axis)] == 0; }
  bool on_high_face(std::size_t node, int axis) const {
    return node_coords(node)[static_cast<std::size_t>(axis)] == cells(axis);
  }

  /// Cell (i0, i1, i2) -> linear index i0 + N0 * (i1 + N1 * i2).
  std::size_t cell_index(std::array<int, 3> ijk) const noexcept;
  std::array<int, 3> cell_coords(std::size_t cell) const noexcept;

  bool operator==(const BoxGrid& other) const = default;

 private:
  std::vector<double> lengths_;
  std::vector<int> cells_;
  std::vector<std::size_t> strides_;
  std::size_t num_nodes_ = 0;
};

}  // namespace homog
