#include "homog/box_grid.hpp"

#include "homog/errors.hpp"

namespace homog {

BoxGrid::BoxGrid(std::vector<double> lengths, std::vector<int> cells)
    : lengths_(std::move(lengths)), cells_(std::move(cells)) {
  if (cells_.empty() || cells_.size() > 3) throw InvalidArgument("grid dimension must be 1, 2 or 3");
  if (lengths_.size() != cells_.size()) throw InvalidArgument("grid needs one length per axis");
  num_nodes_ = 1;
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    if (cells_[a] < 1) throw InvalidArgument("grid needs at least one cell per axis");
    if (!(lengths_[a] > 0)) throw InvalidArgument("grid lengths must be positive");
    strides_.push_back(num_nodes_);
    num_nodes_ *= static_cast<std::size_t>(cells_[a] + 1);
  }
}

std::size_t BoxGrid::num_cells() const noexcept {
  std::size_t n = 1;
  for (int c : cells_) n *= static_cast<std::size_t>(c);
  return n;
}

std::size_t BoxGrid::node_index(std::array<int, 3> ijk) const noexcept {
  std::size_t idx = 0;
  for (std::size_t a = 0; a < cells_.size(); ++a) idx += strides_[a] * static_cast<std::size_t>(ijk[a]);
  return idx;
}

std::array<int, 3> BoxGrid::node_coords(std::size_t node) const noexcept {
  std::array<int, 3> ijk{0, 0, 0};
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    const auto n = static_cast<std::size_t>(cells_[a] + 1);
    ijk[a] = static_cast<int>(node % n);
    node /= n;
  }
  return ijk;
}

Point BoxGrid::node_position(std::size_t node) const noexcept {
  const auto ijk = node_coords(node);
  Point x{0, 0, 0};
  for (int a = 0; a < dim(); ++a) x[static_cast<std::size_t>(a)] = ijk[static_cast<std::size_t>(a)] * spacing(a);
  return x;
}

double BoxGrid::dual_width(std::size_t node, int axis) const {
  const int i = node_coords(node)[static_cast<std::size_t>(axis)];
  const double h = spacing(axis);
  return (i == 0 || i == cells(axis)) ? 0.5 * h : h;
}

double BoxGrid::control_volume(std::size_t node) const {
  double v = 1;
  for (int a = 0; a < dim(); ++a) v *= dual_width(node, a);
  return v;
}

double BoxGrid::volume() const {
  double v = 1;
  for (double l : lengths_) v *= l;
  return v;
}

std::size_t BoxGrid::cell_index(std::array<int, 3> ijk) const noexcept {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    idx += stride * static_cast<std::size_t>(ijk[a]);
    stride *= static_cast<std::size_t>(cells_[a]);
  }
  return idx;
}

std::array<int, 3> BoxGrid::cell_coords(std::size_t cell) const noexcept {
  std::array<int, 3> ijk{0, 0, 0};
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    const auto n = static_cast<std::size_t>(cells_[a]);
    ijk[a] = static_cast<int>(cell % n);
    cell /= n;
  }
  return ijk;
}

}  // namespace homog
