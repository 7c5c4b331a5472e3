#pragma once

// Vertex-centred finite volumes on node grids. An edge joins two nodes that
// share a dual face; its weights are coefficient * face area / spacing for the
// four operators (oxygen diffusion, proton diffusion, proton mobility,
// permittivity).

#include <cstddef>
#include <utility>
#include <vector>

#include "homog/box_grid.hpp"
#include "homog/effective_tensors.hpp"

namespace homog::detail {

struct Edge {
  std::size_t p = 0;
  std::size_t q = 0;
  double w_O = 0;
  double w_D = 0;
  double w_M = 0;
  double w_E = 0;
};

/// Off-diagonal tensor contribution across the dual face of edge (p, q): the
/// flux leaving p is -area * c * sum_j w_j u_j, with the stencil approximating
/// the transverse derivative at the face.
struct CrossFace {
  std::size_t p = 0;
  std::size_t q = 0;
  double area = 0;
  std::vector<std::pair<std::size_t, double>> grad;
  double c_O = 0;
  double c_D = 0;
  double c_M = 0;
  double c_E = 0;
};

/// x / (e^x - 1), the Bernoulli function of the Scharfetter-Gummel flux.
double bernoulli(double x);

struct FvOperators {
  std::vector<Edge> edges;
  std::vector<CrossFace> cross;
};

/// Box-method operators for constant tensors on a BoxGrid. Directions whose
/// diagonal entry vanishes carry no flux.
FvOperators build_box_operators(const BoxGrid& grid, const EffectiveCoefficients& coeffs);

/// Tensor entry counted as zero: |T_ab| <= 1e-12 * max |T|.
bool negligible(const Eigen::MatrixXd& T, int a, int b);

}  // namespace homog::detail
