#pragma once

// Conforming Q1 elements on the periodic voxel grid of a UnitCell. Nodes share
// the voxel index space: node i sits at i/n and element e has nodes e + {0,1}^dim
// (wrapped), so periodic identification is built into the numbering.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "homog/cell_geometry.hpp"
#include "homog/projected_cg.hpp"

namespace homog::detail {

struct Q1Element {
  int dim = 2;
  int num_nodes = 4;
  std::vector<double> stiffness;                  ///< num_nodes^2, unit coefficient
  std::vector<std::vector<double>> affine_load;   ///< [k][a] = integral of d/dy_k phi_a
  std::vector<std::vector<double>> midpoint_grad; ///< [k][a]: d/dy_k u(midpoint) = sum_a w u_a
  double volume = 0;
};

Q1Element make_q1_element(int dim, double h);

/// Global node indices of element `e`, local node a has offset bit k = (a >> k) & 1.
std::vector<std::size_t> element_nodes(const UnitCell& cell, std::size_t e);

struct PeriodicSystem {
  linalg::SparseMatrix K;
  std::vector<int> dof_of_node;  ///< -1 for nodes without a degree of freedom
  std::vector<std::size_t> node_of_dof;
  linalg::NullSpace null_space;
};

/// Stiffness of sum_e coef_e * grad u . grad v over the nodes touching an element
/// with coef_e > 0. Mean weights integrate over elements flagged in `mean_domain`.
PeriodicSystem assemble_periodic(const UnitCell& cell, const std::vector<double>& coef,
                                 const std::vector<bool>& mean_domain);

/// sum_e coef_e * integral_e d/dy_k phi_a, restricted to the system's dofs.
Eigen::VectorXd affine_load(const UnitCell& cell, const std::vector<double>& coef, const PeriodicSystem& sys,
                            int k);

}  // namespace homog::detail
