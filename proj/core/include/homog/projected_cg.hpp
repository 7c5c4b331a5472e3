#pragma once

#include <vector>

#include <Eigen/Sparse>

namespace homog::linalg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Null space of a singular SPD-on-its-range system: one constant vector per
/// connected component. `weights` define the mean removed from the solution.
struct NullSpace {
  std::vector<int> component;  ///< component id per unknown
  int num_components = 0;
  Eigen::VectorXd weights;
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0;
  bool converged = false;
};

/// Preconditioned CG (Jacobi) on the range of A. The right-hand side and every
/// residual/search direction are projected orthogonally to the component
/// constants; the result has zero weighted mean on every component.
CgResult projected_pcg(const SparseMatrix& A, const Eigen::VectorXd& b, const NullSpace& null_space,
                       double tol, int max_iterations);

/// Euclidean projection onto the orthogonal complement of the component constants.
void project_out_constants(Eigen::VectorXd& v, const NullSpace& null_space);

/// Subtracts the weighted mean of every component.
void remove_weighted_means(Eigen::VectorXd& x, const NullSpace& null_space);

}  // namespace homog::linalg
