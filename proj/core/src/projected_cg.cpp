#include "homog/projected_cg.hpp"

#include <cmath>

namespace homog::linalg {

void project_out_constants(Eigen::VectorXd& v, const NullSpace& ns) {
  std::vector<double> sum(static_cast<std::size_t>(ns.num_components), 0.0);
  std::vector<double> count(static_cast<std::size_t>(ns.num_components), 0.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto c = static_cast<std::size_t>(ns.component[static_cast<std::size_t>(i)]);
    sum[c] += v[i];
    count[c] += 1.0;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto c = static_cast<std::size_t>(ns.component[static_cast<std::size_t>(i)]);
    v[i] -= sum[c] / count[c];
  }
}

void remove_weighted_means(Eigen::VectorXd& x, const NullSpace& ns) {
  std::vector<double> sum(static_cast<std::size_t>(ns.num_components), 0.0);
  std::vector<double> weight(static_cast<std::size_t>(ns.num_components), 0.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto c = static_cast<std::size_t>(ns.component[static_cast<std::size_t>(i)]);
    sum[c] += ns.weights[i] * x[i];
    weight[c] += ns.weights[i];
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto c = static_cast<std::size_t>(ns.component[static_cast<std::size_t>(i)]);
    if (weight[c] > 0) x[i] -= sum[c] / weight[c];
  }
}

CgResult projected_pcg(const SparseMatrix& A, const Eigen::VectorXd& b, const NullSpace& ns, double tol,
                       int max_iterations) {
  CgResult result;
  const Eigen::Index n = b.size();
  result.x = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd rhs = b;
  project_out_constants(rhs, ns);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    result.converged = true;
    return result;
  }

  Eigen::VectorXd inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = A.coeff(i, i);
    inv_diag[i] = d > 0 ? 1.0 / d : 1.0;
  }

  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z(n);
  Eigen::VectorXd p(n);
  Eigen::VectorXd Ap(n);
  double rz = 0;
  bool restart = true;

  for (int it = 1; it <= max_iterations; ++it) {
    if (restart) {
      z = inv_diag.cwiseProduct(r);
      project_out_constants(z, ns);
      p = z;
      rz = r.dot(z);
      restart = false;
    }
    Ap.noalias() = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0)) break;
    const double alpha = rz / pAp;
    result.x.noalias() += alpha * p;
    r.noalias() -= alpha * Ap;
    project_out_constants(r, ns);
    result.iterations = it;
    if (r.norm() <= tol * rhs_norm) {
      // Confirm with the true residual; restart from it if rounding has drifted.
      r = rhs - A * result.x;
      project_out_constants(r, ns);
      if (r.norm() <= tol * rhs_norm) {
        result.converged = true;
        break;
      }
      restart = true;
      continue;
    }
    z = inv_diag.cwiseProduct(r);
    project_out_constants(z, ns);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }

  Eigen::VectorXd true_r = rhs - A * result.x;
  project_out_constants(true_r, ns);
  result.relative_residual = true_r.norm() / rhs_norm;
  remove_weighted_means(result.x, ns);
  return result;
}

}  // namespace homog::linalg
