#include "finite_volume.hpp"

#include <cmath>

namespace homog::detail {

double bernoulli(double x) {
  if (std::abs(x) < 1e-10) return 1.0 - 0.5 * x;
  return x / std::expm1(x);
}

bool negligible(const Eigen::MatrixXd& T, int a, int b) {
  const double scale = T.cwiseAbs().maxCoeff();
  return std::abs(T(a, b)) <= 1e-12 * scale || scale == 0;
}

namespace {

std::vector<std::pair<std::size_t, double>> nodal_gradient(const BoxGrid& grid, std::size_t node, int b) {
  const int i = grid.node_coords(node)[static_cast<std::size_t>(b)];
  const std::size_t s = grid.stride(b);
  const double h = grid.spacing(b);
  if (i == 0) return {{node + s, 1 / h}, {node, -1 / h}};
  if (i == grid.cells(b)) return {{node, 1 / h}, {node - s, -1 / h}};
  return {{node + s, 0.5 / h}, {node - s, -0.5 / h}};
}

}  // namespace

FvOperators build_box_operators(const BoxGrid& grid, const EffectiveCoefficients& c) {
  FvOperators ops;
  const int d = grid.dim();
  auto diag = [&](const Eigen::MatrixXd& T, int a) { return negligible(T, a, a) ? 0.0 : T(a, a); };

  for (std::size_t p = 0; p < grid.num_nodes(); ++p) {
    for (int a = 0; a < d; ++a) {
      if (grid.on_high_face(p, a)) continue;
      const std::size_t q = p + grid.stride(a);
      double area = 1;
      for (int b = 0; b < d; ++b)
        if (b != a) area *= grid.dual_width(p, b);
      const double f = area / grid.spacing(a);
      Edge e{p, q, f * diag(c.D_O, a), f * diag(c.D_plus, a), f * diag(c.M_plus, a), f * diag(c.eps, a)};
      if (e.w_O != 0 || e.w_D != 0 || e.w_M != 0 || e.w_E != 0) ops.edges.push_back(e);

      for (int b = 0; b < d; ++b) {
        if (b == a) continue;
        auto cross = [&](const Eigen::MatrixXd& T) {
          if (negligible(T, a, b) || diag(T, a) == 0 || diag(T, b) == 0) return 0.0;
          return T(a, b);
        };
        CrossFace cf{p, q, area, {}, cross(c.D_O), cross(c.D_plus), cross(c.M_plus), cross(c.eps)};
        if (cf.c_O == 0 && cf.c_D == 0 && cf.c_M == 0 && cf.c_E == 0) continue;
        for (auto [n, w] : nodal_gradient(grid, p, b)) cf.grad.emplace_back(n, 0.5 * w);
        for (auto [n, w] : nodal_gradient(grid, q, b)) cf.grad.emplace_back(n, 0.5 * w);
        ops.cross.push_back(std::move(cf));
      }
    }
  }
  return ops;
}

}  // namespace homog::detail
