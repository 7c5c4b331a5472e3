#include "periodic_q1.hpp"

#include <cmath>
#include <numeric>

namespace homog::detail {

Q1Element make_q1_element(int dim, double h) {
  Q1Element el;
  el.dim = dim;
  el.num_nodes = 1 << dim;
  el.volume = std::pow(h, dim);
  const double S[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
  const double M[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
  const int m = el.num_nodes;
  el.stiffness.assign(static_cast<std::size_t>(m * m), 0.0);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      double sum = 0;
      for (int ax = 0; ax < dim; ++ax) {
        double term = S[(a >> ax) & 1][(b >> ax) & 1];
        for (int o = 0; o < dim; ++o)
          if (o != ax) term *= M[(a >> o) & 1][(b >> o) & 1];
        sum += term;
      }
      el.stiffness[static_cast<std::size_t>(a * m + b)] = sum;
    }
  }
  const double face = std::pow(0.5 * h, dim - 1);
  const double grad_scale = 1.0 / (h * std::pow(2.0, dim - 1));
  el.affine_load.assign(static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(m)));
  el.midpoint_grad.assign(static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(m)));
  for (int k = 0; k < dim; ++k) {
    for (int a = 0; a < m; ++a) {
      const double sign = ((a >> k) & 1) ? 1.0 : -1.0;
      el.affine_load[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)] = sign * face;
      el.midpoint_grad[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)] = sign * grad_scale;
    }
  }
  return el;
}

std::vector<std::size_t> element_nodes(const UnitCell& cell, std::size_t e) {
  const auto base = cell.coords(e);
  const int m = 1 << cell.dim();
  std::vector<std::size_t> nodes(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    auto ijk = base;
    for (int k = 0; k < cell.dim(); ++k) ijk[k] += (a >> k) & 1;
    nodes[static_cast<std::size_t>(a)] = cell.index(ijk);
  }
  return nodes;
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

PeriodicSystem assemble_periodic(const UnitCell& cell, const std::vector<double>& coef,
                                 const std::vector<bool>& mean_domain) {
  const std::size_t num_nodes = cell.num_voxels();
  const Q1Element el = make_q1_element(cell.dim(), cell.h());
  const int m = el.num_nodes;

  PeriodicSystem sys;
  sys.dof_of_node.assign(num_nodes, -1);
  for (std::size_t e = 0; e < num_nodes; ++e) {
    if (!(coef[e] > 0)) continue;
    for (std::size_t node : element_nodes(cell, e)) sys.dof_of_node[node] = 0;
  }
  for (std::size_t node = 0; node < num_nodes; ++node) {
    if (sys.dof_of_node[node] < 0) continue;
    sys.dof_of_node[node] = static_cast<int>(sys.node_of_dof.size());
    sys.node_of_dof.push_back(node);
  }
  const auto ndof = sys.node_of_dof.size();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(num_nodes * static_cast<std::size_t>(m * m));
  DisjointSets sets(ndof);
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
  const double node_share = el.volume / m;

  for (std::size_t e = 0; e < num_nodes; ++e) {
    const auto nodes = element_nodes(cell, e);
    if (mean_domain[e]) {
      for (std::size_t node : nodes) {
        const int d = sys.dof_of_node[node];
        if (d >= 0) weights[d] += node_share;
      }
    }
    if (!(coef[e] > 0)) continue;
    for (int a = 0; a < m; ++a) {
      const int da = sys.dof_of_node[nodes[static_cast<std::size_t>(a)]];
      sets.unite(da, sys.dof_of_node[nodes[0]]);
      for (int b = 0; b < m; ++b) {
        const int db = sys.dof_of_node[nodes[static_cast<std::size_t>(b)]];
        triplets.emplace_back(da, db, coef[e] * el.stiffness[static_cast<std::size_t>(a * m + b)]);
      }
    }
  }
  sys.K.resize(static_cast<Eigen::Index>(ndof), static_cast<Eigen::Index>(ndof));
  sys.K.setFromTriplets(triplets.begin(), triplets.end());
  sys.K.makeCompressed();

  // Relabel components densely in dof order so the numbering is deterministic.
  std::vector<int> label(ndof, -1);
  sys.null_space.component.assign(ndof, 0);
  int next = 0;
  for (std::size_t d = 0; d < ndof; ++d) {
    const auto root = static_cast<std::size_t>(sets.find(static_cast<int>(d)));
    if (label[root] < 0) label[root] = next++;
    sys.null_space.component[d] = label[root];
  }
  sys.null_space.num_components = next;
  sys.null_space.weights = weights;
  return sys;
}

Eigen::VectorXd affine_load(const UnitCell& cell, const std::vector<double>& coef, const PeriodicSystem& sys,
                            int k) {
  const Q1Element el = make_q1_element(cell.dim(), cell.h());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.node_of_dof.size()));
  for (std::size_t e = 0; e < cell.num_voxels(); ++e) {
    if (!(coef[e] > 0)) continue;
    const auto nodes = element_nodes(cell, e);
    for (int a = 0; a < el.num_nodes; ++a) {
      const int d = sys.dof_of_node[nodes[static_cast<std::size_t>(a)]];
      b[d] += coef[e] * el.affine_load[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)];
    }
  }
  return b;
}

}  // namespace homog::detail
