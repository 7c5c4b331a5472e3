#include "homog/effective_tensors.hpp"

#include <cmath>

#include "homog/errors.hpp"
#include "periodic_q1.hpp"

namespace homog {

namespace {

void check_set(const UnitCell& cell, const CorrectorSet& set) {
  const auto dim = static_cast<std::size_t>(cell.dim());
  if (set.oxygen.size() != dim || set.proton.size() != dim || set.potential.size() != dim)
    throw InvalidArgument("missing corrector: need oxygen, proton and potential correctors for every direction");
  auto check = [&](const CorrectorField& f, CorrectorSpecies s, std::size_t k) {
    if (f.species != s || f.direction != static_cast<int>(k) || f.values.size() != cell.num_voxels())
      throw InvalidArgument(std::string("missing or misplaced ") + to_string(s) + " corrector for direction " +
                            std::to_string(k));
    if (f.cell_fingerprint != cell.fingerprint())
      throw InvalidArgument(std::string(to_string(s)) + " corrector was computed on a different cell");
  };
  for (std::size_t k = 0; k < dim; ++k) {
    check(set.oxygen[k], CorrectorSpecies::oxygen, k);
    check(set.proton[k], CorrectorSpecies::proton, k);
    check(set.potential[k], CorrectorSpecies::potential, k);
  }
}

// int_{domain} weight(e) (delta_ik - d_i N^k) over elements.
Eigen::MatrixXd average(const UnitCell& cell, const std::vector<CorrectorField>& correctors,
                        const std::function<double(std::size_t)>& weight) {
  const int dim = cell.dim();
  const auto el = detail::make_q1_element(dim, cell.h());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t e = 0; e < cell.num_voxels(); ++e) {
    const double w = weight(e);
    if (w == 0.0) continue;
    const auto nodes = detail::element_nodes(cell, e);
    for (int k = 0; k < dim; ++k) {
      const auto& N = correctors[static_cast<std::size_t>(k)].values;
      for (int i = 0; i < dim; ++i) {
        double grad = 0;
        for (int a = 0; a < el.num_nodes; ++a)
          grad += el.midpoint_grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] *
                  N[nodes[static_cast<std::size_t>(a)]];
        T(i, k) += w * el.volume * ((i == k ? 1.0 : 0.0) - grad);
      }
    }
  }
  return T;
}

}  // namespace

EffectiveCoefficients assemble_tensors(const UnitCell& cell, const CorrectorSet& set) {
  check_set(cell, set);
  auto pore = [&](std::size_t e) { return cell.is_pore(e) ? 1.0 : 0.0; };
  auto eps = [&](std::size_t e) { return cell.permittivity(e); };
  EffectiveCoefficients c;
  c.D_O = average(cell, set.oxygen, pore);
  c.D_plus = average(cell, set.proton, pore);
  c.M_plus = average(cell, set.potential, pore);
  c.eps = average(cell, set.potential, eps);
  c.porosity = porosity(cell);
  c.Lambda = interface_measure(cell);
  return c;
}

EffectiveCoefficients compute_effective_coefficients(const UnitCell& cell, const LinearControls& controls,
                                                     int threads) {
  return assemble_tensors(cell, solve_all_correctors(cell, controls, threads));
}

DimensionlessParameters derive_dimensionless(const Nondimensionalization& nd, double Lambda) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw InvalidArgument(std::string("physical constant ") + name + " must be positive");
  };
  positive(nd.L, "L");
  positive(nd.e, "e");
  positive(nd.D_O, "D_O");
  positive(nd.D_plus, "D_plus");
  positive(nd.eps_pore, "eps_pore");
  positive(nd.R, "R");
  positive(nd.T, "T");
  positive(nd.F, "F");
  positive(nd.z_plus * nd.z_plus, "z_plus");
  positive(nd.c_bar, "c_bar");
  if (!(nd.i0 >= 0)) throw InvalidArgument("exchange current density i0 must be non-negative");
  if (!(nd.eps_solid >= 0)) throw InvalidArgument("solid permittivity must be non-negative");
  if (!(Lambda >= 0)) throw InvalidArgument("interface measure must be non-negative");

  DimensionlessParameters d;
  d.lambda = nd.debye_length() / nd.L;
  d.gamma = nd.eps_solid / nd.eps_pore;
  d.beta_O = nd.i0 * nd.L / (4.0 * nd.e * nd.D_O);
  d.beta_plus = nd.i0 * nd.L / (nd.e * nd.D_plus);
  d.beta_O_bar = Lambda * d.beta_O;
  d.beta_plus_bar = Lambda * d.beta_plus;
  return d;
}

void scale_reaction(EffectiveCoefficients& coeffs, double beta_O, double beta_plus) {
  coeffs.beta_O_bar = coeffs.Lambda * beta_O;
  coeffs.beta_plus_bar = coeffs.Lambda * beta_plus;
}

SurfaceChargeResult homogenize_surface_charge(const SurfaceChargeDensity& sigma_s, const UnitCell& cell,
                                              const BoxGrid& macro_grid) {
  const auto faces = interface_faces(cell);
  SurfaceChargeResult out;
  out.rho_s.assign(macro_grid.num_nodes(), 0.0);
  for (std::size_t node = 0; node < macro_grid.num_nodes(); ++node) {
    const Point x = macro_grid.node_position(node);
    if (faces.empty()) {
      if (sigma_s(x, Point{0.5, 0.5, 0.5}) != 0.0) out.warning_no_interface = true;
      continue;
    }
    double sum = 0;
    for (const auto& f : faces) sum += sigma_s(x, f.midpoint) * f.area;
    out.rho_s[node] = sum;
  }
  return out;
}

}  // namespace homog
