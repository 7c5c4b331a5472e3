#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "homog/effective_tensors.hpp"
#include "homog/errors.hpp"

using namespace homog;

namespace {

double max_entry(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("all-pore cell gives identity tensors") {
  const UnitCell c = build_cell({InclusionShape{{0.0}}, 2, 8, 0.04, 0.04});
  const auto t = compute_effective_coefficients(c);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  CHECK(max_entry(t.D_O - I) <= 1e-9);
  CHECK(max_entry(t.D_plus - I) <= 1e-9);
  CHECK(max_entry(t.M_plus - I) <= 1e-9);
  CHECK(max_entry(t.eps - 0.04 * I) <= 1e-9);
  CHECK(t.porosity == 1.0);
  CHECK(t.Lambda == 0.0);
}

TEST_CASE("layered channel with insulating solid") {
  const double lambda_sq = 0.01;
  const UnitCell c = build_cell({ChannelShape{0.6}, 2, 10, lambda_sq, 0.0});
  const auto t = compute_effective_coefficients(c);
  Eigen::MatrixXd expect(2, 2);
  expect << 0.6, 0, 0, 0;
  CHECK(max_entry(t.D_O - expect) <= 1e-6);
  CHECK(max_entry(t.M_plus - expect) <= 1e-6);
  CHECK(max_entry(t.D_plus - expect) <= 1e-6);
  CHECK(max_entry(t.eps - lambda_sq * expect) <= 1e-6);
  CHECK(t.Lambda == doctest::Approx(2.0));
}

TEST_CASE("proton diffusion and mobility tensors coincide") {
  for (double gamma : {0.0, 0.3, 5.0}) {
    const auto t = compute_effective_coefficients(build_cell({InclusionShape{{0.5, 0.25}}, 2, 16, 1.0, gamma}));
    CHECK(max_entry(t.D_plus - t.M_plus) <= 1e-9);
  }
}

TEST_CASE("tensor properties") {
  const UnitCell c = build_cell({InclusionShape{{0.5, 0.25}}, 2, 16, 0.5, 0.2});
  const auto t = compute_effective_coefficients(c);
  for (const Eigen::MatrixXd* T : {&t.D_O, &t.D_plus, &t.M_plus, &t.eps}) {
    CHECK(max_entry(*T - T->transpose()) <= 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (*T + T->transpose()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
  for (int i = 0; i < 2; ++i) {
    CHECK(t.D_O(i, i) <= t.porosity + 1e-8);
    CHECK(t.M_plus(i, i) <= t.porosity + 1e-8);
  }

  // swapping the inclusion's sides swaps the tensor axes
  const auto s = compute_effective_coefficients(build_cell({InclusionShape{{0.25, 0.5}}, 2, 16, 0.5, 0.2}));
  Eigen::MatrixXd P(2, 2);
  P << 0, 1, 1, 0;
  CHECK(max_entry(P * t.D_O * P - s.D_O) <= 1e-9);
  CHECK(max_entry(P * t.eps * P - s.eps) <= 1e-9);
}

TEST_CASE("reaction numbers scale with the interface measure") {
  auto t = compute_effective_coefficients(build_cell({InclusionShape{{0.5}}, 2, 16}));
  scale_reaction(t, 3.0, 5.0);
  CHECK(t.beta_O_bar == doctest::Approx(3.0 * t.Lambda).epsilon(1e-15));
  CHECK(t.beta_plus_bar == doctest::Approx(5.0 * t.Lambda).epsilon(1e-15));
}

TEST_CASE("assembly rejects missing or foreign correctors") {
  const UnitCell c = build_cell({InclusionShape{{0.5}}, 2, 8});
  CorrectorSet s = solve_all_correctors(c);
  CorrectorSet missing = s;
  missing.proton.pop_back();
  CHECK_THROWS_AS(assemble_tensors(c, missing), InvalidArgument);
  CHECK_THROWS_AS(assemble_tensors(c.with_permittivity(2.0, 1.0), s), InvalidArgument);
  CorrectorSet swapped = s;
  std::swap(swapped.oxygen[0], swapped.oxygen[1]);
  CHECK_THROWS_AS(assemble_tensors(c, swapped), InvalidArgument);
}

TEST_CASE("surface charge homogenization") {
  const BoxGrid grid({1.0, 1.0}, {4, 4});
  const UnitCell channel = build_cell({ChannelShape{0.6}, 2, 10});
  auto zero = homogenize_surface_charge([](const Point&, const Point&) { return 0.0; }, channel, grid);
  for (double r : zero.rho_s) CHECK(r == 0.0);

  auto constant = homogenize_surface_charge([](const Point&, const Point&) { return -0.7; }, channel, grid);
  for (double r : constant.rho_s) CHECK(r == doctest::Approx(-1.4));

  auto linear = homogenize_surface_charge([](const Point& x, const Point&) { return x[0]; }, channel, grid);
  for (std::size_t i = 0; i < grid.num_nodes(); ++i)
    CHECK(linear.rho_s[i] == doctest::Approx(2.0 * grid.node_position(i)[0]));
  CHECK_FALSE(linear.warning_no_interface);

  const UnitCell pore = build_cell({InclusionShape{{0.0}}, 2, 8});
  auto none = homogenize_surface_charge([](const Point&, const Point&) { return 1.0; }, pore, grid);
  CHECK(none.warning_no_interface);
  for (double r : none.rho_s) CHECK(r == 0.0);
}

TEST_CASE("dimensionless numbers") {
  Nondimensionalization nd;
  nd.i0 = 0;
  auto d = derive_dimensionless(nd, 2.0);
  CHECK(d.beta_O_bar == 0.0);
  CHECK(d.beta_plus_bar == 0.0);
  CHECK(d.gamma == 1.0);

  nd.i0 = 2.0;
  nd.L = 3.0;
  nd.e = 0.5;
  nd.D_O = 1.5;
  nd.D_plus = 4.0;
  d = derive_dimensionless(nd, 0.0);
  CHECK(d.beta_O_bar == 0.0);
  CHECK(d.beta_O == doctest::Approx(2.0 * 3.0 / (4 * 0.5 * 1.5)));
  d = derive_dimensionless(nd, 2.0);
  CHECK(d.beta_plus_bar == doctest::Approx(2.0 * 2.0 * 3.0 / (0.5 * 4.0)));
  CHECK(d.lambda == doctest::Approx(nd.debye_length() / 3.0));

  nd.D_O = -1;
  CHECK_THROWS_AS(derive_dimensionless(nd, 1.0), InvalidArgument);
}
