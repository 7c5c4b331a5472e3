#include <doctest.h>

#include <cmath>

#include "homog/errors.hpp"
#include "homog/limits.hpp"

using namespace homog;

namespace {

TDLProblem tdl_problem(double p, double rho) {
  TDLProblem prob{BoxGrid({1.0, 1.0}, {12, 12}), straight_channel_tensors(p, 0.0, 2)};
  prob.coeffs.D_O(1, 1) = prob.coeffs.D_plus(1, 1) = prob.coeffs.M_plus(1, 1) = 0.5 * p;
  prob.rho_s.assign(prob.grid.num_nodes(), rho);
  prob.bc.Phi_D_H = constant_field(0.3);
  return prob;
}

}  // namespace

TEST_CASE("straight channel tensors") {
  const auto c = straight_channel_tensors(0.6, 0.01);
  CHECK(c.dim() == 3);
  CHECK(c.D_O(0, 0) == doctest::Approx(0.6));
  CHECK(c.D_O(1, 1) == 0.0);
  CHECK(c.D_O(2, 2) == doctest::Approx(0.6));
  CHECK(c.M_plus.isApprox(c.D_O));
  CHECK(c.D_plus.isApprox(c.D_O));
  CHECK(c.eps(0, 0) == doctest::Approx(0.006));
  CHECK(c.eps(1, 1) == 0.0);
  CHECK(c.eps(2, 2) == doctest::Approx(0.006));
  CHECK(c.D_O(0, 1) == 0.0);

  const auto one = straight_channel_tensors(1.0, 0.5);
  CHECK(one.D_O(0, 0) == 1.0);
  CHECK(one.D_O(1, 1) == 0.0);
  CHECK(one.D_O(2, 2) == 1.0);

  const auto two = straight_channel_tensors(0.3, 1.0, 2);
  CHECK(two.dim() == 2);
  CHECK(two.D_O(0, 0) == doctest::Approx(0.3));
  CHECK(two.D_O(1, 1) == 0.0);
}

TEST_CASE("thin double layer with zero surface charge") {
  const auto prob = tdl_problem(0.6, 0.0);
  const auto st = thin_double_layer_solve(prob);
  REQUIRE(st.converged);
  for (std::size_t i = 0; i < st.grid.num_nodes(); ++i) {
    CHECK(st.C_plus[i] == 0.0);
    CHECK(st.C_O[i] == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(tdl_residual(prob, st).oxygen < 1e-8);
}

TEST_CASE("thin double layer with constant surface charge") {
  auto prob = tdl_problem(0.6, -0.3);
  const auto cp = tdl_proton_concentration(prob);
  for (double c : cp) CHECK(c == doctest::Approx(0.5));
  const auto st = thin_double_layer_solve(prob);
  REQUIRE(st.converged);
  for (std::size_t i = 0; i < st.grid.num_nodes(); ++i) {
    CHECK(st.C_plus[i] == cp[i]);
    CHECK(st.Phi[i] == doctest::Approx(0.3).epsilon(1e-9));
  }

  prob.coeffs.beta_O_bar = 0.2;
  prob.coeffs.beta_plus_bar = 0.2;
  const auto react = thin_double_layer_solve(prob);
  REQUIRE(react.converged);
  const auto res = tdl_residual(prob, react);
  CHECK(res.oxygen < 1e-8);
  CHECK(res.proton < 1e-8);
  CHECK(react.reaction.negative == 0);
}

TEST_CASE("thin double layer rejects positive surface charge") {
  auto prob = tdl_problem(0.6, -0.1);
  prob.rho_s[5] = 0.01;
  CHECK_THROWS_AS(thin_double_layer_solve(prob), InvalidArgument);
}

TEST_CASE("porosity cancels in the reduced potential equation") {
  const double p1 = 0.4, p2 = 0.9, n_plus = 1.0;
  auto a = tdl_problem(p1, 0.0);
  auto b = tdl_problem(p2, 0.0);
  for (auto* prob : {&a, &b}) {
    prob->coeffs = straight_channel_tensors(prob == &a ? p1 : p2, 0.0, 2);
    for (std::size_t i = 0; i < prob->grid.num_nodes(); ++i)
      prob->rho_s[i] = -(1.0 + 0.5 * std::sin(2.0 * prob->grid.node_position(i)[0]));
  }
  a.coeffs.beta_plus_bar = 0.7 * std::pow(p1, n_plus);
  b.coeffs.beta_plus_bar = 0.7 * std::pow(p2, n_plus);

  MacroState s;
  s.grid = a.grid;
  for (std::size_t i = 0; i < s.grid.num_nodes(); ++i) {
    const Point x = s.grid.node_position(i);
    s.C_O.push_back(0.5 + 0.4 * x[0] * x[0]);
    s.C_plus.push_back(0.0);
    s.Phi.push_back(0.3 - 0.6 * x[0] + 0.1 * std::cos(3.0 * x[0]));
  }
  const double ra = tdl_residual(a, s).proton;
  const double rb = tdl_residual(b, s).proton;
  CHECK(ra > 1e-6);
  CHECK(rb == doctest::Approx(ra).epsilon(1e-12));
}

TEST_CASE("straight channel macro matches the general solver") {
  MacroProblem prob{BoxGrid({1.0, 0.5}, {16, 6}), straight_channel_tensors(0.6, 0.05, 2)};
  prob.coeffs.beta_O_bar = 0.3;
  prob.coeffs.beta_plus_bar = 0.3;
  prob.bc.C_O_D = constant_field(0.8);
  prob.bc.Phi_D_H = constant_field(0.1);
  prob.bc.Phi_D_O = constant_field(-0.2);
  SolverControls ctl;
  ctl.tol_nl = 1e-11;
  const auto reduced = straight_channel_macro(prob, ctl);
  const auto general = solve_macro(prob, ctl);
  REQUIRE(reduced.converged);
  REQUIRE(general.converged);
  for (std::size_t i = 0; i < general.grid.num_nodes(); ++i) {
    CHECK(reduced.C_O[i] == doctest::Approx(general.C_O[i]).epsilon(1e-8));
    CHECK(reduced.C_plus[i] == doctest::Approx(general.C_plus[i]).epsilon(1e-8));
    CHECK(reduced.Phi[i] == doctest::Approx(general.Phi[i]).epsilon(1e-8));
  }
  // constant along x_2
  const auto& g = reduced.grid;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto ijk = g.node_coords(i);
    const std::size_t base = g.node_index({ijk[0], 0, 0});
    CHECK(reduced.C_O[i] == reduced.C_O[base]);
    CHECK(reduced.Phi[i] == reduced.Phi[base]);
  }
}

TEST_CASE("straight channel macro: linear profile without reaction or charge") {
  MacroProblem prob{BoxGrid({1.0, 1.0, 1.0}, {10, 3, 4}), straight_channel_tensors(0.5, 1.0)};
  prob.bc.C_plus_D = constant_field(0.0);
  prob.bc.Phi_D_H = constant_field(1.0);
  prob.bc.Phi_D_O = constant_field(0.0);
  const auto st = straight_channel_macro(prob);
  REQUIRE(st.converged);
  for (std::size_t i = 0; i < st.grid.num_nodes(); ++i)
    CHECK(st.Phi[i] == doctest::Approx(1.0 - st.grid.node_position(i)[0]).epsilon(1e-9));
}

TEST_CASE("straight channel macro rejects x_2-dependent data") {
  MacroProblem prob{BoxGrid({1.0, 1.0}, {8, 8}), straight_channel_tensors(0.6, 0.1, 2)};
  MacroProblem bad = prob;
  bad.bc.C_O_D = [](const Point& x) { return 1.0 + x[1]; };
  CHECK_THROWS_AS(straight_channel_macro(bad), InvalidArgument);

  bad = prob;
  bad.coeffs.D_O(0, 1) = bad.coeffs.D_O(1, 0) = 0.1;
  CHECK_THROWS_AS(straight_channel_macro(bad), InvalidArgument);

  bad = prob;
  bad.rho_s.assign(bad.grid.num_nodes(), 0.0);
  bad.rho_s[bad.grid.node_index({3, 2, 0})] = -1.0;
  CHECK_THROWS_AS(straight_channel_macro(bad), InvalidArgument);
}
