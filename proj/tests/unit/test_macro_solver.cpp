#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "homog/errors.hpp"
#include "homog/macro_solver.hpp"

using namespace homog;

namespace {

EffectiveCoefficients identity_coeffs(int dim, double p = 1.0, double lambda_sq = 1.0) {
  EffectiveCoefficients c;
  c.D_O = Eigen::MatrixXd::Identity(dim, dim);
  c.D_plus = c.M_plus = c.D_O;
  c.eps = lambda_sq * c.D_O;
  c.porosity = p;
  return c;
}

MacroProblem reacting_problem(int n = 16) {
  MacroProblem prob{BoxGrid({1.0, 1.0}, {n, n}), identity_coeffs(2, 0.6, 0.1)};
  prob.coeffs.beta_O_bar = 0.5;
  prob.coeffs.beta_plus_bar = 0.5;
  prob.bc.Phi_D_H = constant_field(0.2);
  prob.bc.Phi_D_O = constant_field(-0.3);
  return prob;
}

MacroState make_state(const BoxGrid& g, double co, double cp, double phi) {
  MacroState s;
  s.grid = g;
  s.C_O.assign(g.num_nodes(), co);
  s.C_plus.assign(g.num_nodes(), cp);
  s.Phi.assign(g.num_nodes(), phi);
  return s;
}

}  // namespace

TEST_CASE("Butler-Volmer rate") {
  ReactionParameters rp;
  CHECK(butler_volmer_rate(1.0, 1.0, 1.0, 0.0, rp) == 1.0);
  CHECK(butler_volmer_rate(2.5, 1.0, 1.0, 0.0, rp) == 2.5);
  CHECK(butler_volmer_rate(1.0, 0.7, 0.0, -1.0, rp) == 0.0);
  CHECK(butler_volmer_rate(1.0, 0.5, 0.25, -2.0, rp) == doctest::Approx(0.125 * std::exp(1.0)));
  CHECK(butler_volmer_rate(1.0, 0.5, 0.25, -2.0, rp) == doctest::Approx(0.33979).epsilon(1e-4));
  // negative concentrations are clipped
  CHECK(butler_volmer_rate(1.0, -0.3, 1.0, 0.0, rp) == 0.0);

  ReactionCounters counters;
  const double big = butler_volmer_rate(1.0, 1.0, 1.0, -1e5, rp, &counters);
  CHECK(std::isfinite(big));
  CHECK(counters.clamped == 1);
  CHECK(counters.evaluations == 1);
  CHECK(counters.negative == 0);

  MacroProblem prob = reacting_problem();
  prob.coeffs.beta_O_bar = 3.0;
  prob.coeffs.beta_plus_bar = 5.0;
  CHECK(butler_volmer_rate(1.0, 1.0, 0.0, prob, ReactingSpecies::oxygen) == 3.0);
  CHECK(butler_volmer_rate(1.0, 1.0, 0.0, prob, ReactingSpecies::proton) == 5.0);
}

TEST_CASE("constant fields solve the decoupled problem") {
  MacroProblem prob{BoxGrid({1.0, 1.0}, {8, 8}), identity_coeffs(2)};
  prob.bc.C_O_D = constant_field(0.7);
  prob.bc.C_plus_D = constant_field(0.0);
  prob.bc.Phi_D_O = prob.bc.Phi_D_H = constant_field(0.25);
  const auto st = solve_macro(prob);
  REQUIRE(st.converged);
  for (std::size_t i = 0; i < st.grid.num_nodes(); ++i) {
    CHECK(st.C_O[i] == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(st.C_plus[i] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(st.Phi[i] == doctest::Approx(0.25).epsilon(1e-10));
  }
}

TEST_CASE("without charge the potential is linear between its Dirichlet faces") {
  MacroProblem prob{BoxGrid({2.0, 1.0}, {10, 5}), identity_coeffs(2)};
  prob.bc.C_plus_D = constant_field(0.0);
  prob.bc.Phi_D_H = constant_field(1.0);
  prob.bc.Phi_D_O = constant_field(-1.0);
  const auto st = solve_macro(prob);
  REQUIRE(st.converged);
  for (std::size_t i = 0; i < st.grid.num_nodes(); ++i)
    CHECK(st.Phi[i] == doctest::Approx(1.0 - st.grid.node_position(i)[0]).epsilon(1e-9));
}

TEST_CASE("reacting solve: positivity, fixed point, flux balance") {
  const MacroProblem prob = reacting_problem();
  const auto st = solve_macro(prob);
  REQUIRE(st.converged);
  CHECK_FALSE(st.diverged);
  CHECK(st.reaction.negative == 0);
  CHECK(*std::min_element(st.C_O.begin(), st.C_O.end()) >= -1e-12);
  CHECK(*std::min_element(st.C_plus.begin(), st.C_plus.end()) >= -1e-12);
  CHECK(macro_residual(prob, st).combined() < 1e-8);

  // Dirichlet faces are exact
  for (std::size_t i = 0; i < st.grid.num_nodes(); ++i) {
    if (st.grid.on_low_face(i, 0)) {
      CHECK(st.C_plus[i] == 1.0);
      CHECK(st.Phi[i] == 0.2);
    }
    if (st.grid.on_high_face(i, 0)) {
      CHECK(st.C_O[i] == 1.0);
      CHECK(st.Phi[i] == -0.3);
    }
  }

  const auto again = solve_macro(prob, {}, &st);
  CHECK(again.converged);
  CHECK(again.outer_iterations <= 1);

  const auto fb = oxygen_flux_balance(prob, st);
  CHECK(std::abs(fb.integrated_source) > 0);
  CHECK(fb.relative_mismatch < 1e-6);
}

TEST_CASE("shifting every potential datum shifts Phi only") {
  const MacroProblem prob = reacting_problem(12);
  MacroProblem shifted = prob;
  const double shift = 0.75;
  shifted.reaction.Phi_0 += shift;
  shifted.bc.Phi_D_H = constant_field(0.2 + shift);
  shifted.bc.Phi_D_O = constant_field(-0.3 + shift);
  SolverControls ctl;
  ctl.tol_nl = 1e-11;
  const auto a = solve_macro(prob, ctl);
  const auto b = solve_macro(shifted, ctl);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  for (std::size_t i = 0; i < a.grid.num_nodes(); ++i) {
    CHECK(b.Phi[i] - a.Phi[i] == doctest::Approx(shift).epsilon(1e-8));
    CHECK(b.C_O[i] == doctest::Approx(a.C_O[i]).epsilon(1e-8));
    CHECK(b.C_plus[i] == doctest::Approx(a.C_plus[i]).epsilon(1e-8));
  }
}

TEST_CASE("iteration limit flags divergence and keeps the last iterate") {
  const MacroProblem prob = reacting_problem();
  SolverControls ctl;
  ctl.max_outer = 1;
  ctl.tol_nl = 1e-15;
  const auto st = solve_macro(prob, ctl);
  CHECK(st.diverged);
  CHECK_FALSE(st.converged);
  CHECK(st.history.size() >= 2);
  CHECK(st.C_O.size() == prob.grid.num_nodes());
}

TEST_CASE("free energy") {
  const BoxGrid g({1.0, 1.0}, {4, 4});
  CHECK(free_energy(make_state(g, 1, 1, 0), 1.0) == doctest::Approx(-2.0));
  CHECK(free_energy(make_state(g, 0, 0, 0), 1.0) == doctest::Approx(0.0));
  CHECK(free_energy(make_state(g, 1, std::exp(1.0), 0), 1.0) == doctest::Approx(-1.0));

  auto s = make_state(g, 1, 1, 0);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) s.Phi[i] = 2.0 * g.node_position(i)[0];
  // C_+ Phi integrates to 1; gradient term is lambda^2 * 4
  CHECK(free_energy(s, 0.5) == doctest::Approx(-2.0 + 1.0 - 2.0));
  CHECK(free_energy(s, 0.5, GradientEnergySign::flipped) == doctest::Approx(-2.0 + 1.0 + 2.0));
}

TEST_CASE("local equilibrium report") {
  const BoxGrid g({1.0, 1.0}, {8, 8});
  CHECK(check_local_equilibrium(make_state(g, 1, 0.4, -0.2), 4).max_spread == doctest::Approx(0.0));

  auto boltz = make_state(g, 1, 1, 0);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    boltz.Phi[i] = std::sin(3.0 * g.node_position(i)[0]) + g.node_position(i)[1];
    boltz.C_plus[i] = std::exp(-boltz.Phi[i]);
  }
  CHECK(check_local_equilibrium(boltz, 2).max_spread == doctest::Approx(0.0).epsilon(1e-12));

  auto lin = make_state(g, 1, 1, 0);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) lin.Phi[i] = 0.8 * g.node_position(i)[0];
  const auto rep = check_local_equilibrium(lin, 4);
  CHECK(rep.blocks.size() == 4);
  for (const auto& b : rep.blocks) CHECK(b.spread == doctest::Approx(0.8 * 0.5));

  auto zero = make_state(g, 1, 0, 0);
  const auto rz = check_local_equilibrium(zero, 4);
  CHECK(rz.excluded == g.num_nodes());
}

TEST_CASE("problem validation") {
  MacroProblem prob = reacting_problem(4);
  CHECK_NOTHROW(validate(prob));

  MacroProblem bad = prob;
  bad.coeffs.D_O = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(validate(bad), InvalidArgument);

  bad = prob;
  bad.reaction.alpha_c = 1.5;
  CHECK_THROWS_AS(validate(bad), InvalidArgument);

  bad = prob;
  bad.rho_s.assign(3, 0.0);
  CHECK_THROWS_AS(validate(bad), InvalidArgument);
}

TEST_CASE("a blocked direction is a parameter, a fully blocked tensor is singular") {
  MacroProblem prob{BoxGrid({1.0, 1.0}, {6, 6}), identity_coeffs(2)};
  prob.coeffs.D_O(1, 1) = prob.coeffs.D_plus(1, 1) = prob.coeffs.M_plus(1, 1) = prob.coeffs.eps(1, 1) = 0;
  prob.bc.Phi_D_H = constant_field(0.1);
  const auto st = solve_macro(prob);
  CHECK(st.converged);

  MacroProblem sing = prob;
  sing.coeffs.eps.setZero();
  sing.coeffs.eps(1, 1) = 1.0;  // Phi only couples along x_2: no anchor on interior columns
  CHECK_THROWS_AS(solve_macro(sing), SingularSystemError);
}
