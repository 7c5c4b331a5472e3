#include "homog/limits.hpp"

#include <algorithm>
#include <cmath>

#include "homog/errors.hpp"
#include "macro_system.hpp"

namespace homog {

namespace {

MacroProblem as_macro(const TDLProblem& p) {
  MacroProblem m;
  m.grid = p.grid;
  m.coeffs = p.coeffs;
  m.reaction = p.reaction;
  m.bc = p.bc;
  return m;
}

struct TdlSystems {
  detail::CoupledSystem oxygen;     // macro system, used for the oxygen equation
  detail::CoupledSystem potential;  // reduced proton balance written for Phi
  std::vector<double> q;
};

TdlSystems build_tdl(const TDLProblem& p) {
  validate(p);
  TdlSystems t;
  t.q = tdl_proton_concentration(p);
  t.oxygen = detail::build_macro_system(as_macro(p));

  const std::size_t n = p.grid.num_nodes();
  const double qmax = *std::max_element(t.q.begin(), t.q.end());
  const double floor = 1e-12 * std::max(qmax, 1.0);
  auto face = [&](std::size_t a, std::size_t b) { return std::max(0.5 * (t.q[a] + t.q[b]), floor); };

  detail::CoupledSystem& s = t.potential;
  s.num_nodes = n;
  s.reaction = p.reaction;
  s.dirichlet_phi.assign(n, 0);
  s.value_phi.assign(n, 0);
  s.fixed_charge.assign(n, 0);
  s.reaction_plus = t.oxygen.reaction_plus;
  for (const auto& e : t.oxygen.edges) {
    // D_plus flux of q moves to the right-hand side
    const double jq = e.w_D * (t.q[e.p] - t.q[e.q]);
    s.fixed_charge[e.p] -= jq;
    s.fixed_charge[e.q] += jq;
    if (e.w_M > 0) s.edges.push_back({e.p, e.q, 0, 0, 0, e.w_M * face(e.p, e.q)});
  }
  for (const auto& c : t.oxygen.cross) {
    if (c.c_D != 0) {
      double g = 0;
      for (auto [j, w] : c.grad) g += w * t.q[j];
      const double jq = -c.area * c.c_D * g;
      s.fixed_charge[c.p] -= jq;
      s.fixed_charge[c.q] += jq;
    }
    if (c.c_M != 0) {
      detail::CrossFace f = c;
      f.c_O = f.c_D = f.c_M = 0;
      f.c_E = c.c_M * face(c.p, c.q);
      s.cross.push_back(std::move(f));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!p.grid.on_low_face(i, 0)) continue;
    s.dirichlet_phi[i] = 1;
    s.value_phi[i] = p.bc.Phi_D_H(p.grid.node_position(i));
    if (!std::isfinite(s.value_phi[i])) throw InvalidArgument("potential boundary data must be finite");
  }
  detail::prepare(s);
  return t;
}

detail::LinearSystem potential_system(const TdlSystems& t, const detail::CoupledFields& u,
                                      const std::vector<double>& rate) {
  auto ls = detail::assemble(t.potential, detail::Equation::potential, u, false, rate);
  for (std::size_t i = 0; i < ls.free.size(); ++i)
    if (ls.free[i]) ls.b[static_cast<Eigen::Index>(i)] += t.potential.reaction_plus[i] * rate[i];
  return ls;
}

ResidualNorms tdl_norms(const TdlSystems& t, const detail::CoupledFields& u, ReactionCounters* counters) {
  const auto rate = detail::reaction_rates(t.oxygen, u, counters);
  ResidualNorms r;
  r.oxygen = detail::relative_residual(detail::assemble(t.oxygen, detail::Equation::oxygen, u, false, rate), u.C_O);
  r.proton = detail::relative_residual(potential_system(t, u, rate), u.Phi);
  return r;
}

}  // namespace

void validate(const TDLProblem& p) {
  validate(as_macro(p));
  if (!(p.coeffs.porosity > 0)) throw InvalidArgument("thin-double-layer limit needs porosity > 0");
  if (p.rho_s.size() != p.grid.num_nodes()) throw InvalidArgument("rho_s needs one value per grid node");
  for (double r : p.rho_s) {
    if (!std::isfinite(r)) throw InvalidArgument("rho_s must be finite");
    if (r > 0) throw InvalidArgument("positive rho_s gives a negative proton concentration -rho_s/p");
  }
}

std::vector<double> tdl_proton_concentration(const TDLProblem& p) {
  std::vector<double> q(p.rho_s.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = -p.rho_s[i] / p.coeffs.porosity + 0.0;
  return q;
}

MacroState thin_double_layer_solve(const TDLProblem& problem, const SolverControls& controls,
                                   const MacroState* initial) {
  const TdlSystems t = build_tdl(problem);
  MacroState start = initial ? *initial : initial_guess(as_macro(problem));
  if (!(start.grid == problem.grid)) throw InvalidArgument("state does not match the problem grid");
  start.C_plus = t.q;
  for (std::size_t i = 0; i < t.potential.num_nodes; ++i)
    if (t.potential.dirichlet_phi[i]) start.Phi[i] = t.potential.value_phi[i];

  ReactionCounters counters;
  auto step = [&](const detail::CoupledFields& u) {
    const auto rate = detail::reaction_rates(t.oxygen, u, &counters);
    detail::CoupledFields next = u;
    next.Phi = detail::solve_linear(potential_system(t, u, rate), detail::Equation::proton);
    next.C_O = detail::solve_linear(detail::assemble(t.oxygen, detail::Equation::oxygen, u, false, rate),
                                    detail::Equation::oxygen);
    return next;
  };
  auto residual = [&](const detail::CoupledFields& u) { return tdl_norms(t, u, &counters); };
  auto result = detail::damped_fixed_point(detail::fields_of(start), step, residual, controls);

  MacroState s;
  s.grid = problem.grid;
  s.C_O = std::move(result.fields.C_O);
  s.C_plus = t.q;
  s.Phi = std::move(result.fields.Phi);
  s.history = std::move(result.history);
  s.outer_iterations = result.iterations;
  s.converged = result.converged;
  s.diverged = !result.converged;
  s.residual = result.residual;
  s.reaction = counters;
  s.positive_overpotential_nodes = static_cast<std::size_t>(
      std::count_if(s.Phi.begin(), s.Phi.end(), [&](double v) { return v - problem.reaction.Phi_0 > 0; }));
  return s;
}

TDLResidual tdl_residual(const TDLProblem& problem, const MacroState& state) {
  const TdlSystems t = build_tdl(problem);
  if (!(state.grid == problem.grid)) throw InvalidArgument("state does not match the problem grid");
  detail::CoupledFields u{state.C_O, t.q, state.Phi};
  const auto r = tdl_norms(t, u, nullptr);
  return {r.oxygen, r.proton};
}

EffectiveCoefficients straight_channel_tensors(double p, double lambda_sq, int dim) {
  if (!(p > 0 && p <= 1)) throw InvalidArgument("porosity must lie in (0, 1]");
  if (!(lambda_sq >= 0)) throw InvalidArgument("lambda^2 must be non-negative");
  if (dim != 2 && dim != 3) throw InvalidArgument("straight channels are 2D or 3D");
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
  T(0, 0) = p;
  if (dim == 3) T(2, 2) = p;
  EffectiveCoefficients c;
  c.D_O = c.D_plus = c.M_plus = T;
  c.eps = lambda_sq * T;
  c.porosity = p;
  c.Lambda = p < 1 ? 2.0 : 0.0;
  return c;
}

namespace {

Eigen::MatrixXd drop_axis(const Eigen::MatrixXd& T) {
  const int d = static_cast<int>(T.rows());
  Eigen::MatrixXd R(d - 1, d - 1);
  for (int i = 0, ri = 0; i < d; ++i) {
    if (i == 1) continue;
    for (int j = 0, rj = 0; j < d; ++j) {
      if (j == 1) continue;
      R(ri, rj++) = T(i, j);
    }
    ++ri;
  }
  return R;
}

Point lift(const Point& y) { return {y[0], 0.0, y[1]}; }

ScalarField lifted(const ScalarField& f) {
  if (!f) return {};
  return [f](const Point& y) { return f(lift(y)); };
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

MacroState straight_channel_macro(const MacroProblem& problem, const SolverControls& controls) {
  validate(problem);
  const BoxGrid& g = problem.grid;
  const int d = g.dim();
  if (d < 2) throw InvalidArgument("straight-channel reduction needs a 2D or 3D grid");
  for (const auto* T : {&problem.coeffs.D_O, &problem.coeffs.D_plus, &problem.coeffs.M_plus, &problem.coeffs.eps})
    for (int a = 0; a < d; ++a)
      if (a != 1 && (!detail::negligible(*T, 1, a) || !detail::negligible(*T, a, 1)))
        throw InvalidArgument("tensors couple x_2 to the other axes");

  // every datum must be constant along x_2
  auto check = [&](const ScalarField& f, const char* what) {
    if (!f) return;
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      Point x = g.node_position(i);
      Point x0 = x;
      x0[1] = 0;
      if (!same(f(x), f(x0))) throw InvalidArgument(std::string(what) + " depends on x_2");
    }
  };
  check(problem.bc.C_O_D, "C_O boundary data");
  check(problem.bc.C_plus_D, "C_+ boundary data");
  check(problem.bc.Phi_D_O, "Phi boundary data on E_O");
  check(problem.bc.Phi_D_H, "Phi boundary data on E_+");
  check(problem.forcing.oxygen, "oxygen forcing");
  check(problem.forcing.proton, "proton forcing");
  check(problem.forcing.potential, "potential forcing");

  std::vector<double> lengths;
  std::vector<int> cells;
  for (int a = 0; a < d; ++a) {
    if (a == 1) continue;
    lengths.push_back(g.length(a));
    cells.push_back(g.cells(a));
  }
  MacroProblem r;
  r.grid = BoxGrid(lengths, cells);
  r.coeffs = problem.coeffs;
  r.coeffs.D_O = drop_axis(problem.coeffs.D_O);
  r.coeffs.D_plus = drop_axis(problem.coeffs.D_plus);
  r.coeffs.M_plus = drop_axis(problem.coeffs.M_plus);
  r.coeffs.eps = drop_axis(problem.coeffs.eps);
  r.reaction = problem.reaction;
  r.bc = {lifted(problem.bc.C_O_D), lifted(problem.bc.C_plus_D), lifted(problem.bc.Phi_D_O),
          lifted(problem.bc.Phi_D_H)};
  r.forcing = {lifted(problem.forcing.oxygen), lifted(problem.forcing.proton), lifted(problem.forcing.potential)};

  auto reduced_index = [&](std::size_t node) {
    const auto ijk = g.node_coords(node);
    return r.grid.node_index({ijk[0], ijk[2], 0});
  };
  if (!problem.rho_s.empty()) {
    r.rho_s.assign(r.grid.num_nodes(), 0);
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      const auto ri = reduced_index(i);
      if (g.node_coords(i)[1] == 0) r.rho_s[ri] = problem.rho_s[i];
    }
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      if (!same(problem.rho_s[i], r.rho_s[reduced_index(i)])) throw InvalidArgument("rho_s depends on x_2");
  }

  const MacroState red = solve_macro(r, controls);
  MacroState s = red;
  s.grid = g;
  s.C_O.resize(g.num_nodes());
  s.C_plus.resize(g.num_nodes());
  s.Phi.resize(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto ri = reduced_index(i);
    s.C_O[i] = red.C_O[ri];
    s.C_plus[i] = red.C_plus[ri];
    s.Phi[i] = red.Phi[ri];
  }
  s.positive_overpotential_nodes = static_cast<std::size_t>(std::count_if(
      s.Phi.begin(), s.Phi.end(), [&](double v) { return v - problem.reaction.Phi_0 > 0; }));
  if (s.converged) {
    const double full = macro_residual(problem, s).combined();
    if (!(full <= 10 * controls.tol_nl))
      throw SolverError("broadcast straight-channel solution violates the full system", full);
  }
  return s;
}

}  // namespace homog
