#include "homog/macro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homog/errors.hpp"
#include "macro_system.hpp"

namespace homog {

ScalarField constant_field(double value) {
  return [value](const Point&) { return value; };
}

double butler_volmer_rate(double beta, double c_plus, double c_o, double phi, const ReactionParameters& params,
                          ReactionCounters* counters) {
  double arg = -params.alpha_c * (phi - params.Phi_0);
  bool clamped = false;
  if (arg > 700) {
    arg = 700;
    clamped = true;
  } else if (arg < -700) {
    arg = -700;
    clamped = true;
  }
  const double cp = std::max(c_plus, 0.0);
  const double co = std::max(c_o, 0.0);
  const double r = beta * std::pow(cp, params.n_plus) * std::pow(co, params.n_O) * std::exp(arg);
  if (counters) {
    ++counters->evaluations;
    if (clamped) ++counters->clamped;
    if (r < 0) ++counters->negative;
  }
  return r;
}

double butler_volmer_rate(double c_plus, double c_o, double phi, const MacroProblem& problem, ReactingSpecies species,
                          ReactionCounters* counters) {
  const double beta = species == ReactingSpecies::oxygen ? problem.coeffs.beta_O_bar : problem.coeffs.beta_plus_bar;
  return butler_volmer_rate(beta, c_plus, c_o, phi, problem.reaction, counters);
}

void validate(const MacroProblem& p) {
  const int d = p.grid.dim();
  if (d == 0) throw InvalidArgument("macro problem has no grid");
  for (const auto* T : {&p.coeffs.D_O, &p.coeffs.D_plus, &p.coeffs.M_plus, &p.coeffs.eps}) {
    if (T->rows() != d || T->cols() != d) throw InvalidArgument("coefficient tensors must match the grid dimension");
    if (!T->allFinite()) throw InvalidArgument("coefficient tensors must be finite");
  }
  if (!(p.coeffs.porosity >= 0) || !(p.coeffs.porosity <= 1)) throw InvalidArgument("porosity must lie in [0, 1]");
  if (!(p.coeffs.beta_O_bar >= 0) || !(p.coeffs.beta_plus_bar >= 0))
    throw InvalidArgument("reaction numbers must be non-negative");
  if (!(p.reaction.alpha_c > 0 && p.reaction.alpha_c < 1)) throw InvalidArgument("alpha_c must lie in (0, 1)");
  if (!(p.reaction.n_plus >= 0) || !(p.reaction.n_O >= 0)) throw InvalidArgument("reaction orders must be >= 0");
  if (!std::isfinite(p.reaction.Phi_0)) throw InvalidArgument("Phi_0 must be finite");
  if (!p.rho_s.empty() && p.rho_s.size() != p.grid.num_nodes())
    throw InvalidArgument("rho_s needs one value per grid node");
  if (!p.bc.C_O_D || !p.bc.C_plus_D || !p.bc.Phi_D_O || !p.bc.Phi_D_H)
    throw InvalidArgument("boundary data must be set");
}

namespace detail {

CoupledSystem build_macro_system(const MacroProblem& p) {
  validate(p);
  const BoxGrid& g = p.grid;
  const std::size_t n = g.num_nodes();
  CoupledSystem sys;
  sys.num_nodes = n;
  FvOperators ops = build_box_operators(g, p.coeffs);
  sys.edges = std::move(ops.edges);
  sys.cross = std::move(ops.cross);
  sys.reaction = p.reaction;
  sys.dirichlet_O.assign(n, 0);
  sys.dirichlet_plus.assign(n, 0);
  sys.dirichlet_phi.assign(n, 0);
  sys.value_O.assign(n, 0);
  sys.value_plus.assign(n, 0);
  sys.value_phi.assign(n, 0);
  sys.reaction_O.assign(n, 0);
  sys.reaction_plus.assign(n, 0);
  sys.charge.assign(n, 0);
  sys.fixed_charge.assign(n, 0);
  sys.source_O.assign(n, 0);
  sys.source_plus.assign(n, 0);
  sys.source_phi.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const Point x = g.node_position(i);
    const double vol = g.control_volume(i);
    if (g.on_high_face(i, 0)) {
      const double c = p.bc.C_O_D(x);
      if (!(c >= 0)) throw InvalidArgument("C_O boundary data must be non-negative");
      sys.dirichlet_O[i] = 1;
      sys.value_O[i] = c;
      sys.dirichlet_phi[i] = 1;
      sys.value_phi[i] = p.bc.Phi_D_O(x);
    }
    if (g.on_low_face(i, 0)) {
      const double c = p.bc.C_plus_D(x);
      if (!(c >= 0)) throw InvalidArgument("C_+ boundary data must be non-negative");
      sys.dirichlet_plus[i] = 1;
      sys.value_plus[i] = c;
      sys.dirichlet_phi[i] = 1;
      sys.value_phi[i] = p.bc.Phi_D_H(x);
    }
    if (sys.dirichlet_phi[i] && !std::isfinite(sys.value_phi[i]))
      throw InvalidArgument("potential boundary data must be finite");
    sys.reaction_O[i] = p.coeffs.beta_O_bar * vol;
    sys.reaction_plus[i] = p.coeffs.beta_plus_bar * vol;
    sys.charge[i] = p.coeffs.porosity * vol;
    if (!p.rho_s.empty()) sys.fixed_charge[i] = p.rho_s[i] * vol;
    if (p.forcing.oxygen) sys.source_O[i] = p.forcing.oxygen(x) * vol;
    if (p.forcing.proton) sys.source_plus[i] = p.forcing.proton(x) * vol;
    if (p.forcing.potential) sys.source_phi[i] = p.forcing.potential(x) * vol;
  }
  prepare(sys);
  return sys;
}

CoupledFields fields_of(const MacroState& s) { return {s.C_O, s.C_plus, s.Phi}; }

}  // namespace detail

MacroState initial_guess(const MacroProblem& p) {
  validate(p);
  const BoxGrid& g = p.grid;
  MacroState s;
  s.grid = g;
  const std::size_t n = g.num_nodes();
  s.C_O.resize(n);
  s.C_plus.resize(n);
  s.Phi.resize(n);
  const double L = g.length(0);
  for (std::size_t i = 0; i < n; ++i) {
    Point x = g.node_position(i);
    const double t = x[0] / L;
    Point low = x, high = x;
    low[0] = 0;
    high[0] = L;
    s.C_O[i] = p.bc.C_O_D(high);
    s.C_plus[i] = p.bc.C_plus_D(low);
    s.Phi[i] = (1 - t) * p.bc.Phi_D_H(low) + t * p.bc.Phi_D_O(high);
  }
  return s;
}

namespace {

std::size_t count_positive_overpotential(const MacroState& s, double Phi_0) {
  return static_cast<std::size_t>(std::count_if(s.Phi.begin(), s.Phi.end(), [&](double v) { return v - Phi_0 > 0; }));
}

void check_state(const MacroProblem& p, const MacroState& s) {
  const std::size_t n = p.grid.num_nodes();
  if (!(s.grid == p.grid) || s.C_O.size() != n || s.C_plus.size() != n || s.Phi.size() != n)
    throw InvalidArgument("state does not match the problem grid");
}

}  // namespace

MacroState solve_macro(const MacroProblem& problem, const SolverControls& controls, const MacroState* initial) {
  if (!(controls.tol_nl > 0) || controls.max_outer < 0 || !(controls.damping > 0 && controls.damping <= 1) ||
      !(controls.min_damping > 0 && controls.min_damping <= controls.damping))
    throw InvalidArgument("invalid solver controls");
  const detail::CoupledSystem sys = detail::build_macro_system(problem);
  MacroState start = initial ? *initial : initial_guess(problem);
  check_state(problem, start);

  ReactionCounters counters;
  auto result = detail::solve_coupled(sys, detail::fields_of(start), controls, &counters);

  MacroState s;
  s.grid = problem.grid;
  s.C_O = std::move(result.fields.C_O);
  s.C_plus = std::move(result.fields.C_plus);
  s.Phi = std::move(result.fields.Phi);
  s.history = std::move(result.history);
  s.outer_iterations = result.iterations;
  s.converged = result.converged;
  s.diverged = !result.converged;
  s.residual = result.residual;
  s.reaction = counters;
  s.positive_overpotential_nodes = count_positive_overpotential(s, problem.reaction.Phi_0);
  return s;
}

ResidualNorms macro_residual(const MacroProblem& problem, const MacroState& state) {
  check_state(problem, state);
  const auto sys = detail::build_macro_system(problem);
  return detail::coupled_residual(sys, detail::fields_of(state), nullptr);
}

FluxBalance oxygen_flux_balance(const MacroProblem& problem, const MacroState& state) {
  check_state(problem, state);
  const auto sys = detail::build_macro_system(problem);
  const auto u = detail::fields_of(state);
  const auto imbalance = detail::oxygen_imbalance(sys, u);
  const auto rate = detail::reaction_rates(sys, u, nullptr);
  FluxBalance fb;
  for (std::size_t i = 0; i < sys.num_nodes; ++i) {
    fb.integrated_source += sys.reaction_O[i] * rate[i] + sys.source_O[i];
    if (sys.dirichlet_O[i]) fb.boundary_flux -= imbalance[i];
  }
  // absolute floor for problems without oxygen transport, where both sides are rounding noise
  const double scale = std::max({std::abs(fb.integrated_source), std::abs(fb.boundary_flux), 1e-12});
  fb.relative_mismatch = std::abs(fb.boundary_flux - fb.integrated_source) / scale;
  return fb;
}

namespace {

double entropy(double c) { return c > 0 ? c * (std::log(c) - 1) : 0.0; }

}  // namespace

double free_energy(const MacroState& s, double lambda_sq, GradientEnergySign sign) {
  const BoxGrid& g = s.grid;
  const int d = g.dim();
  double nodal = 0;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    nodal += g.control_volume(i) * (entropy(s.C_O[i]) + entropy(s.C_plus[i]) + s.C_plus[i] * s.Phi[i]);

  double cell_volume = 1;
  for (int a = 0; a < d; ++a) cell_volume *= g.spacing(a);
  const int corners = 1 << d;
  double grad = 0;
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    const auto ijk = g.cell_coords(c);
    const std::size_t base = g.node_index(ijk);
    double sq = 0;
    for (int a = 0; a < d; ++a) {
      double ga = 0;
      for (int k = 0; k < corners; ++k) {
        if ((k >> a) & 1) continue;
        std::size_t node = base;
        for (int b = 0; b < d; ++b)
          if ((k >> b) & 1) node += g.stride(b);
        ga += s.Phi[node + g.stride(a)] - s.Phi[node];
      }
      ga /= (corners / 2) * g.spacing(a);
      sq += ga * ga;
    }
    grad += cell_volume * sq;
  }
  const double sgn = sign == GradientEnergySign::as_printed ? -1.0 : 1.0;
  return nodal + sgn * lambda_sq * grad;
}

LocalEquilibriumReport check_local_equilibrium(const MacroState& s, int block_cells) {
  if (block_cells < 1) throw InvalidArgument("block size must be at least one cell");
  const BoxGrid& g = s.grid;
  const int d = g.dim();
  std::array<int, 3> nb{1, 1, 1};
  for (int a = 0; a < d; ++a) nb[static_cast<std::size_t>(a)] = (g.cells(a) + block_cells - 1) / block_cells;

  LocalEquilibriumReport rep;
  for (int b2 = 0; b2 < nb[2]; ++b2)
    for (int b1 = 0; b1 < nb[1]; ++b1)
      for (int b0 = 0; b0 < nb[0]; ++b0) {
        const std::array<int, 3> blk{b0, b1, b2};
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int a = 0; a < d; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          lo[ua] = blk[ua] * block_cells;
          hi[ua] = std::min(lo[ua] + block_cells, g.cells(a));
        }
        EquilibriumBlock eb;
        eb.block = blk;
        double mn = std::numeric_limits<double>::infinity(), mx = -mn;
        for (int k = lo[2]; k <= hi[2]; ++k)
          for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
              const std::size_t node = g.node_index({i, j, k});
              ++eb.nodes;
              if (!(s.C_plus[node] > 0)) {
                ++eb.excluded;
                continue;
              }
              const double mu = std::log(s.C_plus[node]) + s.Phi[node];
              mn = std::min(mn, mu);
              mx = std::max(mx, mu);
            }
        eb.spread = mx >= mn ? mx - mn : 0.0;
        rep.max_spread = std::max(rep.max_spread, eb.spread);
        rep.blocks.push_back(eb);
      }
  for (double c : s.C_plus)
    if (!(c > 0)) ++rep.excluded;
  return rep;
}

}  // namespace homog
