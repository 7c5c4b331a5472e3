#include "homog/micro_solver.hpp"

#include <cmath>

#include "coupled_system.hpp"
#include "homog/errors.hpp"

namespace homog {

namespace {

int tiles(double length, double r) {
  const double t = length / r;
  const long k = std::lround(t);
  if (k < 1 || std::abs(t - static_cast<double>(k)) > 1e-9 * t)
    throw InvalidArgument("domain length must be an integer multiple of r");
  return static_cast<int>(k);
}

Phase fine_phase(const UnitCell& cell, int i, int j) {
  const int n = cell.n();
  return cell.phase(cell.index({i % n, j % n, 0}));
}

std::vector<double> pore_weights(const BoxGrid& g, const UnitCell& cell) {
  std::vector<double> w(g.num_nodes(), 0.0);
  const double quarter = 0.25 * g.spacing(0) * g.spacing(1);
  for (int j = 0; j < g.cells(1); ++j)
    for (int i = 0; i < g.cells(0); ++i) {
      if (fine_phase(cell, i, j) != Phase::pore) continue;
      for (int c = 0; c < 4; ++c) w[g.node_index({i + (c & 1), j + (c >> 1), 0})] += quarter;
    }
  return w;
}

}  // namespace

BoxGrid micro_grid(const MicroProblem& p) {
  if (p.cell.dim() != 2) throw InvalidArgument("the micro solver is 2D only");
  if (p.cell.n() < 8) throw InvalidArgument("micro solve needs at least 8 grid cells per period");
  if (!(p.r > 0 && p.r <= 1)) throw InvalidArgument("r must lie in (0, 1]");
  if (p.lengths.size() != 2) throw InvalidArgument("micro domain must be 2D");
  const int n = p.cell.n();
  return BoxGrid(p.lengths, {tiles(p.lengths[0], p.r) * n, tiles(p.lengths[1], p.r) * n});
}

MicroState solve_micro(const MicroProblem& p, const SolverControls& controls) {
  const BoxGrid g = micro_grid(p);
  if (!(p.beta_O >= 0) || !(p.beta_plus >= 0)) throw InvalidArgument("reaction numbers must be non-negative");
  if (!(p.reaction.alpha_c > 0 && p.reaction.alpha_c < 1)) throw InvalidArgument("alpha_c must lie in (0, 1)");
  const UnitCell& cell = p.cell;
  const std::size_t nn = g.num_nodes();
  const double hf = g.spacing(0);
  const int nx = g.cells(0), ny = g.cells(1);
  auto pore = [&](int i, int j) { return fine_phase(cell, i, j) == Phase::pore; };

  detail::CoupledSystem sys;
  sys.num_nodes = nn;
  sys.reaction = p.reaction;
  sys.active_O.assign(nn, 0);
  for (auto* v : {&sys.dirichlet_O, &sys.dirichlet_plus, &sys.dirichlet_phi}) v->assign(nn, 0);
  for (auto* v : {&sys.value_O, &sys.value_plus, &sys.value_phi, &sys.reaction_O, &sys.reaction_plus, &sys.charge,
                  &sys.fixed_charge})
    v->assign(nn, 0.0);

  sys.charge = pore_weights(g, cell);
  for (std::size_t i = 0; i < nn; ++i) sys.active_O[i] = sys.charge[i] > 0;
  sys.active_plus = sys.active_O;

  // edges: each of the (up to) two cells beside an edge owns half of its dual face
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const std::size_t node = g.node_index({i, j, 0});
      for (int a = 0; a < 2; ++a) {
        if ((a == 0 && i == nx) || (a == 1 && j == ny)) continue;
        const std::size_t other = node + g.stride(a);
        double wp = 0, ws = 0;
        for (int s = -1; s <= 0; ++s) {
          const int ci = a == 0 ? i : i + s;
          const int cj = a == 0 ? j + s : j;
          if (ci < 0 || cj < 0 || ci >= nx || cj >= ny) continue;
          (pore(ci, cj) ? wp : ws) += 0.5;
        }
        const double we = cell.lambda_sq() * wp + cell.gamma() * ws;
        if (wp == 0 && we == 0) continue;
        sys.edges.push_back({node, other, wp, wp, wp, we});
      }
    }

  // interface faces between pore and solid voxels; each endpoint takes half
  auto interface_face = [&](std::size_t a, std::size_t b, const Point& mid) {
    const double share = 0.5 * hf;
    for (std::size_t k : {a, b}) {
      sys.reaction_O[k] += p.r * p.beta_O * share;
      sys.reaction_plus[k] += p.r * p.beta_plus * share;
    }
    if (p.sigma_s) {
      Point y{std::fmod(mid[0] / p.r, 1.0), std::fmod(mid[1] / p.r, 1.0), 0};
      const double s = p.r * p.sigma_s(mid, y) * share;
      sys.fixed_charge[a] += s;
      sys.fixed_charge[b] += s;
    }
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (i + 1 < nx && pore(i, j) != pore(i + 1, j))
        interface_face(g.node_index({i + 1, j, 0}), g.node_index({i + 1, j + 1, 0}), {(i + 1) * hf, (j + 0.5) * hf, 0});
      if (j + 1 < ny && pore(i, j) != pore(i, j + 1))
        interface_face(g.node_index({i, j + 1, 0}), g.node_index({i + 1, j + 1, 0}), {(i + 0.5) * hf, (j + 1) * hf, 0});
    }

  for (std::size_t k = 0; k < nn; ++k) {
    const Point x = g.node_position(k);
    if (g.on_high_face(k, 0)) {
      sys.dirichlet_phi[k] = 1;
      sys.value_phi[k] = p.bc.Phi_D_O(x);
      if (sys.active_O[k]) {
        sys.dirichlet_O[k] = 1;
        sys.value_O[k] = p.bc.C_O_D(x);
        if (!(sys.value_O[k] >= 0)) throw InvalidArgument("C_O boundary data must be non-negative");
      }
    }
    if (g.on_low_face(k, 0)) {
      sys.dirichlet_phi[k] = 1;
      sys.value_phi[k] = p.bc.Phi_D_H(x);
      if (sys.active_plus[k]) {
        sys.dirichlet_plus[k] = 1;
        sys.value_plus[k] = p.bc.C_plus_D(x);
        if (!(sys.value_plus[k] >= 0)) throw InvalidArgument("C_+ boundary data must be non-negative");
      }
    }
  }
  detail::prepare(sys);

  detail::CoupledFields u;
  u.C_O.assign(nn, 0);
  u.C_plus.assign(nn, 0);
  u.Phi.assign(nn, 0);
  const double L = g.length(0);
  for (std::size_t k = 0; k < nn; ++k) {
    const Point x = g.node_position(k);
    Point lo = x, hi = x;
    lo[0] = 0;
    hi[0] = L;
    const double t = x[0] / L;
    if (sys.active_O[k]) {
      u.C_O[k] = p.bc.C_O_D(hi);
      u.C_plus[k] = p.bc.C_plus_D(lo);
    }
    u.Phi[k] = (1 - t) * p.bc.Phi_D_H(lo) + t * p.bc.Phi_D_O(hi);
  }

  MicroState s;
  auto result = detail::solve_coupled(sys, std::move(u), controls, &s.reaction);
  s.grid = g;
  s.C_O = std::move(result.fields.C_O);
  s.C_plus = std::move(result.fields.C_plus);
  s.Phi = std::move(result.fields.Phi);
  s.pore_weight = std::move(sys.charge);
  s.history = std::move(result.history);
  s.outer_iterations = result.iterations;
  s.converged = result.converged;
  s.diverged = !result.converged;
  s.residual = result.residual;
  return s;
}

MicroMacroError micro_macro_error(const MicroState& micro, const MacroState& macro, const UnitCell& cell) {
  const BoxGrid& f = micro.grid;
  const BoxGrid& m = macro.grid;
  if (f.dim() != 2 || m.dim() != 2) throw InvalidArgument("micro-macro comparison is 2D");
  std::array<int, 2> ratio{};
  for (int a = 0; a < 2; ++a) {
    if (std::abs(f.length(a) - m.length(a)) > 1e-12 * f.length(a) || f.cells(a) % m.cells(a) != 0)
      throw InvalidArgument("micro grid must refine the macro grid");
    ratio[static_cast<std::size_t>(a)] = f.cells(a) / m.cells(a);
  }
  if (f.cells(0) % cell.n() != 0 || f.cells(1) % cell.n() != 0)
    throw InvalidArgument("cell does not tile the micro grid");

  auto interpolate = [&](const std::vector<double>& v) {
    std::vector<double> out(f.num_nodes());
    for (std::size_t k = 0; k < f.num_nodes(); ++k) {
      const auto ij = f.node_coords(k);
      int base[2];
      double t[2];
      for (int a = 0; a < 2; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        base[a] = std::min(ij[ua] / ratio[ua], m.cells(a) - 1);
        t[a] = static_cast<double>(ij[ua] - base[a] * ratio[ua]) / ratio[ua];
      }
      const std::size_t n00 = m.node_index({base[0], base[1], 0});
      const std::size_t n10 = n00 + m.stride(0), n01 = n00 + m.stride(1), n11 = n01 + m.stride(0);
      out[k] = (1 - t[0]) * (1 - t[1]) * v[n00] + t[0] * (1 - t[1]) * v[n10] + (1 - t[0]) * t[1] * v[n01] +
               t[0] * t[1] * v[n11];
    }
    return out;
  };

  const auto weights = pore_weights(f, cell);
  const auto co = interpolate(macro.C_O), cp = interpolate(macro.C_plus), ph = interpolate(macro.Phi);
  MicroMacroError e;
  double phi_h1 = 0;
  for (std::size_t k = 0; k < f.num_nodes(); ++k) {
    e.C_O += weights[k] * std::pow(micro.C_O[k] - co[k], 2);
    e.C_plus += weights[k] * std::pow(micro.C_plus[k] - cp[k], 2);
    e.Phi_L2 += f.control_volume(k) * std::pow(micro.Phi[k] - ph[k], 2);
  }
  const double hx = f.spacing(0), hy = f.spacing(1);
  for (int j = 0; j < f.cells(1); ++j)
    for (int i = 0; i < f.cells(0); ++i) {
      const std::size_t a = f.node_index({i, j, 0}), b = a + f.stride(0), c = a + f.stride(1), d = c + f.stride(0);
      auto err = [&](std::size_t k) { return micro.Phi[k] - ph[k]; };
      const double gx = 0.5 * (err(b) - err(a) + err(d) - err(c)) / hx;
      const double gy = 0.5 * (err(c) - err(a) + err(d) - err(b)) / hy;
      phi_h1 += hx * hy * (gx * gx + gy * gy);
    }
  e.C_O = std::sqrt(e.C_O);
  e.C_plus = std::sqrt(e.C_plus);
  e.Phi_L2 = std::sqrt(e.Phi_L2);
  e.Phi_H1 = std::sqrt(phi_h1);
  return e;
}

}  // namespace homog
