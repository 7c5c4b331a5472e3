#include "coupled_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SparseLU>

#include "homog/errors.hpp"

namespace homog::detail {

const char* equation_name(Equation eq) {
  switch (eq) {
    case Equation::oxygen: return "oxygen";
    case Equation::proton: return "proton";
    case Equation::potential: return "potential";
  }
  return "?";
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

struct EquationView {
  const std::vector<char>* active;
  const std::vector<char>* dirichlet;
  const std::vector<double>* value;
  const std::vector<char>* isolated;
  const std::vector<double>* field;
};

EquationView view(const CoupledSystem& sys, Equation eq, const CoupledFields& u) {
  static const std::vector<char> all_active;
  switch (eq) {
    case Equation::oxygen: return {&sys.active_O, &sys.dirichlet_O, &sys.value_O, &sys.isolated_O, &u.C_O};
    case Equation::proton:
      return {&sys.active_plus, &sys.dirichlet_plus, &sys.value_plus, &sys.isolated_plus, &u.C_plus};
    case Equation::potential: return {nullptr, &sys.dirichlet_phi, &sys.value_phi, &sys.isolated_phi, &u.Phi};
  }
  return {};
}

bool couples(const Edge& e, Equation eq) {
  switch (eq) {
    case Equation::oxygen: return e.w_O > 0;
    case Equation::proton: return e.w_D > 0 || e.w_M > 0;
    case Equation::potential: return e.w_E > 0;
  }
  return false;
}

bool couples(const CrossFace& c, Equation eq) {
  switch (eq) {
    case Equation::oxygen: return c.c_O != 0;
    case Equation::proton: return c.c_D != 0 || c.c_M != 0;
    case Equation::potential: return c.c_E != 0;
  }
  return false;
}

std::vector<char> find_isolated(const CoupledSystem& sys, Equation eq) {
  const std::size_t n = sys.num_nodes;
  const std::vector<char>* active = eq == Equation::oxygen ? &sys.active_O
                                    : eq == Equation::proton ? &sys.active_plus
                                                             : nullptr;
  const std::vector<char>& dir = eq == Equation::oxygen ? sys.dirichlet_O
                                 : eq == Equation::proton ? sys.dirichlet_plus
                                                          : sys.dirichlet_phi;
  std::vector<char> candidate(n);
  for (std::size_t i = 0; i < n; ++i) candidate[i] = (!active || (*active)[i]) && !dir[i];

  DisjointSets sets(n);
  std::vector<char> linked(n, 0);
  std::vector<std::size_t> anchors;
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    if (candidate[a] && candidate[b]) {
      sets.unite(a, b);
      linked[a] = linked[b] = 1;
    } else if (candidate[a]) {
      anchors.push_back(a);
      linked[a] = 1;
    } else if (candidate[b]) {
      anchors.push_back(b);
      linked[b] = 1;
    }
  };
  for (const Edge& e : sys.edges)
    if (couples(e, eq)) link(e.p, e.q);
  for (const CrossFace& c : sys.cross) {
    if (!couples(c, eq)) continue;
    for (auto [j, w] : c.grad) {
      link(c.p, j);
      link(c.q, j);
    }
  }
  std::vector<char> anchored(n, 0);
  for (std::size_t a : anchors) anchored[sets.find(a)] = 1;

  std::vector<char> isolated(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!candidate[i] || anchored[sets.find(i)]) continue;
    if (!linked[i]) {
      isolated[i] = 1;
      continue;
    }
    throw SingularSystemError(equation_name(eq));
  }
  return isolated;
}

void fill(std::vector<char>& v, std::size_t n, char x) {
  if (v.empty()) v.assign(n, x);
  if (v.size() != n) throw InvalidArgument("per-node vector has the wrong length");
}

void fill(std::vector<double>& v, std::size_t n) {
  if (v.empty()) v.assign(n, 0.0);
  if (v.size() != n) throw InvalidArgument("per-node vector has the wrong length");
}

double safe(double x) { return std::isfinite(x) ? x : std::numeric_limits<double>::infinity(); }

}  // namespace

void prepare(CoupledSystem& sys) {
  const std::size_t n = sys.num_nodes;
  fill(sys.active_O, n, 1);
  fill(sys.active_plus, n, 1);
  fill(sys.dirichlet_O, n, 0);
  fill(sys.dirichlet_plus, n, 0);
  fill(sys.dirichlet_phi, n, 0);
  for (auto* v : {&sys.value_O, &sys.value_plus, &sys.value_phi, &sys.reaction_O, &sys.reaction_plus, &sys.charge,
                  &sys.fixed_charge, &sys.source_O, &sys.source_plus, &sys.source_phi})
    fill(*v, n);
  sys.isolated_O = find_isolated(sys, Equation::oxygen);
  sys.isolated_plus = find_isolated(sys, Equation::proton);
  sys.isolated_phi = find_isolated(sys, Equation::potential);
}

std::vector<double> reaction_rates(const CoupledSystem& sys, const CoupledFields& u, ReactionCounters* counters) {
  std::vector<double> rate(sys.num_nodes, 0.0);
  for (std::size_t i = 0; i < sys.num_nodes; ++i) {
    if (sys.reaction_O[i] == 0 && sys.reaction_plus[i] == 0) continue;
    rate[i] = butler_volmer_rate(1.0, u.C_plus[i], u.C_O[i], u.Phi[i], sys.reaction, counters);
  }
  return rate;
}

// d rate / d C of the species solved by `eq`, at node i
static double rate_slope(const CoupledSystem& sys, const CoupledFields& u, std::size_t i, Equation eq) {
  const bool ox = eq == Equation::oxygen;
  const double order = ox ? sys.reaction.n_O : sys.reaction.n_plus;
  const double c = ox ? u.C_O[i] : u.C_plus[i];
  if (order == 0) return 0;
  if (!(c > 0) && order != 1) return 0;
  // rate with the species' factor set to one, times n c^(n-1)
  const double unit = ox ? butler_volmer_rate(1.0, u.C_plus[i], 1.0, u.Phi[i], sys.reaction)
                         : butler_volmer_rate(1.0, 1.0, u.C_O[i], u.Phi[i], sys.reaction);
  return order * (order == 1 ? 1.0 : std::pow(c, order - 1)) * unit;
}

LinearSystem assemble(const CoupledSystem& sys, Equation eq, const CoupledFields& u, bool linearized,
                      const std::vector<double>& rate) {
  const std::size_t n = sys.num_nodes;
  const EquationView v = view(sys, eq, u);
  LinearSystem ls;
  ls.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  ls.free.assign(n, 0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n + 4 * sys.edges.size());

  for (std::size_t i = 0; i < n; ++i) {
    const bool active = !v.active || (*v.active)[i];
    const auto row = static_cast<int>(i);
    if (!active) {
      trip.emplace_back(row, row, 1.0);
    } else if ((*v.dirichlet)[i]) {
      trip.emplace_back(row, row, 1.0);
      ls.b[row] = (*v.value)[i];
    } else if ((*v.isolated)[i]) {
      trip.emplace_back(row, row, 1.0);
      ls.b[row] = (*v.field)[i];
    } else {
      ls.free[i] = 1;
    }
  }

  auto add = [&](std::size_t r, std::size_t c, double x) {
    if (ls.free[r] && x != 0) trip.emplace_back(static_cast<int>(r), static_cast<int>(c), x);
  };

  for (const Edge& e : sys.edges) {
    double fp = 0, fq = 0;  // flux p -> q = fp u_p - fq u_q
    switch (eq) {
      case Equation::oxygen: fp = fq = e.w_O; break;
      case Equation::potential: fp = fq = e.w_E; break;
      case Equation::proton: {
        const double dphi = u.Phi[e.q] - u.Phi[e.p];
        if (e.w_D > 0) {
          const double x = e.w_M / e.w_D * dphi;
          fp = e.w_D * bernoulli(x);
          fq = e.w_D * bernoulli(-x);
        } else if (e.w_M > 0) {
          if (dphi <= 0) fp = -e.w_M * dphi;
          else fq = e.w_M * dphi;
        }
        break;
      }
    }
    if (fp == 0 && fq == 0) continue;
    add(e.p, e.p, fp);
    add(e.p, e.q, -fq);
    add(e.q, e.p, -fp);
    add(e.q, e.q, fq);
  }

  for (const CrossFace& c : sys.cross) {
    double coef = 0;
    switch (eq) {
      case Equation::oxygen: coef = c.c_O; break;
      case Equation::potential: coef = c.c_E; break;
      case Equation::proton: coef = c.c_D; break;
    }
    if (coef != 0) {
      for (auto [j, w] : c.grad) {
        add(c.p, j, -c.area * coef * w);
        add(c.q, j, c.area * coef * w);
      }
    }
    if (eq == Equation::proton && c.c_M != 0) {
      double g = 0;
      for (auto [j, w] : c.grad) g += w * u.Phi[j];
      const double x = -0.5 * c.area * c.c_M * g;
      add(c.p, c.p, x);
      add(c.p, c.q, x);
      add(c.q, c.p, -x);
      add(c.q, c.q, -x);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!ls.free[i]) continue;
    const auto row = static_cast<Eigen::Index>(i);
    switch (eq) {
      case Equation::oxygen:
      case Equation::proton: {
        const bool ox = eq == Equation::oxygen;
        const double weight = ox ? sys.reaction_O[i] : sys.reaction_plus[i];
        ls.b[row] = weight * rate[i] + (ox ? sys.source_O[i] : sys.source_plus[i]);
        if (linearized && weight != 0) {
          const double c = ox ? u.C_O[i] : u.C_plus[i];
          const double slope = weight * rate_slope(sys, u, i, eq);
          if (slope != 0) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), -slope);
          ls.b[row] -= slope * c;
        }
        break;
      }
      case Equation::potential: {
        const double q = sys.charge[i] * std::max(u.C_plus[i], 0.0);
        if (linearized) {
          if (q > 0) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), q);
          ls.b[row] = q * (1 + u.Phi[i]) + sys.fixed_charge[i] + sys.source_phi[i];
        } else {
          ls.b[row] = sys.charge[i] * u.C_plus[i] + sys.fixed_charge[i] + sys.source_phi[i];
        }
        break;
      }
    }
  }

  ls.A.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  ls.A.setFromTriplets(trip.begin(), trip.end());
  ls.A.makeCompressed();
  return ls;
}

double relative_residual(const LinearSystem& ls, const std::vector<double>& x) {
  // ||A x - b|| / max(||A x||, ||b||) after discounting the rounding error of
  // evaluating A x, so states where A x cancels (constant fields) still converge
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd Ax = ls.A * xv;
  const Eigen::VectorXd mag = ls.A.cwiseAbs() * xv.cwiseAbs();
  double f2 = 0, a2 = 0, b2 = 0, m2 = 0;
  for (std::size_t i = 0; i < ls.free.size(); ++i) {
    if (!ls.free[i]) continue;
    const auto r = static_cast<Eigen::Index>(i);
    f2 += (Ax[r] - ls.b[r]) * (Ax[r] - ls.b[r]);
    a2 += Ax[r] * Ax[r];
    b2 += ls.b[r] * ls.b[r];
    m2 += mag[r] * mag[r];
  }
  const double rounding = 1e3 * std::numeric_limits<double>::epsilon() * std::sqrt(m2);
  const double scale = std::max({std::sqrt(a2), std::sqrt(b2), 1e-300});
  return std::max(std::sqrt(f2) - rounding, 0.0) / scale;
}

ResidualNorms coupled_residual(const CoupledSystem& sys, const CoupledFields& u, ReactionCounters* counters) {
  const auto rate = reaction_rates(sys, u, counters);
  ResidualNorms r;
  r.oxygen = relative_residual(assemble(sys, Equation::oxygen, u, false, rate), u.C_O);
  r.proton = relative_residual(assemble(sys, Equation::proton, u, false, rate), u.C_plus);
  r.potential = relative_residual(assemble(sys, Equation::potential, u, false, rate), u.Phi);
  return r;
}

std::vector<double> solve_linear(const LinearSystem& ls, Equation eq) {
  const double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ls.A.nonZeros(); ++k)
    if (!std::isfinite(ls.A.valuePtr()[k]))
      throw SolverError(std::string("non-finite coefficients in the ") + equation_name(eq) + " equation", inf);
  if (!ls.b.allFinite()) throw SolverError(std::string("non-finite data in the ") + equation_name(eq) + " equation", inf);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(ls.A);
  lu.factorize(ls.A);
  if (lu.info() != Eigen::Success) throw SingularSystemError(equation_name(eq));
  const Eigen::VectorXd x = lu.solve(ls.b);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SingularSystemError(equation_name(eq));
  return {x.data(), x.data() + x.size()};
}

CoupledFields gummel_step(const CoupledSystem& sys, const CoupledFields& u, ReactionCounters* counters) {
  const auto rate = reaction_rates(sys, u, counters);
  CoupledFields next = u;
  next.Phi = solve_linear(assemble(sys, Equation::potential, u, true, rate), Equation::potential);
  next.C_plus = solve_linear(assemble(sys, Equation::proton, next, true, reaction_rates(sys, next, counters)),
                             Equation::proton);
  next.C_O = solve_linear(assemble(sys, Equation::oxygen, next, true, reaction_rates(sys, next, counters)),
                          Equation::oxygen);
  return next;
}

namespace {

// dB/dx, using B(-x) = B(x) + x
double bernoulli_slope(double x) {
  if (std::abs(x) < 1e-5) return -0.5 + x / 6;
  const double b = bernoulli(x);
  return b / x * (1 - b - x);
}

}  // namespace

CoupledFields newton_step(const CoupledSystem& sys, const CoupledFields& u, ReactionCounters* counters) {
  const std::size_t n = sys.num_nodes;
  const auto rate = reaction_rates(sys, u, counters);
  const LinearSystem lo = assemble(sys, Equation::oxygen, u, false, rate);
  const LinearSystem lp = assemble(sys, Equation::proton, u, false, rate);
  const LinearSystem le = assemble(sys, Equation::potential, u, false, rate);
  // unknowns ordered [C_O | C_+ | Phi]
  const auto off = [n](int block, std::size_t i) { return static_cast<int>(block * n + i); };
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(lo.A.nonZeros() + lp.A.nonZeros() + le.A.nonZeros()) + 8 * n +
               4 * sys.edges.size());
  Eigen::VectorXd F(static_cast<Eigen::Index>(3 * n));
  const LinearSystem* blocks[3] = {&lo, &lp, &le};
  const std::vector<double>* xs[3] = {&u.C_O, &u.C_plus, &u.Phi};
  for (int b = 0; b < 3; ++b) {
    const LinearSystem& ls = *blocks[b];
    const Eigen::Map<const Eigen::VectorXd> x(xs[b]->data(), static_cast<Eigen::Index>(n));
    F.segment(static_cast<Eigen::Index>(b * n), static_cast<Eigen::Index>(n)) = ls.A * x - ls.b;
    for (int k = 0; k < ls.A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(ls.A, k); it; ++it)
        trip.emplace_back(off(b, static_cast<std::size_t>(it.row())), off(b, static_cast<std::size_t>(it.col())),
                          it.value());
  }

  // reaction and charge coupling
  const double alpha = sys.reaction.alpha_c;
  for (std::size_t i = 0; i < n; ++i) {
    const double dO = rate_slope(sys, u, i, Equation::oxygen);
    const double dP = rate_slope(sys, u, i, Equation::proton);
    const double dPhi = -alpha * rate[i];
    if (lo.free[i] && sys.reaction_O[i] != 0) {
      const double w = sys.reaction_O[i];
      trip.emplace_back(off(0, i), off(0, i), -w * dO);
      trip.emplace_back(off(0, i), off(1, i), -w * dP);
      trip.emplace_back(off(0, i), off(2, i), -w * dPhi);
    }
    if (lp.free[i] && sys.reaction_plus[i] != 0) {
      const double w = sys.reaction_plus[i];
      trip.emplace_back(off(1, i), off(0, i), -w * dO);
      trip.emplace_back(off(1, i), off(1, i), -w * dP);
      trip.emplace_back(off(1, i), off(2, i), -w * dPhi);
    }
    if (le.free[i] && sys.charge[i] != 0) trip.emplace_back(off(2, i), off(1, i), -sys.charge[i]);
  }

  // dependence of the proton fluxes on Phi
  auto add_p = [&](std::size_t r, std::size_t phi_node, double x) {
    if (lp.free[r] && x != 0) trip.emplace_back(off(1, r), off(2, phi_node), x);
  };
  for (const Edge& e : sys.edges) {
    const double dphi = u.Phi[e.q] - u.Phi[e.p];
    double dj = 0;  // d(flux p -> q) / d(dphi)
    if (e.w_D > 0) {
      const double m = e.w_M / e.w_D;
      const double x = m * dphi;
      dj = e.w_D * m * (bernoulli_slope(x) * u.C_plus[e.p] + bernoulli_slope(-x) * u.C_plus[e.q]);
    } else if (e.w_M > 0) {
      dj = dphi <= 0 ? -e.w_M * u.C_plus[e.p] : -e.w_M * u.C_plus[e.q];
    }
    if (dj == 0) continue;
    add_p(e.p, e.q, dj);
    add_p(e.p, e.p, -dj);
    add_p(e.q, e.q, -dj);
    add_p(e.q, e.p, dj);
  }
  for (const CrossFace& c : sys.cross) {
    if (c.c_M == 0) continue;
    const double s = -0.5 * c.area * c.c_M * (u.C_plus[c.p] + u.C_plus[c.q]);
    for (auto [j, w] : c.grad) {
      add_p(c.p, j, s * w);
      add_p(c.q, j, -s * w);
    }
  }

  LinearSystem J;
  J.A.resize(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));
  J.A.setFromTriplets(trip.begin(), trip.end());
  J.A.makeCompressed();
  J.b = -F;
  const auto delta = solve_linear(J, Equation::potential);
  CoupledFields next = u;
  for (std::size_t i = 0; i < n; ++i) {
    next.C_O[i] += delta[i];
    next.C_plus[i] += delta[n + i];
    next.Phi[i] += delta[2 * n + i];
  }
  return next;
}

std::vector<double> oxygen_imbalance(const CoupledSystem& sys, const CoupledFields& u) {
  std::vector<double> out(sys.num_nodes, 0.0);
  const auto rate = reaction_rates(sys, u, nullptr);
  for (const Edge& e : sys.edges) {
    const double j = e.w_O * (u.C_O[e.p] - u.C_O[e.q]);
    out[e.p] += j;
    out[e.q] -= j;
  }
  for (const CrossFace& c : sys.cross) {
    if (c.c_O == 0) continue;
    double g = 0;
    for (auto [k, w] : c.grad) g += w * u.C_O[k];
    const double j = -c.area * c.c_O * g;
    out[c.p] += j;
    out[c.q] -= j;
  }
  for (std::size_t i = 0; i < sys.num_nodes; ++i) out[i] -= sys.reaction_O[i] * rate[i] + sys.source_O[i];
  return out;
}

FixedPointResult damped_fixed_point(CoupledFields u, const std::function<CoupledFields(const CoupledFields&)>& step,
                                    const std::function<ResidualNorms(const CoupledFields&)>& residual,
                                    const SolverControls& controls) {
  auto blend = [](const CoupledFields& a, const CoupledFields& b, double w) {
    CoupledFields c = a;
    auto mix = [w](std::vector<double>& x, const std::vector<double>& y) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += w * (y[i] - x[i]);
    };
    mix(c.C_O, b.C_O);
    mix(c.C_plus, b.C_plus);
    mix(c.Phi, b.Phi);
    return c;
  };
  auto record = [](int it, const ResidualNorms& r, double omega) {
    return IterationRecord{it, safe(r.combined()), r.oxygen, r.proton, r.potential, omega};
  };

  FixedPointResult out;
  double omega = controls.damping;
  int streak = 0;
  ResidualNorms r = residual(u);
  out.history.push_back(record(0, r, omega));
  int it = 0;
  while (safe(r.combined()) >= controls.tol_nl && it < controls.max_outer) {
    CoupledFields target;
    try {
      target = step(u);
    } catch (const SolverError&) {
      // the iterate left the range where the linearized systems are finite
      break;
    }
    CoupledFields cand = blend(u, target, omega);
    ResidualNorms rc = residual(cand);
    // non-monotone acceptance: compare against the worst of the recent residuals
    double ref = 0;
    const std::size_t window = std::min<std::size_t>(out.history.size(), 5);
    for (std::size_t k = out.history.size() - window; k < out.history.size(); ++k)
      ref = std::max(ref, out.history[k].residual);
    while (safe(rc.combined()) > ref && omega > controls.min_damping) {
      omega = std::max(0.5 * omega, controls.min_damping);
      streak = 0;
      cand = blend(u, target, omega);
      rc = residual(cand);
    }
    ++it;
    if (safe(rc.combined()) < safe(r.combined())) {
      if (++streak >= controls.reset_after) {
        omega = controls.damping;
        streak = 0;
      }
    } else {
      streak = 0;
    }
    u = std::move(cand);
    r = rc;
    out.history.push_back(record(it, r, omega));
    if (!std::isfinite(r.combined())) break;
  }
  out.fields = std::move(u);
  out.iterations = it;
  out.residual = safe(r.combined());
  out.converged = out.residual < controls.tol_nl;
  return out;
}

FixedPointResult solve_coupled(const CoupledSystem& sys, CoupledFields initial, const SolverControls& controls,
                               ReactionCounters* counters) {
  auto residual = [&](const CoupledFields& u) { return coupled_residual(sys, u, counters); };
  FixedPointResult out = damped_fixed_point(
      initial, [&](const CoupledFields& u) { return gummel_step(sys, u, counters); }, residual, controls);
  if (out.converged) return out;
  // the decoupled sweeps can be unstable for strong drift coupling; retry with
  // damped Newton steps on the coupled system
  FixedPointResult alt = damped_fixed_point(
      std::move(initial), [&](const CoupledFields& u) { return newton_step(sys, u, counters); }, residual, controls);
  if (alt.converged || alt.residual < out.residual) {
    alt.iterations += out.iterations;
    return alt;
  }
  return out;
}

}  // namespace homog::detail
