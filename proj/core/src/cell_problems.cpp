#include "homog/cell_problems.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "homog/errors.hpp"
#include "periodic_q1.hpp"

namespace homog {

const char* to_string(CorrectorSpecies s) noexcept {
  switch (s) {
    case CorrectorSpecies::oxygen: return "oxygen";
    case CorrectorSpecies::proton: return "proton";
    case CorrectorSpecies::potential: return "potential";
  }
  return "?";
}

namespace {

void check_direction(const UnitCell& cell, int k) {
  if (k < 0 || k >= cell.dim())
    throw InvalidArgument("corrector direction " + std::to_string(k) + " out of range for a " +
                          std::to_string(cell.dim()) + "D cell");
}

std::vector<double> pore_coefficients(const UnitCell& cell) {
  std::vector<double> coef(cell.num_voxels());
  for (std::size_t e = 0; e < coef.size(); ++e) coef[e] = cell.is_pore(e) ? 1.0 : 0.0;
  return coef;
}

std::vector<double> permittivity_coefficients(const UnitCell& cell) {
  std::vector<double> coef(cell.num_voxels());
  for (std::size_t e = 0; e < coef.size(); ++e) coef[e] = cell.permittivity(e);
  return coef;
}

std::vector<bool> pore_mask(const UnitCell& cell) {
  std::vector<bool> mask(cell.num_voxels());
  for (std::size_t e = 0; e < mask.size(); ++e) mask[e] = cell.is_pore(e);
  return mask;
}

struct Problem {
  detail::PeriodicSystem sys;
  Eigen::VectorXd rhs;
};

Problem build_problem(const UnitCell& cell, CorrectorSpecies species, int k, const CorrectorField* n_phi) {
  Problem pr;
  switch (species) {
    case CorrectorSpecies::oxygen: {
      const auto coef = pore_coefficients(cell);
      pr.sys = detail::assemble_periodic(cell, coef, pore_mask(cell));
      pr.rhs = detail::affine_load(cell, coef, pr.sys, k);
      break;
    }
    case CorrectorSpecies::potential: {
      const auto coef = permittivity_coefficients(cell);
      if (std::none_of(coef.begin(), coef.end(), [](double c) { return c > 0; }))
        throw InvalidArgument("permittivity vanishes everywhere");
      pr.sys = detail::assemble_periodic(cell, coef, std::vector<bool>(cell.num_voxels(), true));
      pr.rhs = detail::affine_load(cell, coef, pr.sys, k);
      break;
    }
    case CorrectorSpecies::proton: {
      const auto coef = pore_coefficients(cell);
      pr.sys = detail::assemble_periodic(cell, coef, pore_mask(cell));
      // Weak form: (grad N_+, grad v)_{Y^p} = (grad N_phi, grad v)_{Y^p}; the affine
      // parts cancel between both sides.
      Eigen::VectorXd phi_on_dofs(static_cast<Eigen::Index>(pr.sys.node_of_dof.size()));
      for (std::size_t d = 0; d < pr.sys.node_of_dof.size(); ++d)
        phi_on_dofs[static_cast<Eigen::Index>(d)] = n_phi->values[pr.sys.node_of_dof[d]];
      pr.rhs = pr.sys.K * phi_on_dofs;
      break;
    }
  }
  return pr;
}

CorrectorField scatter(const UnitCell& cell, CorrectorSpecies species, int k, const detail::PeriodicSystem& sys,
                       const linalg::CgResult& res) {
  CorrectorField f;
  f.species = species;
  f.direction = k;
  f.values.assign(cell.num_voxels(), 0.0);
  f.in_domain.assign(cell.num_voxels(), false);
  for (std::size_t d = 0; d < sys.node_of_dof.size(); ++d) {
    f.values[sys.node_of_dof[d]] = res.x[static_cast<Eigen::Index>(d)];
    f.in_domain[sys.node_of_dof[d]] = true;
  }
  f.cell_fingerprint = cell.fingerprint();
  f.iterations = res.iterations;
  f.relative_residual = res.relative_residual;
  return f;
}

CorrectorField solve(const UnitCell& cell, CorrectorSpecies species, int k, const CorrectorField* n_phi,
                     const LinearControls& controls) {
  check_direction(cell, k);
  Problem pr = build_problem(cell, species, k, n_phi);
  const int unknowns = static_cast<int>(pr.sys.node_of_dof.size());
  const auto res = linalg::projected_pcg(pr.sys.K, pr.rhs, pr.sys.null_space, controls.tolerance,
                                         controls.max_iteration_factor * std::max(unknowns, 1));
  if (!res.converged)
    throw SolverError(std::string("CG did not converge for the ") + to_string(species) + " corrector, direction " +
                          std::to_string(k),
                      res.relative_residual);
  return scatter(cell, species, k, pr.sys, res);
}

}  // namespace

CorrectorField solve_corrector_oxygen(const UnitCell& cell, int k, const LinearControls& controls) {
  return solve(cell, CorrectorSpecies::oxygen, k, nullptr, controls);
}

CorrectorField solve_corrector_potential(const UnitCell& cell, int k, const LinearControls& controls) {
  return solve(cell, CorrectorSpecies::potential, k, nullptr, controls);
}

CorrectorField solve_corrector_proton(const UnitCell& cell, int k, const CorrectorField& n_phi,
                                      const LinearControls& controls) {
  if (n_phi.species != CorrectorSpecies::potential)
    throw InvalidArgument("proton corrector needs the potential corrector as input");
  if (n_phi.direction != k)
    throw InvalidArgument("direction mismatch: proton corrector " + std::to_string(k) +
                          " given potential corrector " + std::to_string(n_phi.direction));
  if (n_phi.cell_fingerprint != cell.fingerprint())
    throw InvalidArgument("potential corrector was computed on a different cell");
  return solve(cell, CorrectorSpecies::proton, k, &n_phi, controls);
}

namespace {

void run_parallel(std::vector<std::function<void()>>& tasks, int threads) {
  const int workers = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  if (workers == 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(tasks.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) {
        try {
          tasks[i]();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

CorrectorSet solve_all_correctors(const UnitCell& cell, const LinearControls& controls, int threads) {
  const auto dim = static_cast<std::size_t>(cell.dim());
  CorrectorSet set;
  set.oxygen.resize(dim);
  set.potential.resize(dim);
  set.proton.resize(dim);

  std::vector<std::function<void()>> first;
  for (std::size_t k = 0; k < dim; ++k) {
    first.emplace_back([&, k] { set.oxygen[k] = solve_corrector_oxygen(cell, static_cast<int>(k), controls); });
    first.emplace_back([&, k] { set.potential[k] = solve_corrector_potential(cell, static_cast<int>(k), controls); });
  }
  run_parallel(first, threads);

  std::vector<std::function<void()>> second;
  for (std::size_t k = 0; k < dim; ++k)
    second.emplace_back(
        [&, k] { set.proton[k] = solve_corrector_proton(cell, static_cast<int>(k), set.potential[k], controls); });
  run_parallel(second, threads);
  return set;
}

double corrector_mean(const UnitCell& cell, const CorrectorField& field) {
  const auto el = detail::make_q1_element(cell.dim(), cell.h());
  const double share = el.volume / el.num_nodes;
  double sum = 0;
  double weight = 0;
  const bool whole_cell = field.species == CorrectorSpecies::potential;
  for (std::size_t e = 0; e < cell.num_voxels(); ++e) {
    if (!whole_cell && !cell.is_pore(e)) continue;
    for (std::size_t node : detail::element_nodes(cell, e)) {
      sum += share * field.values[node];
      weight += share;
    }
  }
  return sum / weight;
}

double weak_form_residual(const UnitCell& cell, const CorrectorField& field, const CorrectorField* n_phi) {
  if (field.species == CorrectorSpecies::proton && n_phi == nullptr)
    throw InvalidArgument("weak_form_residual needs the potential corrector for a proton corrector");
  Problem pr = build_problem(cell, field.species, field.direction, n_phi);
  Eigen::VectorXd x(static_cast<Eigen::Index>(pr.sys.node_of_dof.size()));
  for (std::size_t d = 0; d < pr.sys.node_of_dof.size(); ++d)
    x[static_cast<Eigen::Index>(d)] = field.values[pr.sys.node_of_dof[d]];
  Eigen::VectorXd r = pr.rhs - pr.sys.K * x;
  const double scale = pr.rhs.norm();
  return scale > 0 ? r.norm() / scale : r.norm();
}

}  // namespace homog
