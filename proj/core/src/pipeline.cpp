#include "homog/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <thread>

#include <json.hpp>

#include "homog/errors.hpp"
#include "homog/limits.hpp"
#include "homog/micro_solver.hpp"
#include "homog/output.hpp"

namespace homog {

Stage parse_stage(const std::string& name) {
  if (name == "cell") return Stage::cell;
  if (name == "tensors") return Stage::tensors;
  if (name == "macro") return Stage::macro;
  if (name == "tdl") return Stage::tdl;
  if (name == "channel-validate") return Stage::channel_validate;
  if (name == "micro-study") return Stage::micro_study;
  throw ConfigError("unknown stage " + name);
}

const char* to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::cell: return "cell";
    case Stage::tensors: return "tensors";
    case Stage::macro: return "macro";
    case Stage::tdl: return "tdl";
    case Stage::channel_validate: return "channel-validate";
    case Stage::micro_study: return "micro-study";
  }
  return "?";
}

namespace {

namespace fs = std::filesystem;

struct Context {
  const RunConfig& cfg;
  fs::path out;
  int threads;
  bool auto_upstream;
  StageResult result;

  void write(const std::string& name, const std::string& text) {
    write_text_file(out / name, text);
    result.artifacts.push_back(out / name);
  }
};

struct CellSetup {
  UnitCell cell;
  DimensionlessParameters params;
};

CellSetup setup_cell(const RunConfig& cfg, std::optional<double> gamma_override = {}) {
  const DimensionlessParameters base = resolve_parameters(cfg, 0.0);
  const double gamma = gamma_override.value_or(base.gamma);
  UnitCell cell = build_cell(cell_spec(cfg, base.lambda * base.lambda, gamma));
  DimensionlessParameters params = resolve_parameters(cfg, interface_measure(cell));
  params.gamma = gamma;
  return {std::move(cell), params};
}

EffectiveCoefficients compute_tensors(const CellSetup& s, const RunConfig& cfg, int threads) {
  LinearControls lc;
  lc.tolerance = cfg.solver.tol_lin;
  EffectiveCoefficients c = compute_effective_coefficients(s.cell, lc, threads);
  c.beta_O_bar = s.params.beta_O_bar;
  c.beta_plus_bar = s.params.beta_plus_bar;
  return c;
}

EffectiveCoefficients upstream_tensors(Context& ctx, const CellSetup& s) {
  if (!ctx.auto_upstream) {
    const fs::path p = ctx.out / "tensors.json";
    if (!fs::exists(p)) throw IoError("upstream artifact " + p.string() + " is missing (run the tensors stage)");
    return parse_tensors_json(read_text_file(p));
  }
  EffectiveCoefficients c = compute_tensors(s, ctx.cfg, ctx.threads);
  ctx.write("tensors.json", tensors_json(c));
  return c;
}

BoxGrid macro_grid(const RunConfig& cfg) { return BoxGrid(cfg.macro.lengths, cfg.macro.cells); }

BoundaryData boundary(const RunConfig& cfg) {
  return {constant_field(cfg.macro.C_O_D), constant_field(cfg.macro.C_plus_D), constant_field(cfg.macro.Phi_D_O),
          constant_field(cfg.macro.Phi_D_H)};
}

std::vector<double> surface_charge(const RunConfig& cfg, const UnitCell& cell, const BoxGrid& grid) {
  if (cfg.macro.sigma_s.is_zero()) return std::vector<double>(grid.num_nodes(), 0.0);
  const SurfaceChargeConfig sigma = cfg.macro.sigma_s;
  return homogenize_surface_charge([sigma](const Point& x, const Point&) { return sigma(x); }, cell, grid).rho_s;
}

nlohmann::ordered_json matrix(const Eigen::MatrixXd& T) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < T.cols(); ++j) row.push_back(T(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::string dump(const nlohmann::ordered_json& j) {
  // nlohmann writes NaN/Inf as null; catch them first
  std::function<void(const nlohmann::ordered_json&)> check = [&](const nlohmann::ordered_json& v) {
    if (v.is_number_float() && !std::isfinite(v.get<double>())) throw IoError("refusing to write a non-finite number");
    if (v.is_structured())
      for (const auto& x : v) check(x);
  };
  check(j);
  return j.dump(2) + "\n";
}

nlohmann::ordered_json state_summary(const MacroState& s) {
  nlohmann::ordered_json j;
  j["converged"] = s.converged;
  j["outer_iterations"] = s.outer_iterations;
  j["residual"] = s.residual;
  j["reaction_evaluations"] = s.reaction.evaluations;
  j["reaction_clamped"] = s.reaction.clamped;
  j["reaction_negative"] = s.reaction.negative;
  j["positive_overpotential_nodes"] = s.positive_overpotential_nodes;
  return j;
}

void run_cell(Context& ctx) {
  const CellSetup s = setup_cell(ctx.cfg);
  LinearControls lc;
  lc.tolerance = ctx.cfg.solver.tol_lin;
  const CorrectorSet set = solve_all_correctors(s.cell, lc, ctx.threads);
  ctx.write("correctors.vtk", correctors_vtk(s.cell, set));
  ctx.result.summary = "cell: " + std::to_string(3 * s.cell.dim()) + " correctors, porosity " +
                       format_double(porosity(s.cell)) + ", Lambda " + format_double(interface_measure(s.cell));
}

void run_tensors(Context& ctx) {
  const CellSetup s = setup_cell(ctx.cfg);
  const EffectiveCoefficients c = compute_tensors(s, ctx.cfg, ctx.threads);
  ctx.write("tensors.json", tensors_json(c));
  ctx.result.summary = "tensors: p = " + format_double(c.porosity) + ", Lambda = " + format_double(c.Lambda);
}

void finish_state(Context& ctx, const MacroState& st, const std::string& stem, nlohmann::ordered_json summary) {
  ctx.write(stem + ".csv", state_csv(st));
  ctx.write(stem + "_iterations.csv", iteration_log_csv(st.history));
  ctx.write(stem + "_summary.json", dump(summary));
  ctx.result.summary = stem + ": " + (st.converged ? "converged" : "not converged") + " after " +
                       std::to_string(st.outer_iterations) + " iterations, residual " + format_double(st.residual);
  if (!st.converged) throw SolverError(stem + " solve did not converge", st.residual);
}

void run_macro(Context& ctx) {
  const CellSetup s = setup_cell(ctx.cfg);
  MacroProblem prob;
  prob.grid = macro_grid(ctx.cfg);
  prob.coeffs = upstream_tensors(ctx, s);
  prob.reaction = ctx.cfg.reaction;
  prob.bc = boundary(ctx.cfg);
  prob.rho_s = surface_charge(ctx.cfg, s.cell, prob.grid);
  const MacroState st = solve_macro(prob, solver_controls(ctx.cfg));

  ctx.write("macro.vtk", vtk_structured_points(st.grid, {{"C_O", &st.C_O}, {"C_plus", &st.C_plus}, {"Phi", &st.Phi}},
                                               "macro fields"));
  auto summary = state_summary(st);
  const FluxBalance fb = oxygen_flux_balance(prob, st);
  summary["oxygen_boundary_flux"] = fb.boundary_flux;
  summary["oxygen_integrated_source"] = fb.integrated_source;
  summary["oxygen_flux_mismatch"] = fb.relative_mismatch;
  const auto sign = ctx.cfg.solver.free_energy_sign == "flipped" ? GradientEnergySign::flipped
                                                                  : GradientEnergySign::as_printed;
  summary["free_energy"] = free_energy(st, s.params.lambda * s.params.lambda, sign);
  const auto eq = check_local_equilibrium(st, ctx.cfg.solver.block_cells);
  summary["local_equilibrium_max_spread"] = eq.max_spread;
  summary["local_equilibrium_excluded_nodes"] = eq.excluded;
  finish_state(ctx, st, "macro", std::move(summary));
}

void run_tdl(Context& ctx) {
  const CellSetup s = setup_cell(ctx.cfg, 0.0);
  TDLProblem prob;
  prob.grid = macro_grid(ctx.cfg);
  prob.coeffs = upstream_tensors(ctx, s);
  prob.reaction = ctx.cfg.reaction;
  prob.bc = boundary(ctx.cfg);
  prob.rho_s = surface_charge(ctx.cfg, s.cell, prob.grid);
  try {
    validate(prob);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const MacroState st = thin_double_layer_solve(prob, solver_controls(ctx.cfg));
  finish_state(ctx, st, "tdl", state_summary(st));
}

void run_channel_validate(Context& ctx) {
  if (ctx.cfg.geometry.kind != "channel") throw ConfigError("channel-validate needs geometry.kind = \"channel\"");
  const CellSetup s = setup_cell(ctx.cfg, 0.0);
  const double lambda_sq = s.params.lambda * s.params.lambda;
  const EffectiveCoefficients pipe = compute_tensors(s, ctx.cfg, ctx.threads);
  const double p = porosity(s.cell);
  const EffectiveCoefficients closed = straight_channel_tensors(p, lambda_sq, s.cell.dim());

  double dev = 0;
  for (auto [a, b] : {std::pair{&pipe.D_O, &closed.D_O}, {&pipe.D_plus, &closed.D_plus},
                      {&pipe.M_plus, &closed.M_plus}, {&pipe.eps, &closed.eps}})
    dev = std::max(dev, (*a - *b).cwiseAbs().maxCoeff());

  nlohmann::ordered_json j;
  j["porosity_nominal"] = ctx.cfg.geometry.porosity;
  j["porosity"] = p;
  j["lambda_sq"] = lambda_sq;
  j["pipeline"] = {{"D_O", matrix(pipe.D_O)}, {"D_plus", matrix(pipe.D_plus)}, {"M_plus", matrix(pipe.M_plus)},
                   {"eps", matrix(pipe.eps)}};
  j["closed_form"] = {{"D_O", matrix(closed.D_O)}, {"D_plus", matrix(closed.D_plus)},
                      {"M_plus", matrix(closed.M_plus)}, {"eps", matrix(closed.eps)}};
  j["max_entry_deviation"] = dev;
  j["passed"] = dev <= 1e-6;

  // the reduced straight-channel path against the general solver
  MacroProblem prob;
  prob.grid = macro_grid(ctx.cfg);
  prob.coeffs = closed;
  prob.coeffs.beta_O_bar = s.params.beta_O_bar;
  prob.coeffs.beta_plus_bar = s.params.beta_plus_bar;
  prob.reaction = ctx.cfg.reaction;
  prob.bc = boundary(ctx.cfg);
  prob.rho_s = surface_charge(ctx.cfg, s.cell, prob.grid);
  const auto controls = solver_controls(ctx.cfg);
  const MacroState general = solve_macro(prob, controls);
  const MacroState reduced = straight_channel_macro(prob, controls);
  double diff = 0;
  for (std::size_t i = 0; i < general.C_O.size(); ++i)
    diff = std::max({diff, std::abs(general.C_O[i] - reduced.C_O[i]), std::abs(general.C_plus[i] - reduced.C_plus[i]),
                     std::abs(general.Phi[i] - reduced.Phi[i])});
  j["macro_converged"] = general.converged && reduced.converged;
  j["macro_max_nodal_difference"] = diff;
  ctx.write("channel_report.json", dump(j));
  ctx.result.summary = "channel-validate: max tensor deviation " + format_double(dev) + ", macro paths differ by " +
                       format_double(diff);
  if (!general.converged) throw SolverError("macro solve did not converge", general.residual);
  if (!reduced.converged) throw SolverError("straight-channel solve did not converge", reduced.residual);
}

void run_micro_study(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (cfg.geometry.dim != 2) throw ConfigError("micro-study is 2D only");
  const CellSetup s = setup_cell(cfg);
  if ((s.params.beta_O_bar > 0 || s.params.beta_plus_bar > 0) && interface_measure(s.cell) == 0)
    throw ConfigError("reaction needs a pore/solid interface in the cell");

  MacroProblem prob;
  prob.grid = macro_grid(cfg);
  prob.coeffs = upstream_tensors(ctx, s);
  prob.reaction = cfg.reaction;
  prob.bc = boundary(cfg);
  prob.rho_s = surface_charge(cfg, s.cell, prob.grid);
  const auto controls = solver_controls(cfg);
  const MacroState macro = solve_macro(prob, controls);
  if (!macro.converged) throw SolverError("homogenized solve did not converge", macro.residual);

  const std::size_t runs = cfg.micro.r_list.size();
  std::vector<MicroMacroError> errors(runs);
  std::vector<std::exception_ptr> failures(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < runs; k = next++) {
      try {
        MicroProblem mp{.r = cfg.micro.r_list[k], .cell = s.cell};
        mp.lengths = cfg.macro.lengths;
        mp.beta_O = s.params.beta_O;
        mp.beta_plus = s.params.beta_plus;
        mp.reaction = cfg.reaction;
        if (!cfg.macro.sigma_s.is_zero()) {
          const SurfaceChargeConfig sigma = cfg.macro.sigma_s;
          mp.sigma_s = [sigma](const Point& x, const Point&) { return sigma(x); };
        }
        mp.bc = prob.bc;
        const MicroState ms = solve_micro(mp, controls);
        if (!ms.converged) throw SolverError("micro solve did not converge", ms.residual);
        errors[k] = micro_macro_error(ms, macro, s.cell);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(ctx.threads, static_cast<int>(runs)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::string csv = "r,error_CO,error_Cplus,error_Phi_L2,error_Phi_H1\n";
  for (std::size_t k = 0; k < runs; ++k)
    csv += format_double(cfg.micro.r_list[k]) + "," + format_double(errors[k].C_O) + "," +
           format_double(errors[k].C_plus) + "," + format_double(errors[k].Phi_L2) + "," +
           format_double(errors[k].Phi_H1) + "\n";
  ctx.write("convergence.csv", csv);
  ctx.result.summary = "micro-study: " + std::to_string(runs) + " runs";
}

}  // namespace

StageResult run_pipeline(const RunConfig& config, Stage stage, const RunOptions& options) {
  validate(config);
  Context ctx{config, options.out_dir.empty() ? fs::path(config.output_dir) : options.out_dir,
              std::max(1, options.threads), options.auto_upstream, {}};
  ctx.write("config_resolved.toml", serialize(config));
  switch (stage) {
    case Stage::cell: run_cell(ctx); break;
    case Stage::tensors: run_tensors(ctx); break;
    case Stage::macro: run_macro(ctx); break;
    case Stage::tdl: run_tdl(ctx); break;
    case Stage::channel_validate: run_channel_validate(ctx); break;
    case Stage::micro_study: run_micro_study(ctx); break;
  }
  return ctx.result;
}

}  // namespace homog
