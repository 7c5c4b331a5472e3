#include "homog/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "homog/errors.hpp"

namespace homog {

std::string format_double(double x) {
  if (!std::isfinite(x)) throw IoError("refusing to write a non-finite number");
  if (x == 0) x = 0;  // drop the sign of -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string vtk_structured_points(const BoxGrid& grid, const std::vector<NamedField>& fields,
                                  const std::string& title) {
  std::string s = "# vtk DataFile Version 3.0\n" + title + "\nASCII\nDATASET STRUCTURED_POINTS\n";
  int dims[3] = {1, 1, 1};
  double spacing[3] = {1, 1, 1};
  for (int a = 0; a < grid.dim(); ++a) {
    dims[a] = grid.nodes_along(a);
    spacing[a] = grid.spacing(a);
  }
  s += "DIMENSIONS " + std::to_string(dims[0]) + " " + std::to_string(dims[1]) + " " + std::to_string(dims[2]) + "\n";
  s += "ORIGIN 0 0 0\nSPACING " + format_double(spacing[0]) + " " + format_double(spacing[1]) + " " +
       format_double(spacing[2]) + "\n";
  s += "POINT_DATA " + std::to_string(grid.num_nodes()) + "\n";
  for (const auto& [name, values] : fields) {
    if (values->size() != grid.num_nodes()) throw IoError("field " + name + " does not match the grid");
    s += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
    for (double v : *values) s += format_double(v) + "\n";
  }
  return s;
}

std::string correctors_vtk(const UnitCell& cell, const CorrectorSet& set) {
  const int n = cell.n();
  const int d = cell.dim();
  const std::size_t total = cell.num_voxels();
  std::string s = "# vtk DataFile Version 3.0\nunit cell correctors\nASCII\nDATASET STRUCTURED_POINTS\n";
  s += "DIMENSIONS " + std::to_string(n) + " " + std::to_string(n) + " " + std::to_string(d == 3 ? n : 1) + "\n";
  s += "ORIGIN 0 0 0\nSPACING " + format_double(cell.h()) + " " + format_double(cell.h()) + " " +
       format_double(d == 3 ? cell.h() : 1.0) + "\n";
  s += "POINT_DATA " + std::to_string(total) + "\n";
  auto emit = [&](const std::vector<CorrectorField>& fields, const char* name) {
    for (const auto& f : fields) {
      s += std::string("SCALARS ") + name + "_" + std::to_string(f.direction + 1) + " double 1\nLOOKUP_TABLE default\n";
      for (std::size_t i = 0; i < total; ++i) s += format_double(f.in_domain[i] ? f.values[i] : 0.0) + "\n";
    }
  };
  emit(set.oxygen, "N_O");
  emit(set.proton, "N_plus");
  emit(set.potential, "N_phi");
  // node i sits at the lower corner of voxel i, so the phase rides along as point data
  s += "SCALARS solid int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < total; ++i) s += cell.is_pore(i) ? "0\n" : "1\n";
  return s;
}

std::string state_csv(const MacroState& st) {
  static const char* axes[] = {"x1", "x2", "x3"};
  const BoxGrid& g = st.grid;
  std::string s;
  for (int a = 0; a < g.dim(); ++a) s += std::string(axes[a]) + ",";
  s += "C_O,C_plus,Phi\n";
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const Point x = g.node_position(i);
    for (int a = 0; a < g.dim(); ++a) s += format_double(x[static_cast<std::size_t>(a)]) + ",";
    s += format_double(st.C_O[i]) + "," + format_double(st.C_plus[i]) + "," + format_double(st.Phi[i]) + "\n";
  }
  return s;
}

std::string iteration_log_csv(const std::vector<IterationRecord>& history) {
  std::string s = "iteration,residual,residual_O,residual_plus,residual_phi,damping\n";
  for (const auto& r : history)
    s += std::to_string(r.iteration) + "," + format_double(r.residual) + "," + format_double(r.residual_O) + "," +
         format_double(r.residual_plus) + "," + format_double(r.residual_phi) + "," + format_double(r.damping) + "\n";
  return s;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& T) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < T.cols(); ++j) {
      if (!std::isfinite(T(i, j))) throw IoError("refusing to write a non-finite tensor entry");
      row.push_back(T(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j, int dim, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) throw IoError(std::string("bad tensor ") + name);
  Eigen::MatrixXd T(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim) throw IoError(std::string("bad tensor ") + name);
    for (int c = 0; c < dim; ++c) T(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return T;
}

double finite(double x) {
  if (!std::isfinite(x)) throw IoError("refusing to write a non-finite number");
  return x;
}

}  // namespace

std::string tensors_json(const EffectiveCoefficients& c) {
  nlohmann::ordered_json j;
  j["dim"] = c.dim();
  j["D_O"] = matrix_json(c.D_O);
  j["D_plus"] = matrix_json(c.D_plus);
  j["M_plus"] = matrix_json(c.M_plus);
  j["eps"] = matrix_json(c.eps);
  j["p"] = finite(c.porosity);
  j["Lambda"] = finite(c.Lambda);
  j["beta_O"] = finite(c.beta_O_bar);
  j["beta_plus"] = finite(c.beta_plus_bar);
  return j.dump(2) + "\n";
}

EffectiveCoefficients parse_tensors_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const int dim = j.at("dim").get<int>();
    if (dim < 1 || dim > 3) throw IoError("bad tensor dimension");
    EffectiveCoefficients c;
    c.D_O = matrix_from(j.at("D_O"), dim, "D_O");
    c.D_plus = matrix_from(j.at("D_plus"), dim, "D_plus");
    c.M_plus = matrix_from(j.at("M_plus"), dim, "M_plus");
    c.eps = matrix_from(j.at("eps"), dim, "eps");
    c.porosity = j.at("p").get<double>();
    c.Lambda = j.at("Lambda").get<double>();
    c.beta_O_bar = j.at("beta_O").get<double>();
    c.beta_plus_bar = j.at("beta_plus").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed tensors file: ") + e.what());
  }
}

}  // namespace homog
