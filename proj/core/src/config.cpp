#include "homog/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "homog/errors.hpp"
#include "homog/output.hpp"

namespace homog {

double SurfaceChargeConfig::operator()(const Point& x) const {
  double s = constant;
  for (std::size_t a = 0; a < linear.size() && a < 3; ++a) s += linear[a] * x[a];
  for (std::size_t a = 0; a < quadratic.size() && a < 3; ++a) s += quadratic[a] * x[a] * x[a];
  return s;
}

bool SurfaceChargeConfig::is_zero() const {
  auto zero = [](const std::vector<double>& v) {
    for (double c : v)
      if (c != 0) return false;
    return true;
  };
  return constant == 0 && zero(linear) && zero(quadratic);
}

bool RunConfig::operator==(const RunConfig& o) const {
  auto same_reaction = [](const ReactionParameters& a, const ReactionParameters& b) {
    return a.alpha_c == b.alpha_c && a.n_plus == b.n_plus && a.n_O == b.n_O && a.Phi_0 == b.Phi_0;
  };
  return geometry == o.geometry && physical == o.physical && dimensionless == o.dimensionless &&
         same_reaction(reaction, o.reaction) && macro == o.macro && solver == o.solver && micro == o.micro &&
         output_dir == o.output_dir;
}

namespace {

using Lines = std::map<std::string, int>;

struct Value {
  enum Kind { number, string, list } kind = number;
  std::string text;               // number token or string contents
  std::vector<std::string> items; // number tokens of a list
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

Value parse_value(const std::string& raw, int line) {
  Value v;
  if (raw.empty()) throw ConfigError("missing value", line);
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"' || raw.find('"', 1) != raw.size() - 1)
      throw ConfigError("malformed string " + raw, line);
    v.kind = Value::string;
    v.text = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') throw ConfigError("malformed list " + raw, line);
    v.kind = Value::list;
    const std::string body = trim(std::string_view(raw).substr(1, raw.size() - 2));
    if (body.empty()) return v;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError("empty list entry in " + raw, line);
      v.items.push_back(item);
    }
    return v;
  }
  v.text = raw;
  return v;
}

double to_double(const std::string& tok, const std::string& key, int line) {
  double x = 0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  if (!tok.empty() && *b == '+') ++b;
  const auto res = std::from_chars(b, e, x);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(x))
    throw ConfigError("key " + key + " expects a finite number, got " + tok, line);
  return x;
}

int to_int(const std::string& tok, const std::string& key, int line) {
  int x = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ConfigError("key " + key + " expects an integer, got " + tok, line);
  return x;
}

struct Entry {
  Value value;
  int line;
  std::string key;

  double number() const {
    if (value.kind != Value::number) throw ConfigError("key " + key + " expects a number", line);
    return to_double(value.text, key, line);
  }
  int integer() const {
    if (value.kind != Value::number) throw ConfigError("key " + key + " expects an integer", line);
    return to_int(value.text, key, line);
  }
  std::string string() const {
    if (value.kind != Value::string) throw ConfigError("key " + key + " expects a quoted string", line);
    return value.text;
  }
  std::vector<double> numbers() const {
    if (value.kind != Value::list) throw ConfigError("key " + key + " expects a list", line);
    std::vector<double> out;
    for (const auto& t : value.items) out.push_back(to_double(t, key, line));
    return out;
  }
  std::vector<int> integers() const {
    if (value.kind != Value::list) throw ConfigError("key " + key + " expects a list", line);
    std::vector<int> out;
    for (const auto& t : value.items) out.push_back(to_int(t, key, line));
    return out;
  }
};

void fail(const std::string& what, const std::string& key, const Lines* lines) {
  int line = 0;
  if (lines) {
    auto it = lines->find(key);
    if (it != lines->end()) line = it->second;
  }
  throw ConfigError(what, line);
}

void validate_impl(const RunConfig& c, const Lines* lines) {
  const auto& g = c.geometry;
  if (g.kind != "channel" && g.kind != "inclusion" && g.kind != "bitmap")
    fail("geometry.kind must be channel, inclusion or bitmap", "geometry.kind", lines);
  if (g.dim != 2 && g.dim != 3) fail("geometry.dim must be 2 or 3", "geometry.dim", lines);
  if (g.n < 2) fail("geometry.n must be at least 2", "geometry.n", lines);
  if (g.kind == "channel" && !(g.porosity > 0 && g.porosity <= 1))
    fail("geometry.porosity must lie in (0, 1]", "geometry.porosity", lines);
  if (g.kind == "inclusion") {
    if (g.sides.size() != 1 && static_cast<int>(g.sides.size()) != g.dim)
      fail("geometry.sides needs 1 or dim entries", "geometry.sides", lines);
    for (double s : g.sides)
      if (!(s >= 0 && s < 1)) fail("geometry.sides entries must lie in [0, 1)", "geometry.sides", lines);
  }
  if (g.kind == "bitmap") {
    if (g.dim != 2) fail("bitmap geometries are 2D", "geometry.dim", lines);
    if (g.file.empty()) fail("bitmap geometry needs geometry.file", "geometry.kind", lines);
    if (!std::filesystem::exists(g.file)) fail("bitmap file " + g.file + " does not exist", "geometry.file", lines);
  }
  if (c.physical && c.dimensionless)
    fail("both [physical] and [dimensionless] parameter blocks are present; keep one", "dimensionless", lines);
  if (c.dimensionless) {
    const auto& d = *c.dimensionless;
    if (!(d.lambda > 0)) fail("dimensionless.lambda must be positive", "dimensionless.lambda", lines);
    if (!(d.gamma >= 0)) fail("dimensionless.gamma must be non-negative", "dimensionless.gamma", lines);
    if (!(d.beta_O_bar >= 0)) fail("dimensionless.beta_O_bar must be non-negative", "dimensionless.beta_O_bar", lines);
    if (!(d.beta_plus_bar >= 0))
      fail("dimensionless.beta_plus_bar must be non-negative", "dimensionless.beta_plus_bar", lines);
  }
  if (c.physical) {
    try {
      derive_dimensionless(*c.physical, 0.0);
    } catch (const InvalidArgument& e) {
      fail(e.what(), "physical", lines);
    }
  }
  const auto& r = c.reaction;
  if (!(r.alpha_c > 0 && r.alpha_c < 1)) fail("reaction.alpha_c must lie in (0, 1)", "reaction.alpha_c", lines);
  if (!(r.n_plus >= 0)) fail("reaction.n_plus must be non-negative", "reaction.n_plus", lines);
  if (!(r.n_O >= 0)) fail("reaction.n_O must be non-negative", "reaction.n_O", lines);

  const auto& m = c.macro;
  if (static_cast<int>(m.lengths.size()) != g.dim) fail("macro.lengths needs one entry per axis", "macro.lengths", lines);
  if (static_cast<int>(m.cells.size()) != g.dim) fail("macro.cells needs one entry per axis", "macro.cells", lines);
  for (double l : m.lengths)
    if (!(l > 0)) fail("macro.lengths must be positive", "macro.lengths", lines);
  for (int n : m.cells)
    if (n < 1) fail("macro.cells must be at least 1", "macro.cells", lines);
  if (!(m.C_O_D >= 0)) fail("macro.C_O_D must be non-negative", "macro.C_O_D", lines);
  if (!(m.C_plus_D >= 0)) fail("macro.C_plus_D must be non-negative", "macro.C_plus_D", lines);
  if (static_cast<int>(m.sigma_s.linear.size()) > g.dim)
    fail("macro.sigma_s_linear has more entries than axes", "macro.sigma_s_linear", lines);
  if (static_cast<int>(m.sigma_s.quadratic.size()) > g.dim)
    fail("macro.sigma_s_quadratic has more entries than axes", "macro.sigma_s_quadratic", lines);

  const auto& s = c.solver;
  if (!(s.tol_nl > 0)) fail("solver.tol_nl must be positive", "solver.tol_nl", lines);
  if (!(s.tol_lin > 0)) fail("solver.tol_lin must be positive", "solver.tol_lin", lines);
  if (s.max_outer < 1) fail("solver.max_outer must be at least 1", "solver.max_outer", lines);
  if (!(s.damping > 0 && s.damping <= 1)) fail("solver.damping must lie in (0, 1]", "solver.damping", lines);
  if (!(s.min_damping > 0 && s.min_damping <= s.damping))
    fail("solver.min_damping must lie in (0, damping]", "solver.min_damping", lines);
  if (s.block_cells < 1) fail("solver.block_cells must be at least 1", "solver.block_cells", lines);
  if (s.free_energy_sign != "as_printed" && s.free_energy_sign != "flipped")
    fail("solver.free_energy_sign must be as_printed or flipped", "solver.free_energy_sign", lines);

  if (c.micro.r_list.empty()) fail("micro.r_list must not be empty", "micro.r_list", lines);
  for (double rr : c.micro.r_list)
    if (!(rr > 0 && rr <= 1)) fail("micro.r_list entries must lie in (0, 1]", "micro.r_list", lines);
  if (c.output_dir.empty()) fail("output.dir must not be empty", "output.dir", lines);
}

}  // namespace

void validate(const RunConfig& config) { validate_impl(config, nullptr); }

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"geometry", {"kind", "dim", "n", "porosity", "sides", "file"}},
      {"physical",
       {"i0", "L", "e", "D_O", "D_plus", "eps_pore", "eps_solid", "R", "T", "F", "z_plus", "c_bar", "k_B"}},
      {"dimensionless", {"lambda", "gamma", "beta_O_bar", "beta_plus_bar"}},
      {"reaction", {"alpha_c", "n_plus", "n_O", "Phi_0"}},
      {"macro",
       {"lengths", "cells", "C_O_D", "C_plus_D", "Phi_D_O", "Phi_D_H", "sigma_s", "sigma_s_linear",
        "sigma_s_quadratic"}},
      {"solver", {"tol_nl", "tol_lin", "max_outer", "damping", "min_damping", "block_cells", "free_energy_sign"}},
      {"micro", {"r_list"}},
      {"output", {"dir"}},
  };

  std::map<std::string, std::map<std::string, Entry>> sections;
  Lines lines;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header " + line, lineno);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!schema.count(section)) throw ConfigError("unknown section [" + section + "]", lineno);
      if (sections.count(section)) throw ConfigError("section [" + section + "] appears twice", lineno);
      sections[section];
      lines[section] = lineno;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got " + line, lineno);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (section.empty()) throw ConfigError("key " + key + " appears before any section", lineno);
    if (!schema.at(section).count(key)) throw ConfigError("unknown key " + section + "." + key, lineno);
    auto& entries = sections[section];
    if (entries.count(key)) throw ConfigError("key " + section + "." + key + " appears twice", lineno);
    entries.emplace(key, Entry{parse_value(trim(std::string_view(line).substr(eq + 1)), lineno), lineno,
                               section + "." + key});
    lines[section + "." + key] = lineno;
  }

  if (!sections.count("geometry")) throw ConfigError("missing [geometry] section");
  RunConfig c;
  auto get = [&](const std::string& sec, const std::string& key) -> const Entry* {
    auto s = sections.find(sec);
    if (s == sections.end()) return nullptr;
    auto e = s->second.find(key);
    return e == s->second.end() ? nullptr : &e->second;
  };
  auto num = [&](const std::string& sec, const std::string& key, double& out) {
    if (auto e = get(sec, key)) out = e->number();
  };
  auto integer = [&](const std::string& sec, const std::string& key, int& out) {
    if (auto e = get(sec, key)) out = e->integer();
  };
  auto str = [&](const std::string& sec, const std::string& key, std::string& out) {
    if (auto e = get(sec, key)) out = e->string();
  };

  auto& g = c.geometry;
  str("geometry", "kind", g.kind);
  integer("geometry", "dim", g.dim);
  integer("geometry", "n", g.n);
  num("geometry", "porosity", g.porosity);
  if (auto e = get("geometry", "sides")) g.sides = e->numbers();
  if (auto e = get("geometry", "file")) {
    std::filesystem::path f = e->string();
    if (f.is_relative() && !base_dir.empty()) f = base_dir / f;
    g.file = f.lexically_normal().string();
  }

  if (sections.count("physical")) {
    Nondimensionalization nd;
    num("physical", "i0", nd.i0);
    num("physical", "L", nd.L);
    num("physical", "e", nd.e);
    num("physical", "D_O", nd.D_O);
    num("physical", "D_plus", nd.D_plus);
    num("physical", "eps_pore", nd.eps_pore);
    num("physical", "eps_solid", nd.eps_solid);
    num("physical", "R", nd.R);
    num("physical", "T", nd.T);
    num("physical", "F", nd.F);
    num("physical", "z_plus", nd.z_plus);
    num("physical", "c_bar", nd.c_bar);
    num("physical", "k_B", nd.k_B);
    c.physical = nd;
  }
  if (sections.count("dimensionless")) {
    DimensionlessConfig d;
    num("dimensionless", "lambda", d.lambda);
    num("dimensionless", "gamma", d.gamma);
    num("dimensionless", "beta_O_bar", d.beta_O_bar);
    num("dimensionless", "beta_plus_bar", d.beta_plus_bar);
    c.dimensionless = d;
  }
  num("reaction", "alpha_c", c.reaction.alpha_c);
  num("reaction", "n_plus", c.reaction.n_plus);
  num("reaction", "n_O", c.reaction.n_O);
  num("reaction", "Phi_0", c.reaction.Phi_0);

  auto& m = c.macro;
  if (g.dim == 3 && !get("macro", "lengths")) m.lengths = {1.0, 1.0, 1.0};
  if (g.dim == 3 && !get("macro", "cells")) m.cells = {16, 16, 16};
  if (auto e = get("macro", "lengths")) m.lengths = e->numbers();
  if (auto e = get("macro", "cells")) m.cells = e->integers();
  num("macro", "C_O_D", m.C_O_D);
  num("macro", "C_plus_D", m.C_plus_D);
  num("macro", "Phi_D_O", m.Phi_D_O);
  num("macro", "Phi_D_H", m.Phi_D_H);
  num("macro", "sigma_s", m.sigma_s.constant);
  if (auto e = get("macro", "sigma_s_linear")) m.sigma_s.linear = e->numbers();
  if (auto e = get("macro", "sigma_s_quadratic")) m.sigma_s.quadratic = e->numbers();

  auto& s = c.solver;
  num("solver", "tol_nl", s.tol_nl);
  num("solver", "tol_lin", s.tol_lin);
  integer("solver", "max_outer", s.max_outer);
  num("solver", "damping", s.damping);
  num("solver", "min_damping", s.min_damping);
  integer("solver", "block_cells", s.block_cells);
  str("solver", "free_energy_sign", s.free_energy_sign);

  if (auto e = get("micro", "r_list")) c.micro.r_list = e->numbers();
  str("output", "dir", c.output_dir);

  validate_impl(c, &lines);
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config_text(text, path.parent_path());
}

namespace {

std::string quoted(const std::string& s) {
  if (s.find('"') != std::string::npos || s.find('\n') != std::string::npos)
    throw ConfigError("string value cannot contain quotes or newlines: " + s);
  return "\"" + s + "\"";
}

template <class T>
std::string list(const std::vector<T>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_same_v<T, int>) s += std::to_string(v[i]);
    else s += format_double(v[i]);
  }
  return s + "]";
}

}  // namespace

std::string serialize(const RunConfig& c) {
  std::ostringstream o;
  auto kv = [&](const char* key, const std::string& value) { o << key << " = " << value << "\n"; };
  auto num = [&](const char* key, double v) { kv(key, format_double(v)); };

  o << "[geometry]\n";
  kv("kind", quoted(c.geometry.kind));
  kv("dim", std::to_string(c.geometry.dim));
  kv("n", std::to_string(c.geometry.n));
  num("porosity", c.geometry.porosity);
  kv("sides", list(c.geometry.sides));
  if (!c.geometry.file.empty()) kv("file", quoted(c.geometry.file));

  if (c.physical) {
    const auto& nd = *c.physical;
    o << "\n[physical]\n";
    num("i0", nd.i0);
    num("L", nd.L);
    num("e", nd.e);
    num("D_O", nd.D_O);
    num("D_plus", nd.D_plus);
    num("eps_pore", nd.eps_pore);
    num("eps_solid", nd.eps_solid);
    num("R", nd.R);
    num("T", nd.T);
    num("F", nd.F);
    num("z_plus", nd.z_plus);
    num("c_bar", nd.c_bar);
    num("k_B", nd.k_B);
  }
  if (c.dimensionless) {
    const auto& d = *c.dimensionless;
    o << "\n[dimensionless]\n";
    num("lambda", d.lambda);
    num("gamma", d.gamma);
    num("beta_O_bar", d.beta_O_bar);
    num("beta_plus_bar", d.beta_plus_bar);
  }

  o << "\n[reaction]\n";
  num("alpha_c", c.reaction.alpha_c);
  num("n_plus", c.reaction.n_plus);
  num("n_O", c.reaction.n_O);
  num("Phi_0", c.reaction.Phi_0);

  o << "\n[macro]\n";
  kv("lengths", list(c.macro.lengths));
  kv("cells", list(c.macro.cells));
  num("C_O_D", c.macro.C_O_D);
  num("C_plus_D", c.macro.C_plus_D);
  num("Phi_D_O", c.macro.Phi_D_O);
  num("Phi_D_H", c.macro.Phi_D_H);
  num("sigma_s", c.macro.sigma_s.constant);
  kv("sigma_s_linear", list(c.macro.sigma_s.linear));
  kv("sigma_s_quadratic", list(c.macro.sigma_s.quadratic));

  o << "\n[solver]\n";
  num("tol_nl", c.solver.tol_nl);
  num("tol_lin", c.solver.tol_lin);
  kv("max_outer", std::to_string(c.solver.max_outer));
  num("damping", c.solver.damping);
  num("min_damping", c.solver.min_damping);
  kv("block_cells", std::to_string(c.solver.block_cells));
  kv("free_energy_sign", quoted(c.solver.free_energy_sign));

  o << "\n[micro]\n";
  kv("r_list", list(c.micro.r_list));

  o << "\n[output]\n";
  kv("dir", quoted(c.output_dir));
  return o.str();
}

CellSpec cell_spec(const RunConfig& c, double lambda_sq, double gamma) {
  CellSpec spec;
  spec.dim = c.geometry.dim;
  spec.n = c.geometry.n;
  spec.lambda_sq = lambda_sq;
  spec.gamma = gamma;
  if (c.geometry.kind == "channel") spec.shape = ChannelShape{c.geometry.porosity};
  else if (c.geometry.kind == "inclusion") spec.shape = InclusionShape{c.geometry.sides};
  else spec.shape = BitmapShape{c.geometry.file};
  return spec;
}

DimensionlessParameters resolve_parameters(const RunConfig& c, double Lambda) {
  if (c.physical) return derive_dimensionless(*c.physical, Lambda);
  DimensionlessParameters d;
  d.lambda = 1;
  d.gamma = 1;
  if (c.dimensionless) {
    d.lambda = c.dimensionless->lambda;
    d.gamma = c.dimensionless->gamma;
    d.beta_O_bar = c.dimensionless->beta_O_bar;
    d.beta_plus_bar = c.dimensionless->beta_plus_bar;
    if (Lambda > 0) {
      d.beta_O = d.beta_O_bar / Lambda;
      d.beta_plus = d.beta_plus_bar / Lambda;
    }
  }
  return d;
}

SolverControls solver_controls(const RunConfig& c) {
  SolverControls s;
  s.tol_nl = c.solver.tol_nl;
  s.max_outer = c.solver.max_outer;
  s.damping = c.solver.damping;
  s.min_damping = c.solver.min_damping;
  return s;
}

}  // namespace homog
