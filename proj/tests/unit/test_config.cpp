#include <doctest.h>

#include <string>

#include "homog/config.hpp"
#include "homog/errors.hpp"

using namespace homog;

namespace {

const char* minimal = R"(
[geometry]
kind = "channel"
porosity = 0.5

[macro]
cells = [16, 8]
)";

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const RunConfig c = parse_config_text(minimal);
  CHECK(c.geometry.kind == "channel");
  CHECK(c.geometry.porosity == 0.5);
  CHECK(c.geometry.n == 32);
  CHECK(c.macro.cells == std::vector<int>{16, 8});
  CHECK(c.solver.tol_nl == 1e-8);
  CHECK(c.solver.max_outer == 200);
  CHECK(c.reaction.n_plus == 1.0);
  CHECK(c.reaction.n_O == 1.0);
  CHECK(c.reaction.alpha_c == 0.5);
  CHECK_FALSE(c.physical);
  CHECK_FALSE(c.dimensionless);

  const auto d = resolve_parameters(c, 2.0);
  CHECK(d.lambda == 1.0);
  CHECK(d.gamma == 1.0);
  CHECK(d.beta_O_bar == 0.0);

  const auto ctl = solver_controls(c);
  CHECK(ctl.tol_nl == 1e-8);
  CHECK(ctl.min_damping == 1.0 / 1024);
}

TEST_CASE("unknown keys and sections are rejected with their line") {
  const std::string key = error_of("[geometry]\nkind = \"channel\"\ncolour = 3\n");
  CHECK(key.find("line 3") != std::string::npos);
  CHECK(key.find("colour") != std::string::npos);

  const std::string sec = error_of("[geometry]\n[extras]\nx = 1\n");
  CHECK(sec.find("extras") != std::string::npos);

  const std::string dup = error_of("[geometry]\nn = 8\nn = 16\n");
  CHECK(dup.find("line 3") != std::string::npos);

  CHECK_FALSE(error_of("[geometry]\nn = eight\n").empty());
  CHECK_FALSE(error_of("[geometry]\nsides = [0.5, \n").empty());
  CHECK_FALSE(error_of("[geometry]\nkind = \"hexagon\"\n").empty());
}

TEST_CASE("both parameter blocks are rejected naming both") {
  const std::string msg = error_of(R"([geometry]
[physical]
i0 = 1
[dimensionless]
lambda = 0.1
)");
  CHECK(msg.find("[physical]") != std::string::npos);
  CHECK(msg.find("[dimensionless]") != std::string::npos);
}

TEST_CASE("missing geometry is an error") {
  CHECK(error_of("[macro]\ncells = [4, 4]\n").find("geometry") != std::string::npos);
}

TEST_CASE("serialize round-trips") {
  RunConfig c = parse_config_text(R"(
[geometry]
kind = "inclusion"
dim = 3
n = 12
sides = [0.25, 0.5, 0.125]

[dimensionless]
lambda = 0.1
gamma = 0.001
beta_O_bar = 0.3
beta_plus_bar = 0.7

[reaction]
alpha_c = 0.35
Phi_0 = -0.2

[macro]
lengths = [1, 2, 0.5]
cells = [8, 16, 4]
sigma_s = -0.1
sigma_s_linear = [0.1, 0, 0.3]

[solver]
tol_nl = 1e-9
free_energy_sign = "flipped"

[micro]
r_list = [0.5, 0.25]

[output]
dir = "results"
)");
  CHECK(c.geometry.dim == 3);
  CHECK(c.dimensionless->lambda == 0.1);
  CHECK(c.macro.sigma_s(Point{1.0, 0.0, 1.0}) == doctest::Approx(-0.1 + 0.1 + 0.3));
  CHECK(c.output_dir == "results");
  const RunConfig back = parse_config_text(serialize(c));
  CHECK(back == c);
  CHECK(serialize(back) == serialize(c));

  c.dimensionless.reset();
  c.physical = Nondimensionalization{};
  c.physical->i0 = 3.3e-7;
  CHECK(parse_config_text(serialize(c)) == c);
}

TEST_CASE("bitmap paths resolve against the config directory") {
  const RunConfig c = parse_config_text("[geometry]\nkind = \"bitmap\"\nfile = \"block16.pbm\"\n", HOMOG_TEST_DATA);
  const UnitCell cell = build_cell(cell_spec(c, 1.0, 1.0));
  CHECK(cell.n() == 16);
  CHECK(porosity(cell) == doctest::Approx(0.75));

  CHECK_THROWS_AS(parse_config_text("[geometry]\nkind = \"bitmap\"\nfile = \"nope.pbm\"\n", HOMOG_TEST_DATA),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(HOMOG_TEST_DATA "/no_such.toml"), ConfigError);
}
