#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "homog/errors.hpp"
#include "homog/output.hpp"

using namespace homog;

TEST_CASE("format_double round-trips and rejects non-finite values") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1.0}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(-0.0) == "0");
  CHECK_THROWS_AS(format_double(std::nan("")), IoError);
  CHECK_THROWS_AS(format_double(std::numeric_limits<double>::infinity()), IoError);
}

TEST_CASE("tensors json round-trips") {
  EffectiveCoefficients c;
  c.D_O = Eigen::MatrixXd::Identity(2, 2) * 0.3;
  c.D_O(0, 1) = c.D_O(1, 0) = 1.0 / 7.0;
  c.D_plus = c.M_plus = c.D_O;
  c.eps = 0.01 * c.D_O;
  c.porosity = 0.59375;
  c.Lambda = 2.0;
  c.beta_O_bar = 0.25;
  c.beta_plus_bar = 1e-3;
  const std::string text = tensors_json(c);
  const auto back = parse_tensors_json(text);
  CHECK(back.D_O == c.D_O);
  CHECK(back.eps == c.eps);
  CHECK(back.porosity == c.porosity);
  CHECK(back.beta_plus_bar == c.beta_plus_bar);
  CHECK(tensors_json(back) == text);
  CHECK_THROWS_AS(parse_tensors_json("{\"dim\": 2}"), IoError);
  CHECK_THROWS_AS(parse_tensors_json("not json"), IoError);
}

TEST_CASE("VTK and CSV writers") {
  const BoxGrid g({2.0, 1.0}, {2, 1});
  std::vector<double> f{0, 1, 2, 3, 4, 5};
  const std::string vtk = vtk_structured_points(g, {{"f", &f}}, "test");
  CHECK(vtk.rfind("# vtk DataFile Version 3.0\ntest\nASCII\nDATASET STRUCTURED_POINTS\n", 0) == 0);
  CHECK(vtk.find("DIMENSIONS 3 2 1") != std::string::npos);
  CHECK(vtk.find("SPACING 1 1 1") != std::string::npos);
  CHECK(vtk.find("POINT_DATA 6") != std::string::npos);
  CHECK(vtk.find("SCALARS f double 1") != std::string::npos);

  MacroState s;
  s.grid = g;
  s.C_O = f;
  s.C_plus = f;
  s.Phi = f;
  const std::string csv = state_csv(s);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x1,x2,C_O,C_plus,Phi");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);

  s.Phi[2] = std::nan("");
  CHECK_THROWS_AS(state_csv(s), IoError);

  const std::string log = iteration_log_csv({{0, 1.0, 1.0, 0.5, 0.25, 1.0}, {1, 0.1, 0.1, 0.05, 0.025, 0.5}});
  CHECK(log.rfind("iteration,residual,residual_O,residual_plus,residual_phi,damping\n", 0) == 0);
}
