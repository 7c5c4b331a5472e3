#include <cmath>
#include <doctest.h>

#include <algorithm>

#include "homog/cell_geometry.hpp"
#include "homog/errors.hpp"

using namespace homog;

namespace {

UnitCell channel(double p, int n, int dim = 2) { return build_cell({ChannelShape{p}, dim, n}); }

UnitCell from_rows(const std::vector<std::string>& rows) {
  std::string text;
  for (const auto& r : rows) text += r + "\n";
  return parse_bitmap(text, 1.0, 1.0);
}

}  // namespace

TEST_CASE("layered channel marks round(p n) rows as pore") {
  const UnitCell c = channel(0.6, 10);
  int pore_rows = 0;
  for (int j = 0; j < 10; ++j) {
    const bool row_pore = c.is_pore(c.index({0, j, 0}));
    for (int i = 0; i < 10; ++i) CHECK(c.is_pore(c.index({i, j, 0})) == row_pore);
    pore_rows += row_pore;
  }
  CHECK(pore_rows == 6);
  CHECK(porosity(c) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(interface_measure(c) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("zero-side inclusion is an all-pore cell") {
  const UnitCell c = build_cell({InclusionShape{{0.0}}, 2, 8});
  CHECK_FALSE(c.has_solid());
  CHECK(porosity(c) == 1.0);
  CHECK(interface_measure(c) == 0.0);
}

TEST_CASE("centred half-size block: perimeter 2, porosity 0.75") {
  const UnitCell c = build_cell({InclusionShape{{0.5}}, 2, 32});
  CHECK(porosity(c) == doctest::Approx(0.75));
  CHECK(interface_measure(c) == doctest::Approx(2.0));
  const UnitCell c3 = build_cell({InclusionShape{{0.5}}, 3, 8});
  CHECK(porosity(c3) == doctest::Approx(1 - 0.125));
  CHECK(interface_measure(c3) == doctest::Approx(6 * 0.25));
}

TEST_CASE("bitmap file with an 8x8 solid block") {
  const UnitCell c = build_cell({BitmapShape{HOMOG_TEST_DATA "/block16.pbm"}, 2, 0});
  CHECK(c.n() == 16);
  CHECK(porosity(c) == doctest::Approx(0.75));
  CHECK(interface_measure(c) == doctest::Approx(2.0));
}

TEST_CASE("bitmap rows run top to bottom") {
  const UnitCell c = from_rows({"11", "00"});
  CHECK(c.phase(c.index({0, 1, 0})) == Phase::solid);
  CHECK(c.phase(c.index({0, 0, 0})) == Phase::pore);
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS(from_rows({"101", "01"}), GeometryError);
  CHECK_THROWS_AS(from_rows({"12", "00"}), GeometryError);
  CHECK_THROWS_AS(from_rows({"11", "11"}), GeometryError);
  CHECK_THROWS_AS(channel(0.6, 1), GeometryError);
  CHECK_THROWS_AS(channel(0.01, 10), GeometryError);
  CHECK_THROWS_AS(build_cell({BitmapShape{"/nonexistent/cell.pbm"}, 2, 0}), GeometryError);
  CHECK_THROWS(UnitCell(2, 4, std::vector<Phase>(16, Phase::pore), 0.0, 1.0));
  CHECK_THROWS(UnitCell(2, 4, std::vector<Phase>(16, Phase::pore), 1.0, -1.0));
  CHECK_THROWS(UnitCell(2, 4, std::vector<Phase>(15, Phase::pore), 1.0, 1.0));
}

TEST_CASE("porosity and interface measure are translation and reflection invariant") {
  const std::vector<std::string> rows = {"0000000", "0110000", "0111000", "0000000",
                                         "0000100", "0000000", "0000000"};
  const UnitCell base = from_rows(rows);
  const int n = base.n();
  auto transform = [&](auto map) {
    std::vector<Phase> ph(base.num_voxels());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const auto [ti, tj] = map(i, j);
        ph[base.index({ti, tj, 0})] = base.phase(base.index({i, j, 0}));
      }
    return UnitCell(2, n, ph, 1.0, 1.0);
  };
  const UnitCell shifted = transform([&](int i, int j) { return std::pair{i + 3, j + 5}; });
  const UnitCell swapped = transform([](int i, int j) { return std::pair{j, i}; });
  const UnitCell mirrored = transform([&](int i, int j) { return std::pair{n - 1 - i, j}; });
  for (const UnitCell* c : {&shifted, &swapped, &mirrored}) {
    CHECK(porosity(*c) == porosity(base));
    CHECK(interface_measure(*c) == doctest::Approx(interface_measure(base)));
  }
}

TEST_CASE("refining an aligned primitive keeps porosity and Lambda") {
  for (int n : {10, 20, 40}) {
    CHECK(porosity(channel(0.6, n)) == doctest::Approx(0.6));
    CHECK(interface_measure(channel(0.6, n)) == doctest::Approx(2.0));
  }
  for (int n : {8, 16, 32}) {
    const UnitCell c = build_cell({InclusionShape{{0.5}}, 2, n});
    CHECK(porosity(c) == doctest::Approx(0.75));
    CHECK(interface_measure(c) == doctest::Approx(2.0));
  }
}

TEST_CASE("interface faces wrap periodically") {
  // solid slab in the first row only: its lower face pairs with the top row
  const UnitCell c = from_rows({"0000", "0000", "0000", "1111"});
  const auto faces = interface_faces(c);
  CHECK(faces.size() == 8);
  CHECK(std::all_of(faces.begin(), faces.end(), [](const InterfaceFace& f) { return f.axis == 1; }));
}

TEST_CASE("permittivity and fingerprint") {
  const UnitCell c = build_cell({InclusionShape{{0.5}}, 2, 8, 0.25, 3.0});
  CHECK(c.permittivity(c.index({0, 0, 0})) == 0.25);
  CHECK(c.permittivity(c.index({4, 4, 0})) == 3.0);
  CHECK(c.with_permittivity(0.25, 3.0).fingerprint() == c.fingerprint());
  CHECK(c.with_permittivity(0.25, 2.0).fingerprint() != c.fingerprint());
}

TEST_CASE("Debye length") {
  Nondimensionalization nd;
  nd.eps_pore = 2.0;
  nd.R = 3.0;
  nd.T = 4.0;
  nd.z_plus = 1.0;
  nd.e = 0.5;
  nd.F = 6.0;
  nd.c_bar = 2.0;
  CHECK(nd.debye_length() == doctest::Approx(std::sqrt(24.0 / 12.0)));
}
