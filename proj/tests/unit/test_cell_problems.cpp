#include <doctest.h>

#include <cmath>

#include "homog/cell_problems.hpp"
#include "homog/effective_tensors.hpp"
#include "homog/errors.hpp"

using namespace homog;

namespace {

double max_abs(const CorrectorField& f) {
  double m = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    if (f.in_domain[i]) m = std::max(m, std::abs(f.values[i]));
  return m;
}

UnitCell two_slab(int n, double lambda_sq, double gamma) {
  std::vector<Phase> ph(static_cast<std::size_t>(n) * n, Phase::pore);
  for (int j = n / 2; j < n; ++j)
    for (int i = 0; i < n; ++i) ph[static_cast<std::size_t>(i + n * j)] = Phase::solid;
  return UnitCell(2, n, ph, lambda_sq, gamma);
}

}  // namespace

TEST_CASE("all-pore cell has vanishing correctors") {
  const UnitCell c = build_cell({InclusionShape{{0.0}}, 2, 8, 0.5, 0.5});
  const CorrectorSet s = solve_all_correctors(c);
  for (int k = 0; k < 2; ++k) {
    CHECK(max_abs(s.oxygen[k]) <= 1e-9);
    CHECK(max_abs(s.proton[k]) <= 1e-9);
    CHECK(max_abs(s.potential[k]) <= 1e-9);
  }
}

TEST_CASE("layered channel: no correction along the channel") {
  const UnitCell c = build_cell({ChannelShape{0.6}, 2, 10, 1.0, 0.0});
  CHECK(max_abs(solve_corrector_oxygen(c, 0)) <= 1e-9);
  const CorrectorField phi = solve_corrector_potential(c, 0);
  CHECK(max_abs(phi) <= 1e-9);
}

TEST_CASE("two-slab cell: permittivity across the layers is the harmonic mean") {
  const UnitCell c = two_slab(16, 1.0, 2.0);
  const auto coeffs = compute_effective_coefficients(c);
  CHECK(coeffs.eps(1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
  CHECK(coeffs.eps(0, 0) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("proton corrector equals the potential corrector up to its pore mean") {
  // the proton weak form reduces to (grad N_+, grad v)_pore = (grad N_phi, grad v)_pore
  const UnitCell c = build_cell({InclusionShape{{0.5}}, 2, 16, 1.0, 0.3});
  for (int k = 0; k < 2; ++k) {
    const CorrectorField phi = solve_corrector_potential(c, k);
    const CorrectorField plus = solve_corrector_proton(c, k, phi);
    double pore_mean = 0, weight = 0;
    const double h2 = c.h() * c.h();
    for (std::size_t e = 0; e < c.num_voxels(); ++e) {
      if (!c.is_pore(e)) continue;
      const auto ijk = c.coords(e);
      for (int a = 0; a < 4; ++a) {
        const std::size_t node = c.index({ijk[0] + (a & 1), ijk[1] + (a >> 1), 0});
        pore_mean += 0.25 * h2 * phi.values[node];
        weight += 0.25 * h2;
      }
    }
    pore_mean /= weight;
    double diff = 0;
    for (std::size_t i = 0; i < plus.values.size(); ++i)
      if (plus.in_domain[i]) diff = std::max(diff, std::abs(plus.values[i] - (phi.values[i] - pore_mean)));
    CHECK(diff <= 1e-8);
  }
}

TEST_CASE("uniform permittivity: potential and proton correctors vanish") {
  const UnitCell c = build_cell({InclusionShape{{0.5}}, 2, 16, 0.7, 0.7});
  const CorrectorSet s = solve_all_correctors(c);
  for (int k = 0; k < 2; ++k) {
    CHECK(max_abs(s.potential[k]) <= 1e-9);
    CHECK(max_abs(s.proton[k]) <= 1e-9);
    CHECK(max_abs(s.oxygen[k]) > 1e-3);
  }
}

TEST_CASE("zero mean, small weak-form residual and periodic symmetry") {
  const UnitCell c = build_cell({InclusionShape{{0.5}}, 2, 16, 1.0, 0.0});
  const CorrectorSet s = solve_all_correctors(c);
  for (int k = 0; k < 2; ++k) {
    for (const CorrectorField* f : {&s.oxygen[k], &s.proton[k], &s.potential[k]}) {
      CHECK(std::abs(corrector_mean(c, *f)) <= 1e-10 * std::max(1.0, max_abs(*f)));
    }
    CHECK(weak_form_residual(c, s.oxygen[k]) < 1e-9);
    CHECK(weak_form_residual(c, s.potential[k]) < 1e-9);
    CHECK(weak_form_residual(c, s.proton[k], &s.potential[k]) < 1e-9);
  }
  // swapping the axes of a symmetric cell swaps the correctors
  const int n = c.n();
  double diff = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      diff = std::max(diff, std::abs(s.oxygen[0].values[c.index({i, j, 0})] - s.oxygen[1].values[c.index({j, i, 0})]));
  CHECK(diff <= 1e-9);
}

TEST_CASE("corrector errors") {
  const UnitCell c = build_cell({InclusionShape{{0.5}}, 2, 8});
  CHECK_THROWS_AS(solve_corrector_oxygen(c, 2), InvalidArgument);
  CHECK_THROWS_AS(solve_corrector_oxygen(c, -1), InvalidArgument);
  const CorrectorField phi0 = solve_corrector_potential(c, 0);
  CHECK_THROWS_AS(solve_corrector_proton(c, 1, phi0), InvalidArgument);
  CHECK_THROWS_AS(solve_corrector_proton(c, 0, solve_corrector_oxygen(c, 0)), InvalidArgument);
  const UnitCell other = c.with_permittivity(2.0, 1.0);
  CHECK_THROWS_AS(solve_corrector_proton(other, 0, phi0), InvalidArgument);
}

TEST_CASE("thread count does not change the correctors") {
  const UnitCell c = build_cell({InclusionShape{{0.5, 0.25}}, 2, 16, 1.0, 0.1});
  const CorrectorSet a = solve_all_correctors(c, {}, 1);
  const CorrectorSet b = solve_all_correctors(c, {}, 4);
  for (int k = 0; k < 2; ++k) {
    CHECK(a.oxygen[k].values == b.oxygen[k].values);
    CHECK(a.proton[k].values == b.proton[k].values);
    CHECK(a.potential[k].values == b.potential[k].values);
  }
}

TEST_CASE("tensors converge under refinement of an aligned inclusion") {
  double prev = 0, prev_diff = 1e9;
  for (int n : {8, 16, 32}) {
    const double d = compute_effective_coefficients(build_cell({InclusionShape{{0.5}}, 2, n, 1.0, 0.0})).D_O(0, 0);
    if (n > 8) {
      const double diff = std::abs(d - prev);
      CHECK(diff < 1.0 / n);
      CHECK(diff < prev_diff);
      prev_diff = diff;
    }
    prev = d;
  }
}

TEST_CASE("3D inclusion correctors") {
  const UnitCell c = build_cell({InclusionShape{{0.5}}, 3, 8, 1.0, 0.0});
  const auto t = compute_effective_coefficients(c, {}, 2);
  CHECK(t.D_O(0, 0) == doctest::Approx(t.D_O(1, 1)).epsilon(1e-8));
  CHECK(t.D_O(1, 1) == doctest::Approx(t.D_O(2, 2)).epsilon(1e-8));
  CHECK(t.D_O(0, 0) < porosity(c));
  CHECK(t.D_O(0, 0) > 0.5);
}
