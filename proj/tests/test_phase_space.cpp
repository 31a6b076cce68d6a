// Copyright 2026 The bosonic-ds Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include <random>

#include "bosonic_ds/fixtures.hpp"
#include "bosonic_ds/phase_space.hpp"

using namespace bosonic_ds;
using Catch::Matchers::WithinAbs;

namespace {

// Laguerre forms: <m|D(alpha)|m> = e^{-x/2} L_m(x), x = |alpha|^2 = |xi|^2 / 2.
double fock_char(int m, double r2) {
  const double x = r2 / 2.0;
  double lag = 0.0;
  switch (m) {
    case 0: lag = 1.0; break;
    case 1: lag = 1.0 - x; break;
    case 2: lag = 1.0 - 2.0 * x + x * x / 2.0; break;
    default: FAIL("no closed form");
  }
  return lag * std::exp(-x / 2.0);
}

RealVector vec2(double a, double b) {
  RealVector v(2);
  v << a, b;
  return v;
}

std::vector<FockOperator> fixtures(const FockSpace& s) {
  return {fock_state(s, 0),
          fock_state(s, 1),
          fock_state(s, 2),
          thermal_state(s, 0.5),
          displaced_vacuum(s, vec2(1.0, 0.0)),
          displaced_vacuum(s, vec2(-0.4, 0.7)),
          mixture({{0.7, fock_state(s, 0)}, {0.3, fock_state(s, 2)}}),
          gaussian_to_fock(GaussianState{vec2(0.2, -0.3), single_mode_squeezer(0.3) * single_mode_squeezer(0.3)}, s)};
}

}  // namespace

TEST_CASE("characteristic function closed forms", "[phase]") {
  const FockSpace s{1, 20};
  const FockOperator vac = fock_state(s, 0), one = fock_state(s, 1), two = fock_state(s, 2);
  CHECK(std::abs(char_function(vac, RealVector::Zero(2)) - 1.0) < 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int t = 0; t < 30; ++t) {
    const RealVector xi = vec2(u(rng), u(rng));
    const double r2 = xi.squaredNorm();
    CHECK(std::abs(char_function(vac, xi) - std::exp(-r2 / 4.0)) < 1e-6);
    CHECK(std::abs(char_function(one, xi) - (1.0 - r2 / 2.0) * std::exp(-r2 / 4.0)) < 1e-5);
    CHECK(std::abs(char_function(two, xi) - fock_char(2, r2)) < 1e-5);
  }

  // Coherent state: chi(xi) = exp(-|xi|^2/4 + i xi . sigma d).
  const RealVector d = vec2(0.6, -0.2);
  const FockOperator coh = displaced_vacuum(s, d);
  const GaussianState g{d, RealMatrix::Identity(2, 2)};
  for (int t = 0; t < 10; ++t) {
    const RealVector xi = vec2(u(rng), u(rng));
    CHECK(std::abs(char_function(coh, xi) - gaussian_char(g, xi)) < 1e-8);
  }
  CHECK_THROWS_AS(char_function(vac, RealVector::Zero(4)), DimensionError);
}

TEST_CASE("gaussian_char of a squeezed state matches the operator side", "[phase]") {
  const FockSpace s{1, 30};
  GaussianState g{vec2(0.3, 0.1), RealMatrix::Zero(2, 2)};
  g.gamma.diagonal() << std::exp(-0.5), std::exp(0.5);
  g.gamma = single_mode_rotation(0.4) * g.gamma * single_mode_rotation(0.4).transpose();
  const FockOperator rho = gaussian_to_fock(g, s);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    const RealVector xi = vec2(u(rng), u(rng));
    CHECK(std::abs(char_function(rho, xi) - gaussian_char(g, xi)) < 1e-6);
  }
}

TEST_CASE("char grid basics", "[phase]") {
  const FockSpace s{1, 14};
  const GridGeometry geom{1, 6.0, 25};
  for (const FockOperator& rho : fixtures(s)) {
    const CharGrid grid = char_grid(rho, geom);
    CHECK(std::abs(grid.values[geom.origin()] - 1.0) < 1e-8);
    for (Index p = 0; p < geom.size(); ++p) {
      const Index mirror = geom.size() - 1 - p;
      CHECK(std::abs(grid.values[mirror] - std::conj(grid.values[p])) < 1e-8);
    }
    for (Index p : {Index(0), Index(17), Index(300)}) CHECK(std::abs(grid.values[p] - char_function(rho, geom.node(p))) < 1e-12);
  }
  const CharGrid narrow = char_grid(fock_state(s, 0), GridGeometry{1, 1.0, 5});
  CHECK(!narrow.warnings.empty());
  // At |xi| = 6 the vacuum still has chi = e^{-9} > 1e-4.
  const CharGrid six = char_grid(fock_state(s, 0), geom);
  CHECK_THAT(six.boundary_max, WithinAbs(std::exp(-9.0), 1e-9));
  CHECK(!six.warnings.empty());
  CHECK(char_grid(fock_state(s, 0), default_geometry(1)).warnings.empty());
  CHECK_THROWS_AS(char_grid(fock_state(s, 0), GridGeometry{1, 6.0, 24}), ValidationError);
  CHECK_THROWS_AS(char_grid(fock_state(s, 0), GridGeometry{2, 6.0, 5}), DimensionError);
}

TEST_CASE("wigner function values", "[phase]") {
  const FockSpace s{1, 14};
  const GridGeometry geom = default_geometry(1);
  REQUIRE(geom.points == 129);
  const WignerGrid w0 = wigner_from_char(char_grid(fock_state(s, 0), geom));
  CHECK_THAT(w0.values[geom.origin()], WithinAbs(1.0 / kPi, 1e-4));
  CHECK(w0.max_imaginary < 1e-6);
  CHECK_THAT(w0.integral, WithinAbs(1.0, 1e-4));

  const WignerGrid w1 = wigner_from_char(char_grid(fock_state(s, 1), geom));
  CHECK_THAT(w1.values[geom.origin()], WithinAbs(-1.0 / kPi, 1e-4));

  // Gaussian with Gamma = 2I: W(0) = 1 / (pi sqrt(det Gamma)).
  const WignerGrid wg = wigner_from_char(char_grid(GaussianState::thermal(1, 0.5), geom));
  CHECK_THAT(wg.values[geom.origin()], WithinAbs(1.0 / (2.0 * kPi), 1e-4));

  // Coherent state peak sits at x = d; grid node (q, p) = (1.0, -0.5).
  const FockOperator coh = displaced_vacuum(s, vec2(1.0, -0.5));
  const WignerGrid wc = wigner_from_char(char_grid(coh, geom));
  const int iq = 64 + 8, ip = 64 - 4;
  CHECK_THAT(wc.values[iq * 129 + ip], WithinAbs(1.0 / kPi, 1e-4));
  // The Wigner function of a coherent state is exp(-|x - d|^2)/pi.
  const RealVector x = geom.node(iq * 129 + ip + 3);
  CHECK_THAT(wc.values[iq * 129 + ip + 3], WithinAbs(std::exp(-(x - vec2(1.0, -0.5)).squaredNorm()) / kPi, 1e-4));

  for (const FockOperator& rho : fixtures(s)) {
    const WignerGrid w = wigner_from_char(char_grid(rho, geom));
    CHECK(w.max_imaginary < 1e-6);
    CHECK_THAT(w.integral, WithinAbs(1.0, 1e-4));
  }
}

TEST_CASE("two-mode wigner of a product state factorises", "[phase]") {
  const FockSpace s{2, 6};
  const GridGeometry geom{2, 5.0, 15};
  const FockOperator rho = tensor(fock_state(FockSpace{1, 6}, 1), fock_state(FockSpace{1, 6}, 0));
  const WignerGrid w = wigner_from_char(char_grid(rho, geom));
  const GridGeometry one{1, 5.0, 15};
  const WignerGrid wa = wigner_from_char(char_grid(fock_state(FockSpace{1, 6}, 1), one));
  const WignerGrid wb = wigner_from_char(char_grid(fock_state(FockSpace{1, 6}, 0), one));
  double worst = 0.0;
  for (Index a = 0; a < one.size(); ++a)
    for (Index b = 0; b < one.size(); ++b)
      worst = std::max(worst, std::abs(w.values[a * one.size() + b] - wa.values[a] * wb.values[b]));
  CHECK(worst < 1e-12);
}

TEST_CASE("parseval distance", "[phase]") {
  const FockSpace s{1, 14};
  const GridGeometry geom{1, 6.0, 97};
  const CharGrid g0 = char_grid(fock_state(s, 0), geom);
  CHECK(parseval_distance(g0, g0) == 0.0);
  CHECK_THAT(parseval_distance(g0, char_grid(fock_state(s, 1), geom)), WithinAbs(2.0, 1e-3));

  const auto fx = fixtures(s);
  for (std::size_t i = 0; i < fx.size(); ++i) {
    for (std::size_t j = i + 1; j < fx.size(); j += 3) {
      const double hs2 = std::pow(hs_norm(ComplexMatrix(fx[i].matrix - fx[j].matrix)), 2);
      const double pd = parseval_distance(char_grid(fx[i], geom), char_grid(fx[j], geom));
      CHECK(std::abs(pd - hs2) <= 1e-3 * (1.0 + hs2));
    }
  }
  CHECK_THROWS_AS(parseval_distance(g0, char_grid(fock_state(s, 0), GridGeometry{1, 5.0, 97})), DimensionError);
}

TEST_CASE("sigma positivity", "[phase]") {
  SigmaPositivityConfig cfg;
  cfg.seed = 4;
  const FockSpace s{1, 14};
  for (const FockOperator& rho : fixtures(s)) {
    const SigmaPositivityReport rep = sigma_positivity_test(char_function_of(rho), 1, cfg);
    CHECK(rep.passed);
    CHECK(rep.min_eigenvalue >= -1e-8);
    CHECK(rep.trials == 200);
  }

  // Gamma = I/4 violates the uncertainty relation.
  const GaussianState bad{RealVector::Zero(2), 0.25 * RealMatrix::Identity(2, 2)};
  SigmaPositivityConfig search = cfg;
  search.search = true;
  const SigmaPositivityReport rep = sigma_positivity_test(char_function_of(bad), 1, search);
  CHECK_FALSE(rep.passed);
  CHECK(rep.trials <= 1000);
  CHECK(rep.min_eigenvalue < -0.01);
  CHECK(sigma_kernel_min_eigenvalue(char_function_of(bad), rep.point_set) == rep.min_eigenvalue);

  // Single point: the 1x1 kernel is chi(0) = 1.
  CHECK_THAT(sigma_kernel_min_eigenvalue(char_function_of(bad), {vec2(0.3, 1.1)}), WithinAbs(1.0, 1e-15));

  // Same seed, same report.
  const SigmaPositivityReport again = sigma_positivity_test(char_function_of(bad), 1, search);
  CHECK(again.min_eigenvalue == rep.min_eigenvalue);
  CHECK(again.trials == rep.trials);

  SigmaPositivityConfig no_seed;
  CHECK_THROWS_AS(sigma_positivity_test(char_function_of(bad), 1, no_seed), ValidationError);
}

TEST_CASE("classical marginals", "[phase]") {
  const FockSpace s{1, 14};
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01(0.0, 1.0);
  const Marginal vac = classical_marginal(char_function_of(fock_state(s, 0)), vec2(0.6, 0.8), 41, 4.0);
  for (std::size_t i = 0; i < vac.t.size(); ++i) CHECK(std::abs(vac.values[i] - std::exp(-vac.t[i] * vac.t[i] / 4.0)) < 1e-8);
  CHECK(std::abs(vac.values[20] - 1.0) < 1e-14);

  const Marginal one = classical_marginal(char_function_of(fock_state(s, 1)), vec2(1.0, 0.0), 41, 4.0);
  for (std::size_t i = 0; i < one.t.size(); ++i) CHECK(std::abs(one.values[i] - fock_char(1, one.t[i] * one.t[i])) < 1e-5);

  for (const FockOperator& rho : fixtures(s)) {
    for (int t = 0; t < 100; ++t) {
      RealVector dir = vec2(n01(rng), n01(rng));
      dir.normalize();
      const Marginal m = classical_marginal(char_function_of(rho), dir, 11, 3.0);
      for (std::size_t i = 0; i < m.t.size(); ++i) {
        CHECK(std::abs(m.values[i]) <= 1.0 + 1e-9);
        CHECK(std::abs(m.values[i] - std::conj(m.values[m.t.size() - 1 - i])) < 1e-10);
      }
    }
  }
  CHECK_THROWS_AS(classical_marginal(char_function_of(fock_state(s, 0)), vec2(1.0, 1.0), 11, 1.0), ValidationError);
}

TEST_CASE("derivative moments", "[phase]") {
  const FockSpace s{1, 14};
  const GaussianState vac = derivative_moments(fock_state(s, 0));
  CHECK(vac.d.cwiseAbs().maxCoeff() < 1e-5);
  CHECK((vac.gamma - RealMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-5);

  const GaussianState coh = derivative_moments(displaced_vacuum(s, vec2(1.0, 0.0)));
  CHECK((coh.d - vec2(1.0, 0.0)).cwiseAbs().maxCoeff() < 1e-5);

  const GaussianState one = derivative_moments(fock_state(s, 1));
  CHECK((one.gamma - 3.0 * RealMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-4);

  for (const FockOperator& rho : fixtures(s)) {
    const GaussianState fd = derivative_moments(rho);
    const MomentTable t = moments(rho, MomentOptions{.estimate_kappa = false});
    CHECK((fd.d - t.d).cwiseAbs().maxCoeff() < 1e-4);
    CHECK((fd.gamma - t.gamma).cwiseAbs().maxCoeff() < 1e-4);
  }

  // Two modes with correlations.
  const FockSpace arm{1, 6};
  const FockOperator u = beam_splitter_unitary(arm, 0.5);
  const FockOperator rho = evolve(u, tensor(fock_state(arm, 1), displaced_vacuum(arm, vec2(0.3, 0.2))));
  const GaussianState fd = derivative_moments(rho);
  const MomentTable t = moments(rho, MomentOptions{.estimate_kappa = false});
  CHECK((fd.d - t.d).cwiseAbs().maxCoeff() < 1e-4);
  CHECK((fd.gamma - t.gamma).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("functional equation residual", "[phase][ds]") {
  const FockSpace s{1, 14};
  const FockOperator g1 = gaussian_to_fock(GaussianState{vec2(0.3, 0.0), RealMatrix::Identity(2, 2)}, s);
  const FockOperator g2 = gaussian_to_fock(GaussianState{vec2(-0.1, 0.4), RealMatrix::Identity(2, 2)}, s);
  for (double theta : {0.3, kPi / 4, 1.2}) {
    const DsResidual r = ds_residual(g1, g2, theta);
    CHECK(r.max_abs <= 1e-6);
    CHECK(r.evaluated + r.excluded == 6561);
  }
  // Exact Gaussian characteristic functions with equal Gamma factorise.
  std::mt19937_64 rng(8);
  const GaussianState a{vec2(0.5, -0.2), random_covariance(1, rng)};
  const GaussianState b{vec2(-0.3, 0.1), a.gamma};
  CHECK(ds_residual(char_function_of(a), char_function_of(b), 1, 0.7).max_abs < 1e-13);
  // Different Gamma does not.
  const GaussianState c{vec2(0.0, 0.0), 2.0 * a.gamma};
  CHECK(ds_residual(char_function_of(a), char_function_of(c), 1, 0.7).max_abs > 1e-3);

  const FockOperator one = fock_state(s, 1);
  CHECK(ds_residual(one, one, kPi / 4).max_abs > 0.05);
  CHECK(ds_residual(one, fock_state(s, 2), 0.0).max_abs < 1e-14);

  DsGeometry wide;
  wide.extent = 5.0;
  const DsResidual r = ds_residual(one, one, kPi / 4, wide);
  CHECK(r.excluded > 0);
  CHECK(!r.warnings.empty());
}
