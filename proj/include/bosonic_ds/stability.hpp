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

// Beam-splitter stability experiment: output product defect, Gaussification
// distances, stability constants and bounds, and the cross-covariance V.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bosonic_ds/fock.hpp"
#include "bosonic_ds/phase_space.hpp"

namespace bosonic_ds {

/// Value quoted for c1 / kappa at theta = pi/4, n = 1 in the literature
/// figure caption; kept for side-by-side reporting.
inline constexpr double kCaptionC1 = 46.2;

inline void require_nontrivial(double theta) {
  if (is_trivial_splitter(theta)) throw ValidationError("trivial splitter: theta is a multiple of pi/2");
}

/// sqrt((1 + 3 sin 2theta) / sin 2theta)
inline double fig3_curve(double theta) {
  const double s2 = std::sin(2.0 * theta);
  return std::sqrt((1.0 + 3.0 * s2) / s2);
}

inline double stability_c1(double theta, int n, double kappa) {
  const double s2 = std::sin(2.0 * theta);
  return 32.0 * std::sqrt((2.0 / std::pow(kPi, n)) * (1.0 + 3.0 * s2) / s2) * n * n * kappa;
}

/// 8 sqrt(3 / pi^n); c2 = c2_shape * sqrt(lambda Tr Gamma_ab).
inline double stability_c2_shape(int n) { return 8.0 * std::sqrt(3.0 / std::pow(kPi, n)); }

inline double stability_c2(double lambda, double trace_gamma_ab, int n) {
  return stability_c2_shape(n) * std::sqrt(lambda * trace_gamma_ab);
}

inline double stability_c3(double theta, int n, double kappa) {
  return std::sqrt(384.0 * n * n * kappa) / std::abs(std::sin(2.0 * theta));
}

/// c1 eps^{1/3} + c2 / sqrt(ln(1/eps)); vacuous (+inf) for eps >= 1.
inline double stability_bound1(double c1, double c2, double eps) {
  if (!(eps < 1.0)) return std::numeric_limits<double>::infinity();
  if (eps <= 0.0) return 0.0;
  return c1 * std::cbrt(eps) + c2 / std::sqrt(std::log(1.0 / eps));
}

inline double stability_bound2(double c3, double eps) { return c3 * std::sqrt(std::max(0.0, eps)); }

struct RegionRadius {
  double r = 0.0;
  double floor = 0.0;  // quoted lower bound 12 eps^{1/12} on |chi| inside the ball
};

/// r = sqrt((1/lambda) log2(1/eps^{1/12})).
inline RegionRadius region_radius(double lambda, double eps) {
  if (!(lambda > 0.0)) throw ValidationError("region_radius: lambda must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("region_radius: epsilon must lie in (0, 1)");
  return {std::sqrt(std::log2(1.0 / std::pow(eps, 1.0 / 12.0)) / lambda), 12.0 * std::pow(eps, 1.0 / 12.0)};
}

/// Closed-form bound on |F(xi)|: n^2 kappa |xi|^4 eps^{2/3} / (2 tan^2 theta).
inline double f_bound(double theta, int n, double kappa, double eps, double xi_norm) {
  require_nontrivial(theta);
  const double t = std::tan(theta);
  return n * n * kappa * std::pow(xi_norm, 4) * std::pow(eps, 2.0 / 3.0) / (2.0 * t * t);
}

struct ConstantsRow {
  double theta = 0.0;
  double curve = 0.0;
  double c1 = 0.0;
  double c2_shape = 0.0;
  double c3 = 0.0;
};

inline std::vector<ConstantsRow> constants_sweep(const std::vector<double>& thetas, int n, double kappa) {
  std::vector<ConstantsRow> rows;
  for (double th : thetas) {
    if (!(th > 0.0 && th < kPi / 2)) throw ValidationError("constants_sweep: theta must lie in (0, pi/2)");
    rows.push_back({th, fig3_curve(th), stability_c1(th, n, kappa), stability_c2_shape(n), stability_c3(th, n, kappa)});
  }
  return rows;
}

inline std::vector<double> theta_grid(double lo, double hi, int steps) {
  if (steps < 1) throw ValidationError("theta grid: steps must be at least 1");
  std::vector<double> out;
  if (steps == 1) return {lo};
  for (int i = 0; i < steps; ++i) out.push_back(lo + (hi - lo) * i / (steps - 1));
  return out;
}

// ---------------------------------------------------------------------------
// Output-state quantities

/// ||rho_ab - rho_a (x) rho_b||_1 and the pieces it is built from.
struct ProductDefect {
  FockOperator rho_a, rho_b;
  ComplexMatrix g;
  double epsilon = 0.0;
};

inline ProductDefect product_defect(const FockOperator& rho_ab) {
  ProductDefect out{partial_trace(rho_ab, Arm::first), partial_trace(rho_ab, Arm::second), {}, 0.0};
  out.g = rho_ab.matrix - tensor(out.rho_a, out.rho_b).matrix;
  out.epsilon = trace_norm(out.g);
  return out;
}

/// Largest photon population of rho1 (x) rho2 in pair sectors n_1j + n_2j >= D,
/// which the truncated beam splitter cannot represent.
inline double splitter_leak(const FockOperator& rho1, const FockOperator& rho2) {
  const FockSpace& s = rho1.space;
  const int n = s.modes, d = s.cutoff;
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    RealVector p1 = RealVector::Zero(d), p2 = RealVector::Zero(d);
    for (Index i = 0; i < s.dim(); ++i) {
      p1(s.level(i, j)) += rho1.matrix(i, i).real();
      p2(s.level(i, j)) += rho2.matrix(i, i).real();
    }
    double leak = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = d - a; b < d; ++b) leak += p1(a) * p2(b);
    worst = std::max(worst, leak);
  }
  return worst;
}

/// Tr[g R_{1k} R_{2l}] for a Hermitian operator g on 2n modes.
inline ComplexMatrix cross_moments(const ComplexMatrix& g, const FockSpace& space) {
  const int n = space.modes / 2;
  const PaddedAlgebra alg(space, 2);
  const SpectralRows sr = spectral_rows(g);
  const ComplexMatrix rows = alg.lift(sr.rows);
  std::vector<ComplexMatrix> y1(2 * n), y2(2 * n);
  for (int k = 0; k < 2 * n; ++k) {
    y1[k] = alg.times_quadrature(rows, k);
    y2[k] = alg.times_quadrature(rows, 2 * n + k);
  }
  ComplexMatrix m(2 * n, 2 * n);
  for (int k = 0; k < 2 * n; ++k) {
    for (int l = 0; l < 2 * n; ++l) {
      // sum_i w_i (v_i^dag R_1k)(R_2l v_i)
      Complex acc = 0.0;
      for (Index i = 0; i < sr.weights.size(); ++i) acc += sr.weights(i) * y2[l].row(i).dot(y1[k].row(i));
      m(k, l) = acc;
    }
  }
  return m;
}

struct CrossCovariance {
  ComplexMatrix v;
  double norm = 0.0;   // Frobenius
  double bound = 0.0;  // sqrt(24 n^2 kappa eps) / |tan theta|
  bool within = true;
};

/// V = sigma (Tr[g R_1 R_2^T]) sigma^T / tan theta with g = rho_ab - rho_a (x) rho_b.
inline CrossCovariance cross_covariance_V(const FockOperator& rho_ab, const FockOperator& rho_a,
                                          const FockOperator& rho_b, double theta,
                                          std::optional<double> kappa = std::nullopt) {
  require_nontrivial(theta);
  if (rho_ab.space.modes % 2 != 0) throw DimensionError("cross_covariance_V: output needs two arms");
  const int n = rho_ab.space.modes / 2;
  const ComplexMatrix g = rho_ab.matrix - tensor(rho_a, rho_b).matrix;
  const RealMatrix sigma = symplectic_form(n);
  CrossCovariance out;
  out.v = sigma.cast<Complex>() * cross_moments(g, rho_ab.space) * sigma.transpose().cast<Complex>() / std::tan(theta);
  out.norm = out.v.norm();
  const double k = kappa ? *kappa : moments(rho_ab).kappa;
  out.bound = std::sqrt(24.0 * n * n * k * trace_norm(g)) / std::abs(std::tan(theta));
  out.within = out.norm <= out.bound * (1.0 + 1e-12) + 1e-14;
  return out;
}

// ---------------------------------------------------------------------------
// Experiment

struct ExperimentConfig {
  int synthesis_cutoff = 0;  // 0: chosen from the Gaussified photon statistics
  int max_synthesis_cutoff = 60;
  MomentOptions moment_options{};
  SynthesisConfig synthesis{};
  Tolerances tolerances{};
  bool compute_ds_residual = true;
  DsGeometry ds_geometry{};
  double margin_slack = 1e-6;  // allowance for synthesis error when checking margins
};

struct StabilityReport {
  double theta = 0.0;
  int n = 1;
  int cutoff = 0;
  int synthesis_cutoff = 0;
  double epsilon = 0.0;
  double epsilon_3x = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  int kappa_evaluations = 0;
  double trace_gamma_ab = 0.0;
  std::optional<RegionRadius> region;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double c1_caption = kCaptionC1;
  GaussianState gauss1, gauss2;
  double dist_hs_1 = 0.0, dist_hs_2 = 0.0;
  double cm_gap = 0.0;
  double bound1 = 0.0, bound2 = 0.0;
  ComplexMatrix v;
  double v_norm = 0.0, v_bound = 0.0;
  double identity_residual = 0.0;          // |sigma (G1 - G2) sigma^T - (2/cos^2) V|_max
  double identity_residual_literal = 0.0;  // |(G1 - G2) - (2/cos^2) V|_max
  double identity_tolerance = 0.0;         // 1e-4 (1 + ||Gamma_1||)
  double margin_dist_1 = 0.0, margin_dist_2 = 0.0, margin_cm = 0.0, margin_v = 0.0;
  std::optional<double> ds_max;
  Index ds_excluded = 0;
  double splitter_leak = 0.0;
  std::vector<std::string> truncation_flags;
  std::vector<std::string> violations;
  ExperimentConfig config;

  bool ok() const { return violations.empty(); }
};

namespace detail {

/// Cutoff at which a Gaussian with these moments leaves less than ~1e-9 per
/// mode above the top level, using a geometric tail in n / (1 + n).
inline int synthesis_cutoff_for(const GaussianState& g, int at_least, int at_most) {
  double nbar = 0.0;
  for (int j = 0; j < g.modes(); ++j) {
    const double nj = (g.gamma(2 * j, 2 * j) + g.gamma(2 * j + 1, 2 * j + 1)) / 4.0 - 0.5 +
                      0.5 * g.d.segment(2 * j, 2).squaredNorm();
    nbar = std::max(nbar, nj);
  }
  if (nbar <= 1e-12) return at_least;
  const double q = nbar / (1.0 + nbar);
  const int need = static_cast<int>(std::ceil(2.0 * std::log(1e-9) / std::log(q))) + 4;
  return std::clamp(need, at_least, std::max(at_least, at_most));
}

inline double op_norm(const RealMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Full pipeline for input states rho1, rho2 on one arm each. Inputs are not
/// displaced to zero mean: every reported distance is invariant under local
/// displacements and shifting a truncated state would add truncation error.
inline StabilityReport run_experiment(const FockOperator& rho1, const FockOperator& rho2, double theta,
                                      const ExperimentConfig& cfg = {}) {
  require_nontrivial(theta);
  const Tolerances& tol = cfg.tolerances;
  if (!(rho1.space == rho2.space)) throw DimensionError("run_experiment: input states live on different spaces");
  validate_density(rho1, tol);
  validate_density(rho2, tol);
  const FockSpace& arm = rho1.space;
  const int n = arm.modes;

  StabilityReport rep;
  rep.theta = theta;
  rep.n = n;
  rep.cutoff = arm.cutoff;
  rep.config = cfg;
  rep.splitter_leak = splitter_leak(rho1, rho2);
  if (rep.splitter_leak > tol.leak_budget) {
    throw TruncationError("run_experiment: input population in photon-number sectors beyond the cutoff is " +
                          std::to_string(rep.splitter_leak) + "; raise the cutoff");
  }
  for (const FockOperator* r : {&rho1, &rho2})
    for (const auto& w : r->warnings) add_warning(rep.truncation_flags, w);

  const FockOperator u = beam_splitter_unitary(arm, theta);
  const FockOperator rho_ab = evolve(u, tensor(rho1, rho2));
  const ProductDefect pd = product_defect(rho_ab);
  rep.epsilon = pd.epsilon;
  rep.epsilon_3x = 3.0 * pd.epsilon;

  const MomentTable out_moments = moments(rho_ab, cfg.moment_options);
  rep.kappa = out_moments.kappa;
  rep.kappa_evaluations = out_moments.kappa_evaluations;
  rep.trace_gamma_ab = out_moments.gamma.trace();

  rep.gauss1 = gaussify(rho1, tol);
  rep.gauss2 = gaussify(rho2, tol);
  rep.lambda = 0.5 * std::max(detail::op_norm(rep.gauss1.gamma), detail::op_norm(rep.gauss2.gamma));
  if (rep.epsilon > 0.0 && rep.epsilon < 1.0) rep.region = region_radius(rep.lambda, rep.epsilon);

  rep.synthesis_cutoff = cfg.synthesis_cutoff > 0
                             ? std::max(cfg.synthesis_cutoff, arm.cutoff)
                             : std::max(detail::synthesis_cutoff_for(rep.gauss1, arm.cutoff, cfg.max_synthesis_cutoff),
                                        detail::synthesis_cutoff_for(rep.gauss2, arm.cutoff, cfg.max_synthesis_cutoff));
  const FockSpace big{n, rep.synthesis_cutoff};
  const FockOperator g1 = gaussian_to_fock(rep.gauss1, big, cfg.synthesis, tol);
  const FockOperator g2 = gaussian_to_fock(rep.gauss2, big, cfg.synthesis, tol);
  for (const FockOperator* r : {&g1, &g2})
    for (const auto& w : r->warnings) add_warning(rep.truncation_flags, "gaussified state: " + w);
  rep.dist_hs_1 = hs_norm(ComplexMatrix(embed_cutoff(rho1, big.cutoff).matrix - g1.matrix));
  rep.dist_hs_2 = hs_norm(ComplexMatrix(embed_cutoff(rho2, big.cutoff).matrix - g2.matrix));
  rep.cm_gap = (rep.gauss1.gamma - rep.gauss2.gamma).norm();

  rep.c1 = stability_c1(theta, n, rep.kappa);
  rep.c2 = stability_c2(rep.lambda, rep.trace_gamma_ab, n);
  rep.c3 = stability_c3(theta, n, rep.kappa);
  rep.bound1 = stability_bound1(rep.c1, rep.c2, rep.epsilon);
  rep.bound2 = stability_bound2(rep.c3, rep.epsilon);

  const CrossCovariance cv = cross_covariance_V(rho_ab, pd.rho_a, pd.rho_b, theta, rep.kappa);
  rep.v = cv.v;
  rep.v_norm = cv.norm;
  rep.v_bound = cv.bound;
  const RealMatrix sigma = symplectic_form(n);
  const RealMatrix scaled_v = (2.0 / std::pow(std::cos(theta), 2)) * cv.v.real();
  const RealMatrix diff = rep.gauss1.gamma - rep.gauss2.gamma;
  rep.identity_residual = max_abs(RealMatrix(sigma * diff * sigma.transpose() - scaled_v));
  rep.identity_residual_literal = max_abs(RealMatrix(diff - scaled_v));
  rep.identity_tolerance = 1e-4 * (1.0 + detail::op_norm(rep.gauss1.gamma));

  rep.margin_dist_1 = rep.bound1 - rep.dist_hs_1;
  rep.margin_dist_2 = rep.bound1 - rep.dist_hs_2;
  rep.margin_cm = rep.bound2 - rep.cm_gap;
  rep.margin_v = rep.v_bound - rep.v_norm;

  if (cfg.compute_ds_residual) {
    const DsResidual ds = ds_residual(rho1, rho2, theta, cfg.ds_geometry);
    rep.ds_max = ds.max_abs;
    rep.ds_excluded = ds.excluded;
  }

  // Invariant checks.
  const bool guaranteed = rep.epsilon < 1.0 && rep.truncation_flags.empty();
  const double slack = cfg.margin_slack;
  if (guaranteed) {
    if (rep.margin_dist_1 < -slack) rep.violations.push_back("bound1 margin negative for input 1");
    if (rep.margin_dist_2 < -slack) rep.violations.push_back("bound1 margin negative for input 2");
    if (rep.margin_cm < -slack) rep.violations.push_back("bound2 margin negative");
  }
  if (rep.margin_v < -slack) rep.violations.push_back("cross-covariance norm exceeds its bound");
  if (rep.identity_residual > rep.identity_tolerance) {
    rep.violations.push_back("covariance identity residual above tolerance");
  }
  return rep;
}

struct WitnessResult {
  double epsilon = 0.0;
  bool gaussian = false;
  std::vector<std::string> truncation_flags;
};

/// Product defect of rho (x) rho after the splitter; zero for Gaussian input.
inline WitnessResult nongaussianity_witness(const FockOperator& rho, double theta, double threshold = 1e-5,
                                            const Tolerances& tol = {}) {
  require_nontrivial(theta);
  validate_density(rho, tol);
  WitnessResult out;
  out.truncation_flags = rho.warnings;
  const double leak = splitter_leak(rho, rho);
  if (leak > tol.leak_budget) add_warning(out.truncation_flags, "splitter sector leak above budget");
  const FockOperator rho_ab = evolve(beam_splitter_unitary(rho.space, theta), tensor(rho, rho));
  out.epsilon = product_defect(rho_ab).epsilon;
  out.gaussian = out.epsilon <= threshold;
  return out;
}

}  // namespace bosonic_ds
