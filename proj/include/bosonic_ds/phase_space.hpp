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

// Characteristic functions chi(xi) = Tr[W_xi rho] and what can be computed
// from them: grids, Wigner functions, Parseval distances, sigma-positivity
// falsification, marginals, derivative moments and the functional-equation
// residual of the beam splitter.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bosonic_ds/fock.hpp"

namespace bosonic_ds {

using CharFunction = std::function<Complex(const RealVector&)>;

inline Complex char_function(const FockOperator& rho, const RealVector& xi) {
  const FockSpace& s = rho.space;
  if (xi.size() != 2 * s.modes) throw DimensionError("char_function: xi must have 2n entries");
  ComplexMatrix w = ComplexMatrix::Identity(1, 1);
  for (int j = 0; j < s.modes; ++j) {
    const ComplexMatrix dj = displacement_matrix(s.cutoff, weyl_amplitude(xi(2 * j), xi(2 * j + 1)));
    w = s.modes == 1 ? dj : kron(w, dj);
  }
  // Tr[W rho] = sum_ij W_ij rho_ji
  return w.cwiseProduct(rho.matrix.transpose()).sum();
}

inline CharFunction char_function_of(const FockOperator& rho) {
  return [rho](const RealVector& xi) { return char_function(rho, xi); };
}

inline CharFunction char_function_of(const GaussianState& g) {
  return [g](const RealVector& xi) { return gaussian_char(g, xi); };
}

// ---------------------------------------------------------------------------
// Grids

enum class GridSource { fock, gaussian, product_combination };

inline const char* to_string(GridSource s) {
  switch (s) {
    case GridSource::fock: return "fock";
    case GridSource::gaussian: return "gaussian";
    default: return "product-combination";
  }
}

/// Cubic grid of `points` nodes per axis on [-extent, extent]^{2n}.
struct GridGeometry {
  int modes = 1;
  double extent = 6.0;
  int points = 97;

  void validate() const {
    if (modes < 1) throw DimensionError("grid: need at least one mode");
    if (points < 3 || points % 2 == 0) throw ValidationError("grid: points per axis must be odd and >= 3");
    if (!(extent > 0.0)) throw ValidationError("grid: extent must be positive");
  }
  int axes() const { return 2 * modes; }
  double spacing() const { return 2.0 * extent / (points - 1); }
  double coordinate(int i) const { return -extent + i * spacing(); }
  Index size() const {
    Index t = 1;
    for (int k = 0; k < axes(); ++k) t *= points;
    return t;
  }
  /// Node coordinates; axis 0 varies slowest.
  RealVector node(Index flat) const {
    RealVector x(axes());
    for (int k = axes() - 1; k >= 0; --k) {
      x(k) = coordinate(static_cast<int>(flat % points));
      flat /= points;
    }
    return x;
  }
  Index origin() const { return (size() - 1) / 2; }
  bool operator==(const GridGeometry&) const = default;
};

/// Default geometry: the vacuum chi = exp(-|xi|^2/4) is about 1e-7 at
/// |xi| = 8; the extent scales with sqrt(||Gamma||) and the spacing stays 1/8.
inline GridGeometry default_geometry(int modes, double gamma_norm = 1.0) {
  const double extent = 8.0 * std::sqrt(std::max(1.0, gamma_norm));
  if (modes > 1) return {modes, extent, 15};
  return {modes, extent, 2 * static_cast<int>(std::ceil(extent * 8.0)) + 1};
}

struct CharGrid {
  GridGeometry geometry;
  std::vector<Complex> values;
  GridSource source = GridSource::fock;
  double boundary_max = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline bool on_boundary(const GridGeometry& g, Index flat) {
  for (int k = 0; k < g.axes(); ++k) {
    const Index i = flat % g.points;
    if (i == 0 || i == g.points - 1) return true;
    flat /= g.points;
  }
  return false;
}

inline void finish_grid(CharGrid& grid, const Tolerances& tol) {
  for (Index p = 0; p < grid.geometry.size(); ++p) {
    if (detail::on_boundary(grid.geometry, p)) grid.boundary_max = std::max(grid.boundary_max, std::abs(grid.values[p]));
  }
  if (grid.boundary_max > tol.grid_boundary) add_warning(grid.warnings, "characteristic function not decayed at grid boundary");
}

}  // namespace detail

inline CharGrid char_grid(const CharFunction& chi, const GridGeometry& geom, GridSource source,
                          const Tolerances& tol = {}) {
  geom.validate();
  CharGrid grid{geom, std::vector<Complex>(geom.size()), source, 0.0, {}};
  parallel_for(static_cast<std::size_t>(geom.size()), [&](std::size_t p) { grid.values[p] = chi(geom.node(p)); });
  detail::finish_grid(grid, tol);
  return grid;
}

inline CharGrid char_grid(const FockOperator& rho, const GridGeometry& geom, const Tolerances& tol = {}) {
  if (geom.modes != rho.space.modes) throw DimensionError("char_grid: geometry and state mode counts differ");
  return char_grid(char_function_of(rho), geom, GridSource::fock, tol);
}

inline CharGrid char_grid(const GaussianState& g, const GridGeometry& geom, const Tolerances& tol = {}) {
  if (geom.modes != g.modes()) throw DimensionError("char_grid: geometry and state mode counts differ");
  return char_grid(char_function_of(g), geom, GridSource::gaussian, tol);
}

// ---------------------------------------------------------------------------
// Wigner function and Parseval

struct WignerGrid {
  GridGeometry geometry;     // x nodes use the same coordinates as the chi grid
  std::vector<double> values;
  double max_imaginary = 0.0;
  double integral = 0.0;
};

/// W(x) = (2 pi)^{-2n} int chi(xi) exp(-i xi . sigma x) d xi by the
/// trapezoidal rule, evaluated on the grid nodes one axis at a time.
inline WignerGrid wigner_from_char(const CharGrid& grid) {
  const GridGeometry& g = grid.geometry;
  const int axes = g.axes();
  const int np = g.points;
  const double h = g.spacing();
  // xi . sigma x = sum_j (xi_qj x_pj - xi_pj x_qj): axis k of xi pairs with
  // axis partner(k) of x with sign +1 (q) or -1 (p).
  std::vector<Complex> work = grid.values;
  std::vector<Complex> next(work.size());
  std::vector<Index> stride(axes);
  {
    Index s = 1;
    for (int k = axes - 1; k >= 0; --k) {
      stride[k] = s;
      s *= np;
    }
  }
  for (int k = 0; k < axes; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    ComplexMatrix kernel(np, np);  // kernel(out_x, in_xi)
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < np; ++b) kernel(a, b) = std::exp(Complex(0.0, -sign * g.coordinate(b) * g.coordinate(a))) * h;
    // Transform along axis k; the output index is stored on axis k and
    // relabelled to the partner axis at the end.
    std::fill(next.begin(), next.end(), Complex(0.0));
    const Index sk = stride[k];
    parallel_for(static_cast<std::size_t>(work.size() / np), [&](std::size_t line) {
      const Index low = static_cast<Index>(line) % sk;
      const Index high = static_cast<Index>(line) / sk;
      const Index base = high * sk * np + low;
      for (int a = 0; a < np; ++a) {
        Complex acc = 0.0;
        for (int b = 0; b < np; ++b) acc += kernel(a, b) * work[base + b * sk];
        next[base + a * sk] = acc;
      }
    });
    std::swap(work, next);
  }
  // Swap q and p axes of each mode: the transform along xi_q produced x_p.
  WignerGrid out{g, std::vector<double>(work.size()), 0.0, 0.0};
  const double norm = 1.0 / std::pow(2.0 * kPi, axes);
  std::vector<int> idx(axes);
  for (Index p = 0; p < static_cast<Index>(work.size()); ++p) {
    Index rem = p;
    for (int k = axes - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(rem % np);
      rem /= np;
    }
    Index q = 0;
    for (int k = 0; k < axes; ++k) q += idx[k ^ 1] * stride[k];
    const Complex v = work[p] * norm;
    out.values[q] = v.real();
    out.max_imaginary = std::max(out.max_imaginary, std::abs(v.imag()));
  }
  double total = 0.0;
  for (double v : out.values) total += v;
  out.integral = total * std::pow(h, axes);
  return out;
}

/// (2 pi)^{-n} int |chi_1 - chi_2|^2, which equals ||rho_1 - rho_2||_2^2.
inline double parseval_distance(const CharGrid& a, const CharGrid& b) {
  if (!(a.geometry == b.geometry)) throw DimensionError("parseval_distance: grid geometries differ");
  std::vector<double> terms(a.values.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = std::norm(a.values[i] - b.values[i]);
  const double h = a.geometry.spacing();
  return pairwise_sum(std::span<const double>(terms)) * std::pow(h, a.geometry.axes()) /
         std::pow(2.0 * kPi, a.geometry.modes);
}

// ---------------------------------------------------------------------------
// sigma-positivity

/// Falsification only: passing every sampled set does not certify that chi
/// belongs to a state.
struct SigmaPositivityConfig {
  std::vector<int> set_sizes{2, 4, 8};
  int sets = 200;
  double range = 2.0;          // coordinates uniform in [-range, range]
  std::optional<std::uint64_t> seed;
  bool search = false;          // randomized restarts with local perturbation
  int max_trials = 1000;        // kernel evaluations in search mode
  double step = 0.3;
  int patience = 20;            // non-improving steps before a restart
};

struct SigmaPositivityReport {
  std::vector<RealVector> point_set;  // worst set found
  double min_eigenvalue = 0.0;
  bool passed = true;
  int trials = 0;
};

inline ComplexMatrix sigma_kernel(const CharFunction& chi, const std::vector<RealVector>& pts) {
  const Index m = static_cast<Index>(pts.size());
  const RealMatrix sigma = symplectic_form(static_cast<int>(pts.front().size() / 2));
  ComplexMatrix k(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = a; b < m; ++b) {
      const Complex v = chi(RealVector(pts[a] - pts[b])) * std::exp(Complex(0.0, 0.5 * pts[a].dot(sigma * pts[b])));
      k(a, b) = v;
      k(b, a) = std::conj(v);
    }
  }
  return k;
}

inline double sigma_kernel_min_eigenvalue(const CharFunction& chi, const std::vector<RealVector>& pts) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sigma_kernel(chi, pts), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline SigmaPositivityReport sigma_positivity_test(const CharFunction& chi, int modes, const SigmaPositivityConfig& cfg,
                                                   const Tolerances& tol = {}) {
  if (!cfg.seed) throw ValidationError("sigma_positivity_test: a seed is required");
  if (cfg.set_sizes.empty()) throw ValidationError("sigma_positivity_test: no set sizes");
  std::mt19937_64 rng(*cfg.seed);
  std::uniform_real_distribution<double> coord(-cfg.range, cfg.range);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int dim = 2 * modes;
  auto random_set = [&](int m) {
    std::vector<RealVector> pts(m, RealVector(dim));
    for (auto& p : pts)
      for (int k = 0; k < dim; ++k) p(k) = coord(rng);
    return pts;
  };

  SigmaPositivityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  auto record = [&](const std::vector<RealVector>& pts, double v) {
    ++rep.trials;
    if (v < rep.min_eigenvalue) {
      rep.min_eigenvalue = v;
      rep.point_set = pts;
    }
  };

  if (!cfg.search) {
    for (int s = 0; s < cfg.sets; ++s) {
      const int m = cfg.set_sizes[s % cfg.set_sizes.size()];
      auto pts = random_set(m);
      record(pts, sigma_kernel_min_eigenvalue(chi, pts));
    }
  } else {
    int size_slot = 0;
    while (rep.trials < cfg.max_trials && rep.min_eigenvalue >= -tol.sigma_psd) {
      const int m = cfg.set_sizes[size_slot++ % cfg.set_sizes.size()];
      auto cur = random_set(m);
      double cur_v = sigma_kernel_min_eigenvalue(chi, cur);
      record(cur, cur_v);
      int stale = 0;
      while (stale < cfg.patience && rep.trials < cfg.max_trials && rep.min_eigenvalue >= -tol.sigma_psd) {
        auto cand = cur;
        for (auto& p : cand)
          for (int k = 0; k < dim; ++k) p(k) += cfg.step * normal(rng);
        const double v = sigma_kernel_min_eigenvalue(chi, cand);
        record(cand, v);
        if (v < cur_v) {
          cur = std::move(cand);
          cur_v = v;
          stale = 0;
        } else {
          ++stale;
        }
      }
    }
  }
  rep.passed = rep.min_eigenvalue >= -tol.sigma_psd;
  return rep;
}

// ---------------------------------------------------------------------------
// Marginals and derivative moments

struct Marginal {
  std::vector<double> t;
  std::vector<Complex> values;
};

/// t -> chi(t u) for t on a symmetric grid of `samples` points in [-t_max, t_max].
inline Marginal classical_marginal(const CharFunction& chi, const RealVector& direction, int samples, double t_max) {
  if (std::abs(direction.norm() - 1.0) > 1e-12) throw ValidationError("classical_marginal: direction must be a unit vector");
  if (samples < 2) throw ValidationError("classical_marginal: need at least two samples");
  Marginal out;
  for (int i = 0; i < samples; ++i) {
    const double t = -t_max + 2.0 * t_max * i / (samples - 1);
    out.t.push_back(t);
    out.values.push_back(chi(RealVector(t * direction)));
  }
  return out;
}

/// (d, Gamma) from central differences of chi at the origin with steps 1e-2
/// and 1e-3, Richardson-combined. Uses grad chi(0) = i sigma d and
/// Hess chi(0) = -sigma (Gamma/2 + d d^T) sigma^T.
inline GaussianState derivative_moments(const CharFunction& chi, int modes) {
  const int dim = 2 * modes;
  auto estimate = [&](double h, RealVector& grad, RealMatrix& hess) {
    grad.resize(dim);
    hess.resize(dim, dim);
    const Complex c0 = chi(RealVector::Zero(dim));
    for (int k = 0; k < dim; ++k) {
      const RealVector e = h * RealVector::Unit(dim, k);
      const Complex plus = chi(e), minus = chi(RealVector(-e));
      grad(k) = ((plus - minus) / (2.0 * h)).imag();
      hess(k, k) = ((plus - 2.0 * c0 + minus) / (h * h)).real();
    }
    for (int k = 0; k < dim; ++k) {
      for (int l = k + 1; l < dim; ++l) {
        const RealVector ek = h * RealVector::Unit(dim, k), el = h * RealVector::Unit(dim, l);
        const Complex v = chi(RealVector(ek + el)) - chi(RealVector(ek - el)) - chi(RealVector(el - ek)) +
                          chi(RealVector(-ek - el));
        hess(k, l) = hess(l, k) = (v / (4.0 * h * h)).real();
      }
    }
  };
  RealVector g1, g2;
  RealMatrix h1, h2;
  estimate(1e-2, g1, h1);
  estimate(1e-3, g2, h2);
  const RealVector grad = (100.0 * g2 - g1) / 99.0;
  const RealMatrix hess = (100.0 * h2 - h1) / 99.0;
  const RealMatrix sigma = symplectic_form(modes);
  GaussianState out;
  out.d = sigma.transpose() * grad;
  out.gamma = 2.0 * (-(sigma.transpose() * hess * sigma) - out.d * out.d.transpose());
  out.gamma = 0.5 * (out.gamma + out.gamma.transpose()).eval();
  return out;
}

inline GaussianState derivative_moments(const FockOperator& rho) {
  return derivative_moments(char_function_of(rho), rho.space.modes);
}

// ---------------------------------------------------------------------------
// Functional-equation residual

/// Box [-extent, extent]^{4n} for (eta_1, eta_2) with `points` nodes per
/// axis. Nodes where some chi argument has norm above chi_extent are skipped
/// and counted.
struct DsGeometry {
  double extent = 3.0;
  int points = 9;
  double chi_extent = 6.0;
};

struct DsResidual {
  double max_abs = 0.0;
  RealVector argmax;            // (eta_1, eta_2) of the largest |G|
  std::vector<Complex> values;  // G on the box, excluded nodes set to 0
  Index evaluated = 0;
  Index excluded = 0;
  std::vector<std::string> warnings;
};

/// G(eta_1, eta_2) = chi_1(c eta_1 + s eta_2) chi_2(c eta_2 - s eta_1)
///                 - chi_1(c eta_1) chi_1(s eta_2) chi_2(c eta_2) chi_2(-s eta_1).
inline DsResidual ds_residual(const CharFunction& chi1, const CharFunction& chi2, int modes, double theta,
                              const DsGeometry& geom = {}) {
  if (geom.points < 1) throw ValidationError("ds_residual: need at least one point per axis");
  const int dim = 2 * modes;
  const GridGeometry box{2 * modes, geom.extent, geom.points};
  if (geom.points > 1) box.validate();
  const double c = std::cos(theta), s = std::sin(theta);
  DsResidual out;
  out.values.assign(box.size(), Complex(0.0));
  std::vector<char> skipped(box.size(), 0);
  parallel_for(static_cast<std::size_t>(box.size()), [&](std::size_t p) {
    const RealVector z = geom.points > 1 ? box.node(p) : RealVector::Zero(2 * dim);
    const RealVector e1 = z.head(dim), e2 = z.tail(dim);
    const RealVector args[6] = {c * e1 + s * e2, c * e2 - s * e1, c * e1, s * e2, c * e2, -s * e1};
    for (const auto& a : args) {
      if (a.norm() > geom.chi_extent) {
        skipped[p] = 1;
        return;
      }
    }
    out.values[p] = chi1(args[0]) * chi2(args[1]) - chi1(args[2]) * chi1(args[3]) * chi2(args[4]) * chi2(args[5]);
  });
  for (Index p = 0; p < box.size(); ++p) {
    if (skipped[p]) {
      ++out.excluded;
      continue;
    }
    ++out.evaluated;
    const double v = std::abs(out.values[p]);
    if (v > out.max_abs || out.argmax.size() == 0) {
      out.max_abs = v;
      out.argmax = geom.points > 1 ? box.node(p) : RealVector::Zero(2 * dim);
    }
  }
  if (out.excluded > 0) add_warning(out.warnings, "ds residual: nodes beyond the chi extent were excluded");
  return out;
}

inline DsResidual ds_residual(const FockOperator& rho1, const FockOperator& rho2, double theta,
                              const DsGeometry& geom = {}) {
  if (!(rho1.space == rho2.space)) throw DimensionError("ds_residual: input states live on different spaces");
  return ds_residual(char_function_of(rho1), char_function_of(rho2), rho1.space.modes, theta, geom);
}

}  // namespace bosonic_ds
