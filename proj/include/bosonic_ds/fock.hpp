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

// Operator algebra on a truncated Fock space.
//
// An n-mode space with per-mode cutoff D keeps Fock levels 0..D-1 in every
// mode; the basis index is sum_j k_j D^(n-1-j), so mode 0 is the most
// significant digit and tensor(a, b) places a's modes before b's.
//
// Operators that raise the photon number (quadrature powers, Weyl operators)
// are evaluated so that every matrix element kept inside the truncation is
// exact: Weyl operators use closed-form displacement matrix elements, and
// quadrature polynomials are applied on a padded space.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "bosonic_ds/core.hpp"
#include "bosonic_ds/symplectic.hpp"

namespace bosonic_ds {

struct FockSpace {
  int modes = 1;
  int cutoff = 2;

  Index dim() const {
    Index d = 1;
    for (int j = 0; j < modes; ++j) d *= cutoff;
    return d;
  }

  Index stride(int mode) const {
    Index s = 1;
    for (int j = mode + 1; j < modes; ++j) s *= cutoff;
    return s;
  }

  int level(Index index, int mode) const { return static_cast<int>((index / stride(mode)) % cutoff); }

  void validate() const {
    if (modes < 1) throw DimensionError("FockSpace: need at least one mode");
    if (cutoff < 2) throw DimensionError("FockSpace: cutoff must be at least 2");
  }

  bool operator==(const FockSpace&) const = default;
};

enum class OperatorKind { density, unitary, observable, general };

struct FockOperator {
  FockSpace space;
  ComplexMatrix matrix;
  OperatorKind kind = OperatorKind::general;
  std::vector<std::string> warnings;

  bool flagged() const { return !warnings.empty(); }
};

inline void add_warning(std::vector<std::string>& warnings, const std::string& w) {
  if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Truncated annihilation operator: a|k> = sqrt(k)|k-1>.
inline RealMatrix annihilation(int cutoff) {
  RealMatrix a = RealMatrix::Zero(cutoff, cutoff);
  for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

/// I (x) ... (x) op (x) ... (x) I with op on `mode`.
inline ComplexMatrix embed_mode(const FockSpace& space, int mode, const ComplexMatrix& op) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int j = 0; j < space.modes; ++j) {
    out = kron(out, j == mode ? op : ComplexMatrix(ComplexMatrix::Identity(space.cutoff, space.cutoff)));
  }
  return out;
}

/// Truncated (Q_1, P_1, ..., Q_n, P_n) with a = (Q + iP)/sqrt(2). The
/// commutator [Q, P] = i holds except on the top Fock level.
inline std::vector<FockOperator> quadratures(const FockSpace& space) {
  space.validate();
  const ComplexMatrix a = annihilation(space.cutoff).cast<Complex>();
  const ComplexMatrix q = (a + a.adjoint()) / std::sqrt(2.0);
  const ComplexMatrix p = Complex(0.0, -1.0) * (a - a.adjoint()) / std::sqrt(2.0);
  std::vector<FockOperator> out;
  for (int j = 0; j < space.modes; ++j) {
    out.push_back({space, embed_mode(space, j, q), OperatorKind::observable, {}});
    out.push_back({space, embed_mode(space, j, p), OperatorKind::observable, {}});
  }
  return out;
}

/// Displacement amplitude of the single-mode Weyl operator
/// exp(i(x_q P - x_p Q)) = D(alpha).
inline Complex weyl_amplitude(double xq, double xp) { return Complex(-xq, -xp) / std::sqrt(2.0); }

/// Matrix elements <m|D(alpha)|k> for m, k < cutoff, from
///   <m|D|k> = (sqrt(m) <m-1|D|k-1> - conj(alpha) <m|D|k-1>) / sqrt(k),
///   <m|D|0> = alpha^m e^{-|alpha|^2/2} / sqrt(m!).
/// The recursion never reaches beyond the cutoff, so every entry is exact.
// <m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2} L_n^(m-n)(|alpha|^2)
// for m >= n. Each diagonal runs the normalised forward Laguerre recurrence;
// the two-index recurrence on matrix entries loses all accuracy once
// |alpha| exceeds a few units at cutoffs of a few dozen.
inline void displacement_matrix(int cutoff, Complex alpha, ComplexMatrix& out) {
  out.resize(cutoff, cutoff);
  const double x = std::norm(alpha);
  const double phi = std::arg(alpha);
  for (int d = 0; d < cutoff; ++d) {
    double g_prev = 0.0;
    double g = 0.0;
    if (x > 0.0) {
      g = std::exp(0.5 * d * std::log(x) - 0.5 * x - 0.5 * std::lgamma(d + 1.0));
    } else if (d == 0) {
      g = 1.0;
    }
    const Complex lower = std::polar(1.0, d * phi);
    const Complex upper = std::polar(1.0, d * (kPi - phi));
    for (int n = 0; n + d < cutoff; ++n) {
      out(n + d, n) = lower * g;
      if (d > 0) out(n, n + d) = upper * g;
      const double next = ((2.0 * n + 1.0 + d - x) * g - std::sqrt(static_cast<double>(n) * (n + d)) * g_prev) /
                          std::sqrt((n + 1.0) * (n + 1.0 + d));
      g_prev = g;
      g = next;
    }
  }
}

inline ComplexMatrix displacement_matrix(int cutoff, Complex alpha) {
  ComplexMatrix out;
  displacement_matrix(cutoff, alpha, out);
  return out;
}

/// Lowest `levels` Fock states per mode, as basis indices.
inline std::vector<Index> low_energy_indices(const FockSpace& space, int levels) {
  std::vector<Index> idx;
  for (Index i = 0; i < space.dim(); ++i) {
    bool keep = true;
    for (int j = 0; j < space.modes && keep; ++j) keep = space.level(i, j) < levels;
    if (keep) idx.push_back(i);
  }
  return idx;
}

/// Compression of W_xi = exp(i xi . sigma R) to the truncated space.
/// Carries a warning when W is not unitary (to tol.unitary_leak) on the
/// lower half of the Fock levels, i.e. xi is beyond the safe extent.
inline FockOperator weyl_operator(const FockSpace& space, const RealVector& xi, const Tolerances& tol = {}) {
  space.validate();
  if (xi.size() != 2 * space.modes) throw DimensionError("weyl_operator: xi must have 2n entries");
  if (!xi.allFinite()) throw ValidationError("weyl_operator: xi must be finite");
  ComplexMatrix w = ComplexMatrix::Identity(1, 1);
  for (int j = 0; j < space.modes; ++j) {
    w = kron(w, displacement_matrix(space.cutoff, weyl_amplitude(xi(2 * j), xi(2 * j + 1))));
  }
  FockOperator op{space, std::move(w), OperatorKind::unitary, {}};
  const auto low = low_energy_indices(space, std::max(1, space.cutoff / 2));
  double defect = 0.0;
  for (Index a : low) {
    for (Index b : low) {
      Complex g = op.matrix.col(a).dot(op.matrix.col(b));
      defect = std::max(defect, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  }
  if (defect > tol.unitary_leak) add_warning(op.warnings, "weyl operator beyond safe extent");
  return op;
}

/// Same operator built as the matrix exponential of the generator on a space
/// padded by `pad` levels per mode, then compressed. Converges to
/// weyl_operator as pad grows; used as an independent cross-check.
inline ComplexMatrix weyl_operator_by_exponential(const FockSpace& space, const RealVector& xi, int pad) {
  FockSpace big{space.modes, space.cutoff + pad};
  const auto quads = quadratures(big);
  const RealVector u = symplectic_form(space.modes).transpose() * xi;
  ComplexMatrix gen = ComplexMatrix::Zero(big.dim(), big.dim());
  for (int k = 0; k < 2 * space.modes; ++k) gen += Complex(0.0, u(k)) * quads[k].matrix;
  ComplexMatrix w = gen.exp();
  ComplexMatrix out(space.dim(), space.dim());
  for (Index i = 0; i < space.dim(); ++i) {
    Index bi = 0;
    for (int j = 0; j < space.modes; ++j) bi = bi * big.cutoff + space.level(i, j);
    for (Index k = 0; k < space.dim(); ++k) {
      Index bk = 0;
      for (int j = 0; j < space.modes; ++j) bk = bk * big.cutoff + space.level(k, j);
      out(i, k) = w(bi, bk);
    }
  }
  return out;
}

inline bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(ComplexMatrix(m - m.adjoint())) <= tol;
}

/// Throws ValidationError unless rho is Hermitian, unit trace and PSD.
inline void validate_density(const FockOperator& rho, const Tolerances& tol = {}) {
  if (rho.matrix.rows() != rho.space.dim() || rho.matrix.cols() != rho.space.dim()) {
    throw DimensionError("density matrix size does not match its Fock space");
  }
  if (!is_hermitian(rho.matrix, tol.hermitian)) throw ValidationError("density matrix is not Hermitian");
  const Complex tr = rho.matrix.trace();
  if (std::abs(tr - 1.0) > tol.trace) {
    throw ValidationError("density matrix trace is " + std::to_string(tr.real()) + ", expected 1");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol.psd) {
    throw ValidationError("density matrix has negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
  }
}

/// Largest single-mode population in levels above D-3.
inline double high_level_population(const FockOperator& rho) {
  const FockSpace& s = rho.space;
  double worst = 0.0;
  for (int j = 0; j < s.modes; ++j) {
    double pop = 0.0;
    for (Index i = 0; i < s.dim(); ++i) {
      if (s.level(i, j) >= s.cutoff - 2) pop += rho.matrix(i, i).real();
    }
    worst = std::max(worst, pop);
  }
  return worst;
}

inline void flag_truncation(FockOperator& rho, const Tolerances& tol) {
  if (high_level_population(rho) > tol.leak_budget) add_warning(rho.warnings, "truncation leak above budget");
}

inline FockOperator tensor(const FockOperator& a, const FockOperator& b) {
  if (a.space.cutoff != b.space.cutoff) throw DimensionError("tensor: cutoffs differ");
  OperatorKind kind = OperatorKind::general;
  if (a.kind == b.kind && a.kind != OperatorKind::observable) kind = a.kind;
  FockOperator out{{a.space.modes + b.space.modes, a.space.cutoff}, kron(a.matrix, b.matrix), kind, a.warnings};
  for (const auto& w : b.warnings) add_warning(out.warnings, w);
  return out;
}

/// Same operator on a larger cutoff, zero outside the original levels.
inline FockOperator embed_cutoff(const FockOperator& a, int cutoff) {
  if (cutoff < a.space.cutoff) throw DimensionError("embed_cutoff: target cutoff is smaller");
  const FockSpace big{a.space.modes, cutoff};
  std::vector<Index> map(a.space.dim());
  for (Index i = 0; i < a.space.dim(); ++i) {
    Index b = 0;
    for (int j = 0; j < a.space.modes; ++j) b = b * cutoff + a.space.level(i, j);
    map[i] = b;
  }
  FockOperator out{big, ComplexMatrix::Zero(big.dim(), big.dim()), a.kind, a.warnings};
  for (Index i = 0; i < a.space.dim(); ++i)
    for (Index k = 0; k < a.space.dim(); ++k) out.matrix(map[i], map[k]) = a.matrix(i, k);
  return out;
}

enum class Arm { first, second };

/// Reduced state of one arm of a state on 2n modes.
inline FockOperator partial_trace(const FockOperator& rho_ab, Arm keep) {
  if (rho_ab.space.modes % 2 != 0) throw DimensionError("partial_trace: expected an even number of modes");
  if (rho_ab.kind != OperatorKind::density && rho_ab.kind != OperatorKind::general) {
    throw ValidationError("partial_trace: input is not a density operator");
  }
  const FockSpace arm{rho_ab.space.modes / 2, rho_ab.space.cutoff};
  const Index d = arm.dim();
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      Complex acc = 0.0;
      for (Index k = 0; k < d; ++k) {
        acc += keep == Arm::first ? rho_ab.matrix(i * d + k, j * d + k) : rho_ab.matrix(k * d + i, k * d + j);
      }
      out(i, j) = acc;
    }
  }
  return {arm, std::move(out), rho_ab.kind, rho_ab.warnings};
}

/// Sum of singular values.
inline double trace_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (is_hermitian(m, 1e-13 * std::max(1.0, max_abs(m)))) {
    ComplexMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    for (double& e : ev) e = std::abs(e);
    std::sort(ev.begin(), ev.end());
    return pairwise_sum(std::span<const double>(ev));
  }
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

inline double trace_norm(const FockOperator& a) { return trace_norm(a.matrix); }

/// Hilbert-Schmidt (Frobenius) norm.
inline double hs_norm(const ComplexMatrix& m) { return m.norm(); }
inline double hs_norm(const FockOperator& a) { return a.matrix.norm(); }

/// U rho U^dagger.
inline FockOperator evolve(const FockOperator& u, const FockOperator& rho) {
  if (!(u.space == rho.space)) throw DimensionError("evolve: spaces differ");
  ComplexMatrix out = u.matrix * rho.matrix * u.matrix.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  FockOperator r{rho.space, std::move(out), rho.kind, rho.warnings};
  for (const auto& w : u.warnings) add_warning(r.warnings, w);
  return r;
}

// ---------------------------------------------------------------------------
// Beam splitter

namespace detail {

/// Two-mode generator a_1^dag a_2 - a_2^dag a_1 (real antisymmetric).
inline RealMatrix two_mode_exchange_generator(int cutoff) {
  const RealMatrix a = annihilation(cutoff);
  const RealMatrix id = RealMatrix::Identity(cutoff, cutoff);
  const ComplexMatrix a1 = kron(a.cast<Complex>(), id.cast<Complex>());
  const ComplexMatrix a2 = kron(id.cast<Complex>(), a.cast<Complex>());
  return (a1.adjoint() * a2 - a2.adjoint() * a1).real();
}

/// Two-mode hopping Hamiltonian a_1^dag a_2 + a_2^dag a_1.
inline RealMatrix two_mode_hopping(int cutoff) {
  const RealMatrix a = annihilation(cutoff);
  const RealMatrix id = RealMatrix::Identity(cutoff, cutoff);
  const ComplexMatrix a1 = kron(a.cast<Complex>(), id.cast<Complex>());
  const ComplexMatrix a2 = kron(id.cast<Complex>(), a.cast<Complex>());
  return (a1.adjoint() * a2 + a2.adjoint() * a1).real();
}

/// max |U^dag R_k U - (S R)_k| over pairs of two-mode states with at most
/// cutoff-2 photons in total, where truncated quadratures are exact.
inline double heisenberg_residual(const ComplexMatrix& u, const RealMatrix& s, int cutoff) {
  const FockSpace pair{2, cutoff};
  const auto quads = quadratures(pair);
  std::vector<Index> low;
  for (Index i = 0; i < pair.dim(); ++i) {
    if (pair.level(i, 0) + pair.level(i, 1) <= cutoff - 2) low.push_back(i);
  }
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) {
    const ComplexMatrix lhs = u.adjoint() * quads[k].matrix * u;
    ComplexMatrix rhs = ComplexMatrix::Zero(pair.dim(), pair.dim());
    for (int l = 0; l < 4; ++l) rhs += s(k, l) * quads[l].matrix;
    for (Index a : low)
      for (Index b : low) worst = std::max(worst, std::abs(lhs(a, b) - rhs(a, b)));
  }
  return worst;
}

}  // namespace detail

/// Outcome of the beam-splitter sign/phase calibration.
struct BeamSplitterCalibration {
  std::string generator;  // which candidate matched S_theta
  double residual = 0.0;
};

/// Two-mode beam-splitter unitary whose Heisenberg action reproduces
/// S_theta on (Q_1, P_1, Q_2, P_2). Candidates exp(+-theta K) with K the
/// exchange generator and exp(-+i theta H) with H the hopping Hamiltonian
/// are tried; the first whose action matches S_theta to 1e-10 on the
/// certified low-energy block is kept.
inline ComplexMatrix two_mode_beam_splitter(int cutoff, double theta, BeamSplitterCalibration* calib = nullptr) {
  const RealMatrix s = beam_splitter(theta, 1).matrix();
  const RealMatrix k = detail::two_mode_exchange_generator(cutoff);
  const RealMatrix h = detail::two_mode_hopping(cutoff);
  const char* names[] = {"exp(-theta (a1^dag a2 - a2^dag a1))", "exp(+theta (a1^dag a2 - a2^dag a1))",
                         "exp(-i theta (a1^dag a2 + a2^dag a1))", "exp(+i theta (a1^dag a2 + a2^dag a1))"};
  auto build = [&](int which) -> ComplexMatrix {
    switch (which) {
      case 0: return RealMatrix(-theta * k).exp().cast<Complex>();
      case 1: return RealMatrix(theta * k).exp().cast<Complex>();
      case 2: return ComplexMatrix(Complex(0.0, -theta) * h.cast<Complex>()).exp();
      default: return ComplexMatrix(Complex(0.0, theta) * h.cast<Complex>()).exp();
    }
  };
  double best = std::numeric_limits<double>::infinity();
  for (int which = 0; which < 4; ++which) {
    ComplexMatrix u = build(which);
    const double res = detail::heisenberg_residual(u, s, cutoff);
    best = std::min(best, res);
    if (res <= 1e-10) {
      if (calib) *calib = {names[which], res};
      return u;
    }
  }
  throw ConsistencyError("beam splitter calibration failed: best Heisenberg residual " + std::to_string(best));
}

/// Beam splitter on two arms of `arm.modes` modes, pairing mode j of arm 1
/// with mode j of arm 2. The result acts on 2n modes.
inline FockOperator beam_splitter_unitary(const FockSpace& arm, double theta,
                                          BeamSplitterCalibration* calib = nullptr) {
  arm.validate();
  const ComplexMatrix u2 = two_mode_beam_splitter(arm.cutoff, theta, calib);
  const FockSpace full{2 * arm.modes, arm.cutoff};
  const int n = arm.modes, d = arm.cutoff;
  if (n == 1) return {full, u2, OperatorKind::unitary, {}};
  ComplexMatrix u(full.dim(), full.dim());
  for (Index x = 0; x < full.dim(); ++x) {
    for (Index y = 0; y < full.dim(); ++y) {
      Complex v = 1.0;
      for (int j = 0; j < n && v != 0.0; ++j) {
        const Index px = full.level(x, j) * d + full.level(x, n + j);
        const Index py = full.level(y, j) * d + full.level(y, n + j);
        v *= u2(px, py);
      }
      u(x, y) = v;
    }
  }
  return {full, std::move(u), OperatorKind::unitary, {}};
}

// ---------------------------------------------------------------------------
// Moments

/// Right multiplication of row blocks by ladder and quadrature operators on a
/// space padded by `pad` levels per mode. Starting from rows supported on the
/// truncated levels, up to `pad` multiplications are exact.
class PaddedAlgebra {
 public:
  PaddedAlgebra(const FockSpace& space, int pad) : space_(space), padded_{space.modes, space.cutoff + pad} {
    embed_.resize(space.dim());
    for (Index i = 0; i < space.dim(); ++i) {
      Index b = 0;
      for (int j = 0; j < space.modes; ++j) b = b * padded_.cutoff + space.level(i, j);
      embed_[i] = b;
    }
  }

  const FockSpace& padded() const { return padded_; }

  /// Rows of `rows` (r x dim) lifted into the padded basis.
  ComplexMatrix lift(const ComplexMatrix& rows) const {
    ComplexMatrix out = ComplexMatrix::Zero(rows.rows(), padded_.dim());
    for (Index i = 0; i < space_.dim(); ++i) out.col(embed_[i]) = rows.col(i);
    return out;
  }

  /// M * R_k, k in [0, 2n).
  ComplexMatrix times_quadrature(const ComplexMatrix& m, int k) const {
    const int mode = k / 2;
    const bool is_p = (k % 2) == 1;
    const Index st = padded_.stride(mode);
    const int dp = padded_.cutoff;
    const double r2 = 1.0 / std::sqrt(2.0);
    ComplexMatrix out = ComplexMatrix::Zero(m.rows(), m.cols());
    for (Index y = 0; y < padded_.dim(); ++y) {
      const int ly = padded_.level(y, mode);
      // (M a)_{:,y} = sqrt(ly) M_{:, y - e}; (M a^dag)_{:,y} = sqrt(ly + 1) M_{:, y + e}
      if (ly >= 1) {
        const Complex c = is_p ? Complex(0.0, -r2) : Complex(r2, 0.0);
        out.col(y) += (c * std::sqrt(static_cast<double>(ly))) * m.col(y - st);
      }
      if (ly + 1 < dp) {
        const Complex c = is_p ? Complex(0.0, r2) : Complex(r2, 0.0);
        out.col(y) += (c * std::sqrt(static_cast<double>(ly + 1))) * m.col(y + st);
      }
    }
    return out;
  }

  /// M * (u . R).
  ComplexMatrix times_combination(const ComplexMatrix& m, const RealVector& u) const {
    ComplexMatrix out = ComplexMatrix::Zero(m.rows(), m.cols());
    for (int k = 0; k < u.size(); ++k) {
      if (u(k) != 0.0) out += u(k) * times_quadrature(m, k);
    }
    return out;
  }

 private:
  FockSpace space_;
  FockSpace padded_;
  std::vector<Index> embed_;
};

/// Spectral factors of a Hermitian operator: rho = sum_i w_i v_i v_i^dag with
/// rows(i) = v_i^dag. Eigenvalues below rel_cut * max|w| are dropped.
struct SpectralRows {
  RealVector weights;
  ComplexMatrix rows;
};

inline SpectralRows spectral_rows(const ComplexMatrix& rho, double rel_cut = 1e-15) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()));
  const RealVector& ev = es.eigenvalues();
  const double cut = rel_cut * std::max(1e-300, ev.cwiseAbs().maxCoeff());
  std::vector<Index> keep;
  for (Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i)) > cut) keep.push_back(i);
  SpectralRows out{RealVector(keep.size()), ComplexMatrix(keep.size(), rho.cols())};
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.weights(r) = ev(keep[r]);
    out.rows.row(r) = es.eigenvectors().col(keep[r]).adjoint();
  }
  return out;
}

struct MomentOptions {
  bool estimate_kappa = true;
  int kappa_samples = 64;
  int refine_steps = 20;
  std::uint64_t seed = 20240917;
};

struct MomentTable {
  RealVector d;
  RealMatrix gamma;
  std::vector<double> fourth;  // Tr[rho R_k^4]
  double kappa = 0.0;          // max ||rho R_xi^2 R_eta^2||_1 over sampled unit xi, eta
  RealVector kappa_xi;
  RealVector kappa_eta;
  int kappa_evaluations = 0;
};

namespace detail {

/// ||rho R_xi^2 R_eta^2||_1 with R_xi = xi . sigma R.
inline double fourth_moment_norm(const PaddedAlgebra& alg, const ComplexMatrix& weighted_rows, const RealMatrix& sigma,
                                 const RealVector& xi, const RealVector& eta) {
  const RealVector u = sigma.transpose() * xi;
  const RealVector v = sigma.transpose() * eta;
  ComplexMatrix z = alg.times_combination(weighted_rows, u);
  z = alg.times_combination(z, u);
  z = alg.times_combination(z, v);
  z = alg.times_combination(z, v);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(z * z.adjoint(), Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) acc += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  return acc;
}

}  // namespace detail

/// First, second and fourth moments of a density operator, plus the sampled
/// estimate of kappa: canonical axis pairs, `kappa_samples` random unit
/// pairs, then `refine_steps` of local perturbation around the best pair.
inline MomentTable moments(const FockOperator& rho, const MomentOptions& opt = {}) {
  const FockSpace& s = rho.space;
  s.validate();
  const int dim2 = 2 * s.modes;
  const PaddedAlgebra alg(s, 4);
  const SpectralRows sr = spectral_rows(rho.matrix);
  const ComplexMatrix rows = alg.lift(sr.rows);

  std::vector<ComplexMatrix> y(dim2);
  for (int k = 0; k < dim2; ++k) y[k] = alg.times_quadrature(rows, k);

  // <R_k R_l> = sum_i w_i <R_k v_i, R_l v_i>, and (v^dag R_k)_y = conj((R_k v)_y).
  auto expect_pair = [&](const ComplexMatrix& yk, const ComplexMatrix& yl) {
    Complex acc = 0.0;
    for (Index i = 0; i < sr.weights.size(); ++i) acc += sr.weights(i) * yk.row(i).conjugate().dot(yl.row(i).conjugate());
    return acc;
  };

  MomentTable t;
  t.d.resize(dim2);
  for (int k = 0; k < dim2; ++k) {
    Complex acc = 0.0;
    for (Index i = 0; i < sr.weights.size(); ++i) acc += sr.weights(i) * rows.row(i).dot(y[k].row(i));
    // rows.row(i).dot(y) = sum conj(v_i^dag) (v_i^dag R) = <v_i|R|v_i>
    t.d(k) = acc.real();
  }
  t.gamma.resize(dim2, dim2);
  for (int k = 0; k < dim2; ++k) {
    for (int l = k; l < dim2; ++l) {
      const double sym = 2.0 * expect_pair(y[k], y[l]).real();
      t.gamma(k, l) = t.gamma(l, k) = sym - 2.0 * t.d(k) * t.d(l);
    }
  }
  t.fourth.resize(dim2);
  for (int k = 0; k < dim2; ++k) {
    const ComplexMatrix ykk = alg.times_quadrature(y[k], k);
    double acc = 0.0;
    for (Index i = 0; i < sr.weights.size(); ++i) acc += sr.weights(i) * ykk.row(i).squaredNorm();
    t.fourth[k] = acc;
  }
  if (!opt.estimate_kappa) return t;

  const RealMatrix sigma = symplectic_form(s.modes);
  const ComplexMatrix weighted = sr.weights.cast<Complex>().asDiagonal() * rows;
  auto eval = [&](const RealVector& xi, const RealVector& eta) {
    ++t.kappa_evaluations;
    return detail::fourth_moment_norm(alg, weighted, sigma, xi, eta);
  };
  auto consider = [&](const RealVector& xi, const RealVector& eta) {
    const double v = eval(xi, eta);
    if (v > t.kappa || t.kappa_xi.size() == 0) {
      t.kappa = v;
      t.kappa_xi = xi;
      t.kappa_eta = eta;
    }
  };
  for (int a = 0; a < dim2; ++a)
    for (int b = 0; b < dim2; ++b) consider(RealVector::Unit(dim2, a), RealVector::Unit(dim2, b));

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&] {
    RealVector v(dim2);
    for (int k = 0; k < dim2; ++k) v(k) = normal(rng);
    return RealVector(v.normalized());
  };
  for (int i = 0; i < opt.kappa_samples; ++i) {
    RealVector xi = random_unit();
    RealVector eta = random_unit();
    consider(xi, eta);
  }
  double step = 0.2;
  for (int i = 0; i < opt.refine_steps; ++i) {
    RealVector xi = t.kappa_xi, eta = t.kappa_eta;
    for (int k = 0; k < dim2; ++k) {
      xi(k) += step * normal(rng);
      eta(k) += step * normal(rng);
    }
    const double before = t.kappa;
    consider(RealVector(xi.normalized()), RealVector(eta.normalized()));
    if (!(t.kappa > before)) step *= 0.5;
  }
  return t;
}

/// Gaussian state with the same first and second moments. Throws when the
/// extracted Gamma violates the uncertainty relation, which signals an
/// unphysical truncation artifact.
inline GaussianState gaussify(const FockOperator& rho, const Tolerances& tol = {}) {
  MomentOptions opt;
  opt.estimate_kappa = false;
  const MomentTable t = moments(rho, opt);
  GaussianState g{t.d, t.gamma};
  validate(g, tol);
  return g;
}

// ---------------------------------------------------------------------------
// Gaussian synthesis

/// Characteristic function of a Gaussian state with the operator
/// conventions above: chi(xi) = exp(-xi.(sigma Gamma sigma^T) xi / 4 + i xi.sigma d).
inline Complex gaussian_char(const GaussianState& g, const RealVector& xi) {
  const RealMatrix sigma = symplectic_form(g.modes());
  const RealVector u = sigma.transpose() * xi;
  return std::exp(Complex(-0.25 * u.dot(g.gamma * u), u.dot(g.d)));
}

struct SynthesisConfig {
  double tail_tol = 1e-12;    // |chi| at the grid edge
  double oversample = 2.5;    // spacing h = 2 pi / (L * oversample); below 2 aliasing sets in
  double residual_tol = 1e-4; // allowed trace deficit before renormalisation
  double psd_tol = 1e-6;
  double max_work = 4e9;      // grid points times dim^2 for a non-product state
};

namespace detail {

/// True when Gamma has no correlations between different modes.
inline bool mode_product(const RealMatrix& gamma, double tol) {
  const Index m = gamma.rows() / 2;
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      if (a != b && gamma.block(2 * a, 2 * b, 2, 2).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

}  // namespace detail

/// Density matrix of a Gaussian state on `space`, from trapezoidal quadrature
/// of rho = (2 pi)^-n int chi(xi) W_{-xi} d xi. Every W entry is exact, so the
/// only errors are quadrature and the population lost above the cutoff.
inline FockOperator gaussian_to_fock(const GaussianState& g, const FockSpace& space, const SynthesisConfig& cfg = {},
                                     const Tolerances& tol = {}) {
  validate(g, tol);
  space.validate();
  if (g.modes() != space.modes) throw DimensionError("gaussian_to_fock: mode count mismatch");
  const int n = space.modes;
  if (n > 1 && detail::mode_product(g.gamma, 1e-14 * std::max(1.0, max_abs(g.gamma)))) {
    FockOperator out = gaussian_to_fock(GaussianState{g.d.segment(0, 2), g.gamma.block(0, 0, 2, 2)},
                                        FockSpace{1, space.cutoff}, cfg, tol);
    for (int j = 1; j < n; ++j) {
      out = tensor(out, gaussian_to_fock(GaussianState{g.d.segment(2 * j, 2), g.gamma.block(2 * j, 2 * j, 2, 2)},
                                         FockSpace{1, space.cutoff}, cfg, tol));
    }
    return out;
  }
  const int dim2 = 2 * n;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(g.gamma, Eigen::EigenvaluesOnly);
  const double lam_min = es.eigenvalues().minCoeff();
  const double lam_max = es.eigenvalues().maxCoeff();
  const double log_tol = std::log(1.0 / cfg.tail_tol);
  const double extent = std::sqrt(4.0 * log_tol / lam_min);
  // Quadrature replicas sit at phase-space period 2 pi / h; they must clear
  // both the radius sqrt(2D + 1) of the kept levels and the state's spread.
  const double period = std::max(extent * cfg.oversample,
                                 std::sqrt(2.0 * space.cutoff + 1.0) + std::sqrt(2.0 * lam_max * log_tol) + 2.0);
  const double h = 2.0 * kPi / period;
  const int half = static_cast<int>(std::ceil(extent / h));
  const int per_axis = 2 * half + 1;
  Index total = 1;
  for (int k = 0; k < dim2; ++k) total *= per_axis;
  const double work = static_cast<double>(total) * static_cast<double>(space.dim()) * static_cast<double>(space.dim());
  if (work > cfg.max_work) {
    throw TruncationError("gaussian_to_fock: quadrature grid too large for a correlated " + std::to_string(n) +
                          "-mode state (" + std::to_string(total) + " points)");
  }

  // Fixed-size chunks summed in order keep the result independent of the
  // worker count.
  const Index chunk = 4096;
  const Index chunks = (total + chunk - 1) / chunk;
  std::vector<ComplexMatrix> partial(chunks);
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    ComplexMatrix acc = ComplexMatrix::Zero(space.dim(), space.dim());
    ComplexMatrix single, w;
    RealVector xi(dim2);
    const Index begin = static_cast<Index>(c) * chunk, end = std::min(total, begin + chunk);
    for (Index p = begin; p < end; ++p) {
      Index rem = p;
      for (int k = dim2 - 1; k >= 0; --k) {
        xi(k) = (static_cast<int>(rem % per_axis) - half) * h;
        rem /= per_axis;
      }
      const Complex chi = gaussian_char(g, xi);
      if (std::abs(chi) < cfg.tail_tol) continue;
      w = ComplexMatrix::Identity(1, 1);
      for (int j = 0; j < n; ++j) {
        displacement_matrix(space.cutoff, weyl_amplitude(-xi(2 * j), -xi(2 * j + 1)), single);
        w = n == 1 ? single : kron(w, single);
      }
      acc += chi * w;
    }
    partial[c] = std::move(acc);
  });
  ComplexMatrix rho = ComplexMatrix::Zero(space.dim(), space.dim());
  for (const auto& p : partial) rho += p;
  rho *= std::pow(h, dim2) / std::pow(2.0 * kPi, n);
  rho = 0.5 * (rho + rho.adjoint()).eval();

  const double tr = rho.trace().real();
  if (std::abs(1.0 - tr) > cfg.residual_tol) {
    throw TruncationError("gaussian_to_fock: trace deficit " + std::to_string(1.0 - tr) +
                          " exceeds residual tolerance; raise the cutoff");
  }
  rho /= tr;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> check(rho, Eigen::EigenvaluesOnly);
  if (check.eigenvalues().minCoeff() < -cfg.psd_tol) {
    throw ConsistencyError("gaussian_to_fock: synthesized state not PSD (min eig " +
                           std::to_string(check.eigenvalues().minCoeff()) + ")");
  }
  FockOperator out{space, std::move(rho), OperatorKind::density, {}};
  if (1.0 - tr > tol.leak_budget) add_warning(out.warnings, "truncation leak above budget");
  flag_truncation(out, tol);
  return out;
}

}  // namespace bosonic_ds
