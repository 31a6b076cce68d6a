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

// Symplectic maps on two n-mode arms that keep product covariance matrices
// block diagonal. With S = [[A, B], [C, D]] the off-diagonal output block
// for inputs Gamma1 (+) Gamma2 is A Gamma1 C^T + B Gamma2 D^T.
//
// Admissible maps have the form
//   S = diag(X, Y) [[I, a I], [-a I, I]] / sqrt(1 + a^2)
//     = [[0, X], [Y, 0]] [[I, -g I], [g I, I]] / sqrt(1 + g^2),   g = 1/a,
// with X, Y symplectic. Under this form a = Tr(A^-1 B) / 2n, so the
// beam splitter S_theta has a = -tan(theta).

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include "bosonic_ds/symplectic.hpp"

namespace bosonic_ds {

enum class Verdict { local, swap, beam_splitter_like, not_preserving };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::local: return "local";
    case Verdict::swap: return "swap";
    case Verdict::beam_splitter_like: return "beam_splitter_like";
    case Verdict::not_preserving: return "not_preserving";
  }
  return "unknown";
}

struct ClassifierConfig {
  double tol = Tolerances{}.classify;  // relative to max(1, max|S|)^2
  double swap_threshold = 1e12;        // |alpha| above this is reported as +-inf
  double local_threshold = 1e-12;      // |alpha| below this is reported as 0
  double singular_cond = 1e8;          // cond(A) above this selects the gamma branch
};

struct ArmBlocks {
  int n = 0;
  RealMatrix a, b, c, d;
};

struct PreservationCheck {
  bool preserved = false;
  double residual = 0.0;   // max-norm of the projector equation
  double tolerance = 0.0;  // scaled tolerance used for the decision
  // Counterexample when not preserved: inputs and max|off-diagonal block|.
  std::optional<RealMatrix> witness_1, witness_2;
  double witness_offdiag = 0.0;
};

struct ClassificationResult {
  Verdict verdict = Verdict::not_preserving;
  std::optional<RealMatrix> x, y;
  double alpha = 0.0;
  std::string branch;  // "alpha", "gamma" or empty
  double residual = 0.0;
  double criterion_residual = 0.0;
  double cond_a = 0.0, cond_b = 0.0;
  std::optional<RealMatrix> witness;
  double witness_offdiag = 0.0;
};

namespace detail {

inline double condition_number(const RealMatrix& m) {
  Eigen::JacobiSVD<RealMatrix> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

// (I + F) / 2 on R^m (x) R^m, row-major pair index i * m + j.
inline RealMatrix symmetric_projector(Index m) {
  RealMatrix p = RealMatrix::Zero(m * m, m * m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      p(i * m + j, i * m + j) += 0.5;
      p(i * m + j, j * m + i) += 0.5;
    }
  return p;
}

inline double scaled_tol(const RealMatrix& s, double tol) {
  const double scale = std::max(1.0, max_abs(s));
  return tol * scale * scale;
}

// Top right singular vector of m, reshaped to a symmetric matrix with unit
// Frobenius norm; m must vanish on antisymmetric vectors.
inline RealMatrix top_symmetric_direction(const RealMatrix& m, Index dim) {
  Eigen::JacobiSVD<RealMatrix> svd(m, Eigen::ComputeFullV);
  const RealVector v = svd.matrixV().col(0);
  RealMatrix g(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) g(i, j) = v(i * dim + j);
  g = 0.5 * (g + g.transpose()).eval();
  const double f = g.norm();
  return f > 0.0 ? RealMatrix(g / f) : RealMatrix(RealMatrix::Identity(dim, dim) / std::sqrt(double(dim)));
}

inline double offdiag(const ArmBlocks& s, const RealMatrix& g1, const RealMatrix& g2) {
  return max_abs(RealMatrix(s.a * g1 * s.c.transpose() + s.b * g2 * s.d.transpose()));
}

// Inputs mu I (+) mu I perturbed by +-t G on the arms selected by on1/on2.
// mu = 1 + t |G| keeps both inputs >= I, hence valid covariance matrices.
inline void build_witness(const ArmBlocks& s, const RealMatrix& g, bool on1, bool on2, double target,
                          PreservationCheck& out) {
  const Index m = 2 * s.n;
  const RealMatrix id = RealMatrix::Identity(m, m);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(g, Eigen::EigenvaluesOnly);
  const double gnorm = es.eigenvalues().cwiseAbs().maxCoeff();
  for (double t = 1.0; t <= 1e12; t *= 10.0) {
    const double mu = 1.0 + t * gnorm;
    for (double sign : {1.0, -1.0}) {
      const RealMatrix shift = sign * t * g;
      const RealMatrix g1 = on1 ? RealMatrix(mu * id + shift) : RealMatrix(mu * id);
      const RealMatrix g2 = on2 ? RealMatrix(mu * id + shift) : RealMatrix(mu * id);
      const double od = offdiag(s, g1, g2);
      if (od > out.witness_offdiag) {
        out.witness_offdiag = od;
        out.witness_1 = g1;
        out.witness_2 = g2;
      }
    }
    if (out.witness_offdiag > target) return;
  }
}

}  // namespace detail

/// Splits a symplectic 4n x 4n matrix into arm blocks. Throws
/// DimensionError for a bad shape, ValidationError if not symplectic.
inline ArmBlocks split_arms(const RealMatrix& s, double tol = Tolerances{}.classify) {
  if (s.rows() != s.cols() || s.rows() == 0 || s.rows() % 4 != 0) {
    throw DimensionError("classifier: S must be square with dimension 4n");
  }
  if (!s.allFinite()) throw ValidationError("classifier: S has non-finite entries");
  const double res = symplectic_residual(s);
  if (res > detail::scaled_tol(s, tol)) {
    throw ValidationError("classifier: S is not symplectic (residual " + std::to_string(res) + ")");
  }
  ArmBlocks out;
  out.n = static_cast<int>(s.rows() / 4);
  const Index m = 2 * out.n;
  out.a = s.block(0, 0, m, m);
  out.b = s.block(0, m, m, m);
  out.c = s.block(m, 0, m, m);
  out.d = s.block(m, m, m, m);
  return out;
}

/// Exact test of "S (Gamma (+) Gamma) S^T is block diagonal for every Gamma":
/// (A (x) C + B (x) D) P+ = 0. A failing check carries a witness Gamma.
inline PreservationCheck preserves_identical(const RealMatrix& s, const ClassifierConfig& cfg = {}) {
  const ArmBlocks k = split_arms(s, cfg.tol);
  const Index m = 2 * k.n;
  const RealMatrix p = detail::symmetric_projector(m);
  const RealMatrix eq = (RealMatrix(Eigen::kroneckerProduct(k.a, k.c)) + RealMatrix(Eigen::kroneckerProduct(k.b, k.d))) * p;
  PreservationCheck out;
  out.residual = max_abs(eq);
  out.tolerance = detail::scaled_tol(s, cfg.tol);
  out.preserved = out.residual <= out.tolerance;
  if (!out.preserved) detail::build_witness(k, detail::top_symmetric_direction(eq, m), true, true, 10.0 * out.tolerance, out);
  return out;
}

/// Same for independent inputs Gamma1 (+) Gamma2: (A (x) C) P+ = 0 and
/// (B (x) D) P+ = 0, each to half the tolerance so that a pass here
/// implies a pass of preserves_identical.
inline PreservationCheck preserves_arbitrary(const RealMatrix& s, const ClassifierConfig& cfg = {}) {
  const ArmBlocks k = split_arms(s, cfg.tol);
  const Index m = 2 * k.n;
  const RealMatrix p = detail::symmetric_projector(m);
  const RealMatrix e1 = RealMatrix(Eigen::kroneckerProduct(k.a, k.c)) * p;
  const RealMatrix e2 = RealMatrix(Eigen::kroneckerProduct(k.b, k.d)) * p;
  PreservationCheck out;
  const double r1 = max_abs(e1), r2 = max_abs(e2);
  out.residual = std::max(r1, r2);
  out.tolerance = detail::scaled_tol(s, cfg.tol);
  out.preserved = out.residual <= 0.5 * out.tolerance;
  if (!out.preserved) {
    const bool first = r1 >= r2;
    detail::build_witness(k, detail::top_symmetric_direction(first ? e1 : e2, m), first, !first,
                          10.0 * out.tolerance, out);
  }
  return out;
}

/// S from (X, Y, alpha); infinite alpha means the swap form [[0, X], [Y, 0]].
inline RealMatrix reconstruct(const RealMatrix& x, const RealMatrix& y, double alpha) {
  const Index m = x.rows();
  RealMatrix s = RealMatrix::Zero(2 * m, 2 * m);
  if (std::isinf(alpha)) {
    s.block(0, m, m, m) = x;
    s.block(m, 0, m, m) = y;
    return s;
  }
  const double f = 1.0 / std::sqrt(1.0 + alpha * alpha);
  s.block(0, 0, m, m) = f * x;
  s.block(0, m, m, m) = f * alpha * x;
  s.block(m, 0, m, m) = -f * alpha * y;
  s.block(m, m, m, m) = f * y;
  return s;
}

/// Canonical form of a map that passes preserves_identical. X and Y are
/// returned in the alpha form whenever alpha is finite. Throws
/// ValidationError if the map is not admissible and ConsistencyError if the
/// reconstruction misses S.
inline ClassificationResult decompose(const RealMatrix& s, const ClassifierConfig& cfg = {}) {
  const PreservationCheck pc = preserves_identical(s, cfg);
  if (!pc.preserved) {
    throw ValidationError("decompose: S does not preserve block-diagonal covariances (residual " +
                          std::to_string(pc.residual) + ")");
  }
  const ArmBlocks k = split_arms(s, cfg.tol);
  const double two_n = 2.0 * k.n;
  ClassificationResult r;
  r.criterion_residual = pc.residual;
  r.cond_a = detail::condition_number(k.a);
  r.cond_b = detail::condition_number(k.b);

  RealMatrix x, y;
  if (r.cond_a <= cfg.singular_cond && k.a.norm() >= k.b.norm()) {
    r.branch = "alpha";
    r.alpha = k.a.fullPivLu().solve(k.b).trace() / two_n;
    const double f = std::sqrt(1.0 + r.alpha * r.alpha);
    x = f * k.a;
    y = f * k.d;
  } else {
    r.branch = "gamma";
    const double gamma = k.b.fullPivLu().solve(k.a).trace() / two_n;
    const double f = std::sqrt(1.0 + gamma * gamma);
    x = f * k.b;
    y = f * k.c;
    if (std::abs(gamma) * cfg.swap_threshold <= 1.0) {
      r.alpha = std::copysign(std::numeric_limits<double>::infinity(), gamma);
    } else {
      r.alpha = 1.0 / gamma;
      const double sg = gamma > 0.0 ? 1.0 : -1.0;
      x *= sg;
      y *= -sg;
    }
  }
  if (std::isinf(r.alpha)) {
    r.verdict = Verdict::swap;
  } else if (std::abs(r.alpha) <= cfg.local_threshold) {
    r.alpha = 0.0;
    r.verdict = Verdict::local;
  } else {
    r.verdict = Verdict::beam_splitter_like;
  }

  r.residual = max_abs(RealMatrix(reconstruct(x, y, r.alpha) - s));
  const double tol = detail::scaled_tol(s, cfg.tol);
  const double sx = symplectic_residual(x), sy = symplectic_residual(y);
  if (r.residual > tol || sx > detail::scaled_tol(x, cfg.tol) || sy > detail::scaled_tol(y, cfg.tol)) {
    throw ConsistencyError("decompose: reconstruction residual " + std::to_string(r.residual) +
                           ", symplectic residuals " + std::to_string(sx) + ", " + std::to_string(sy) +
                           " (cond A " + std::to_string(r.cond_a) + ", cond B " + std::to_string(r.cond_b) + ")");
  }
  r.x = std::move(x);
  r.y = std::move(y);
  return r;
}

/// decompose() for admissible maps, otherwise a not_preserving result that
/// carries the witness Gamma.
inline ClassificationResult classify(const RealMatrix& s, const ClassifierConfig& cfg = {}) {
  const PreservationCheck pc = preserves_identical(s, cfg);
  if (pc.preserved) return decompose(s, cfg);
  ClassificationResult r;
  r.verdict = Verdict::not_preserving;
  r.alpha = std::numeric_limits<double>::quiet_NaN();
  r.criterion_residual = pc.residual;
  r.residual = pc.residual;
  const ArmBlocks k = split_arms(s, cfg.tol);
  r.cond_a = detail::condition_number(k.a);
  r.cond_b = detail::condition_number(k.b);
  r.witness = pc.witness_1;
  r.witness_offdiag = pc.witness_offdiag;
  return r;
}

/// Random instance of the admissible form with X, Y products of one-mode
/// rotations and squeezers.
template <class Rng>
RealMatrix random_admissible(int n, double alpha, Rng& rng, double max_squeeze = 0.5) {
  return reconstruct(random_symplectic(n, rng, max_squeeze), random_symplectic(n, rng, max_squeeze), alpha);
}

/// Two-mode squeezer dressed with random local symplectics on both sides.
template <class Rng>
RealMatrix random_two_mode_squeezing(int n, Rng& rng, double r_min = 0.1, double r_max = 1.0) {
  std::uniform_real_distribution<double> ur(r_min, r_max);
  const Index m = 2 * n;
  auto local = [&] {
    RealMatrix l = RealMatrix::Zero(2 * m, 2 * m);
    l.block(0, 0, m, m) = random_symplectic(n, rng, 0.3);
    l.block(m, m, m, m) = random_symplectic(n, rng, 0.3);
    return l;
  };
  const RealMatrix l1 = local();
  const RealMatrix l2 = local();
  return l1 * two_mode_squeezer(ur(rng), n).matrix() * l2;
}

}  // namespace bosonic_ds
