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

// Symplectic linear algebra on phase space R^{2n}.
//
// Ordering is mode-interleaved: R = (Q_1, P_1, ..., Q_n, P_n). The form is
// sigma = omega (+) ... (+) omega with omega = [[0, 1], [-1, 0]], so that
// [R_k, R_l] = i sigma_kl.
//
// Covariance matrices carry no factor 1/2: Gamma_kl = Tr[rho {R_k - d_k, R_l - d_l}],
// so the vacuum has Gamma = I.

#pragma once

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "bosonic_ds/core.hpp"

namespace bosonic_ds {

inline RealMatrix symplectic_form(int modes) {
  if (modes < 1) throw DimensionError("symplectic_form: mode count must be positive");
  RealMatrix sigma = RealMatrix::Zero(2 * modes, 2 * modes);
  for (int j = 0; j < modes; ++j) {
    sigma(2 * j, 2 * j + 1) = 1.0;
    sigma(2 * j + 1, 2 * j) = -1.0;
  }
  return sigma;
}

inline int modes_of_dimension(Index dim, const char* what) {
  if (dim <= 0 || dim % 2 != 0) {
    throw DimensionError(std::string(what) + ": phase-space dimension must be even and positive, got " +
                         std::to_string(dim));
  }
  return static_cast<int>(dim / 2);
}

/// max |S sigma S^T - sigma|.
inline double symplectic_residual(const RealMatrix& s) {
  if (s.rows() != s.cols()) throw DimensionError("symplectic_residual: matrix must be square");
  RealMatrix sigma = symplectic_form(modes_of_dimension(s.rows(), "symplectic_residual"));
  return max_abs(RealMatrix(s * sigma * s.transpose() - sigma));
}

inline bool is_symplectic(const RealMatrix& s, double tol = Tolerances{}.symplectic) {
  return symplectic_residual(s) <= tol;
}

/// Real 2m x 2m matrix known to satisfy S sigma S^T = sigma.
class SymplecticMatrix {
 public:
  SymplecticMatrix() = default;

  /// Validates; throws ValidationError when the residual exceeds tol.
  explicit SymplecticMatrix(RealMatrix m, double tol = Tolerances{}.symplectic) : m_(std::move(m)) {
    double res = symplectic_residual(m_);
    if (!(res <= tol)) {
      throw ValidationError("matrix is not symplectic (residual " + std::to_string(res) + ")");
    }
  }

  static SymplecticMatrix identity(int modes) {
    return SymplecticMatrix(RealMatrix::Identity(2 * modes, 2 * modes));
  }

  int modes() const { return static_cast<int>(m_.rows() / 2); }
  const RealMatrix& matrix() const { return m_; }

  SymplecticMatrix operator*(const SymplecticMatrix& rhs) const {
    if (rhs.m_.rows() != m_.rows()) throw DimensionError("SymplecticMatrix product: mode mismatch");
    SymplecticMatrix out;
    out.m_ = m_ * rhs.m_;
    return out;
  }

 private:
  RealMatrix m_;
};

/// Beam splitter acting on two arms of n modes each:
///   S_theta = [[cos(theta) I, -sin(theta) I], [sin(theta) I, cos(theta) I]].
inline SymplecticMatrix beam_splitter(double theta, int modes_per_arm) {
  if (modes_per_arm < 1) throw DimensionError("beam_splitter: modes per arm must be positive");
  const Index h = 2 * modes_per_arm;
  RealMatrix s(2 * h, 2 * h);
  const RealMatrix id = RealMatrix::Identity(h, h);
  const double c = std::cos(theta), sn = std::sin(theta);
  s << c * id, -sn * id, sn * id, c * id;
  return SymplecticMatrix(std::move(s), 1e-12);
}

/// True when theta is (numerically) an integer multiple of pi/2.
inline bool is_trivial_splitter(double theta, double tol = 1e-12) {
  return std::abs(std::sin(2.0 * theta)) <= tol;
}

/// Displacement d and covariance matrix Gamma of a Gaussian state.
struct GaussianState {
  RealVector d;
  RealMatrix gamma;

  int modes() const { return static_cast<int>(d.size() / 2); }

  static GaussianState vacuum(int modes) {
    return {RealVector::Zero(2 * modes), RealMatrix::Identity(2 * modes, 2 * modes)};
  }

  /// Isotropic thermal state with mean photon number nbar in every mode.
  static GaussianState thermal(int modes, double nbar) {
    return {RealVector::Zero(2 * modes), (2.0 * nbar + 1.0) * RealMatrix::Identity(2 * modes, 2 * modes)};
  }
};

/// Smallest eigenvalue of the Hermitian matrix Gamma + i sigma. Negative
/// values mean Gamma violates the uncertainty relation.
inline double check_uncertainty(const RealMatrix& gamma, double symmetry_tol = Tolerances{}.symmetry) {
  if (gamma.rows() != gamma.cols()) throw DimensionError("check_uncertainty: Gamma must be square");
  const int modes = modes_of_dimension(gamma.rows(), "check_uncertainty");
  const double asym = max_abs(RealMatrix(gamma - gamma.transpose()));
  if (asym > symmetry_tol * std::max(1.0, max_abs(gamma))) {
    throw ValidationError("check_uncertainty: Gamma is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
  ComplexMatrix h = gamma.cast<Complex>();
  h += Complex(0.0, 1.0) * symplectic_form(modes).cast<Complex>();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Throws ValidationError unless g is a physical Gaussian state within tol.
inline void validate(const GaussianState& g, const Tolerances& tol = {}) {
  const int modes = modes_of_dimension(g.d.size(), "GaussianState");
  if (g.gamma.rows() != 2 * modes || g.gamma.cols() != 2 * modes) {
    throw DimensionError("GaussianState: Gamma and d sizes disagree");
  }
  if (!g.d.allFinite() || !g.gamma.allFinite()) throw ValidationError("GaussianState: non-finite entries");
  double min_eig = check_uncertainty(g.gamma, tol.symmetry);
  if (min_eig < -tol.uncertainty) {
    throw ValidationError("GaussianState violates the uncertainty relation: min eig(Gamma + i sigma) = " +
                          std::to_string(min_eig));
  }
}

/// (d, Gamma) -> (S d, S Gamma S^T).
inline GaussianState transform_gaussian(const SymplecticMatrix& s, const GaussianState& g) {
  if (s.matrix().rows() != g.d.size() || g.gamma.rows() != g.d.size()) {
    throw DimensionError("transform_gaussian: dimension mismatch");
  }
  return {s.matrix() * g.d, s.matrix() * g.gamma * s.matrix().transpose()};
}

// Generators used by the classifier, fixtures and tests.

inline RealMatrix single_mode_rotation(double phi) {
  RealMatrix r(2, 2);
  r << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
  return r;
}

inline RealMatrix single_mode_squeezer(double r) {
  RealMatrix s = RealMatrix::Zero(2, 2);
  s(0, 0) = std::exp(-r);
  s(1, 1) = std::exp(r);
  return s;
}

/// Two-mode squeezer coupling mode j of arm 1 with mode j of arm 2, for
/// every j. Dimension 4n.
inline SymplecticMatrix two_mode_squeezer(double r, int modes_per_arm) {
  const Index h = 2 * modes_per_arm;
  RealMatrix s = RealMatrix::Zero(2 * h, 2 * h);
  for (int j = 0; j < modes_per_arm; ++j) {
    for (int k = 0; k < 2; ++k) {
      const double z = (k == 0) ? 1.0 : -1.0;
      const Index a = 2 * j + k, b = h + 2 * j + k;
      s(a, a) = std::cosh(r);
      s(b, b) = std::cosh(r);
      s(a, b) = z * std::sinh(r);
      s(b, a) = z * std::sinh(r);
    }
  }
  return SymplecticMatrix(std::move(s), 1e-9 * std::cosh(2 * r));
}

/// Random symplectic matrix on n modes: rotation-squeeze-rotation on every
/// mode, interleaved with passive mixing between neighbouring modes.
template <class Rng>
RealMatrix random_symplectic(int modes, Rng& rng, double max_squeeze = 0.5) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> squeeze(-max_squeeze, max_squeeze);
  RealMatrix s = RealMatrix::Identity(2 * modes, 2 * modes);
  for (int layer = 0; layer < 2; ++layer) {
    RealMatrix local = RealMatrix::Zero(2 * modes, 2 * modes);
    for (int j = 0; j < modes; ++j) {
      local.block(2 * j, 2 * j, 2, 2) =
          single_mode_rotation(angle(rng)) * single_mode_squeezer(squeeze(rng)) * single_mode_rotation(angle(rng));
    }
    s = local * s;
    for (int j = 0; j + 1 < modes; ++j) {
      const double t = angle(rng);
      RealMatrix mix = RealMatrix::Identity(2 * modes, 2 * modes);
      mix.block(2 * j, 2 * j, 4, 4) = beam_splitter(t, 1).matrix();
      s = mix * s;
    }
  }
  return s;
}

/// Random physical covariance matrix: nu * X X^T with X random symplectic
/// and nu >= 1.
template <class Rng>
RealMatrix random_covariance(int modes, Rng& rng, double max_squeeze = 0.4, double max_excess = 0.5) {
  std::uniform_real_distribution<double> excess(0.0, max_excess);
  RealMatrix x = random_symplectic(modes, rng, max_squeeze);
  RealMatrix diag = RealMatrix::Zero(2 * modes, 2 * modes);
  for (int j = 0; j < modes; ++j) {
    const double nu = 1.0 + excess(rng);
    diag(2 * j, 2 * j) = nu;
    diag(2 * j + 1, 2 * j + 1) = nu;
  }
  RealMatrix g = x * diag * x.transpose();
  return 0.5 * (g + g.transpose());
}

}  // namespace bosonic_ds
