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

// Named reproducible states on a truncated Fock space.

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "bosonic_ds/fock.hpp"

namespace bosonic_ds {

inline FockOperator pure_state(const FockSpace& space, const ComplexVector& psi) {
  if (psi.size() != space.dim()) throw DimensionError("pure_state: vector size does not match the space");
  const ComplexVector v = psi.normalized();
  return {space, v * v.adjoint(), OperatorKind::density, {}};
}

/// |m> in every mode.
inline FockOperator fock_state(const FockSpace& space, int m) {
  space.validate();
  if (m < 0 || m >= space.cutoff) throw TruncationError("fock_state: level outside the truncation");
  Index idx = 0;
  for (int j = 0; j < space.modes; ++j) idx = idx * space.cutoff + m;
  ComplexVector psi = ComplexVector::Zero(space.dim());
  psi(idx) = 1.0;
  FockOperator rho = pure_state(space, psi);
  flag_truncation(rho, Tolerances{});
  return rho;
}

inline FockOperator vacuum_state(const FockSpace& space) { return fock_state(space, 0); }

/// Thermal state with mean photon number nbar per mode, populations
/// nbar^k / (1 + nbar)^(k+1), renormalised on the truncation.
inline FockOperator thermal_state(const FockSpace& space, double nbar, const Tolerances& tol = {}) {
  space.validate();
  if (!(nbar >= 0.0)) throw ValidationError("thermal_state: nbar must be non-negative");
  RealVector single(space.cutoff);
  for (int k = 0; k < space.cutoff; ++k) single(k) = std::pow(nbar, k) / std::pow(1.0 + nbar, k + 1);
  const double kept = single.sum();
  single /= kept;
  ComplexMatrix rho = ComplexMatrix::Zero(space.dim(), space.dim());
  for (Index i = 0; i < space.dim(); ++i) {
    double p = 1.0;
    for (int j = 0; j < space.modes; ++j) p *= single(space.level(i, j));
    rho(i, i) = p;
  }
  FockOperator out{space, std::move(rho), OperatorKind::density, {}};
  if (1.0 - std::pow(kept, space.modes) > tol.leak_budget) add_warning(out.warnings, "truncation leak above budget");
  flag_truncation(out, tol);
  return out;
}

/// Product of coherent states with displacement d = (<Q_1>, <P_1>, ...).
inline FockOperator displaced_vacuum(const FockSpace& space, const RealVector& d, const Tolerances& tol = {}) {
  space.validate();
  if (d.size() != 2 * space.modes) throw DimensionError("displaced_vacuum: d must have 2n entries");
  ComplexVector psi = ComplexVector::Ones(1);
  double kept = 1.0;
  for (int j = 0; j < space.modes; ++j) {
    const Complex alpha = Complex(d(2 * j), d(2 * j + 1)) / std::sqrt(2.0);
    ComplexVector col = displacement_matrix(space.cutoff, alpha).col(0);
    kept *= col.squaredNorm();
    ComplexVector next(psi.size() * col.size());
    for (Index a = 0; a < psi.size(); ++a) next.segment(a * col.size(), col.size()) = psi(a) * col;
    psi = std::move(next);
  }
  FockOperator out = pure_state(space, psi);
  if (1.0 - kept > tol.leak_budget) add_warning(out.warnings, "truncation leak above budget");
  flag_truncation(out, tol);
  return out;
}

/// Convex combination sum_i w_i rho_i; weights are normalised.
inline FockOperator mixture(const std::vector<std::pair<double, FockOperator>>& parts) {
  if (parts.empty()) throw ValidationError("mixture: no components");
  double total = 0.0;
  for (const auto& [w, rho] : parts) {
    if (!(w >= 0.0)) throw ValidationError("mixture: weights must be non-negative");
    if (!(rho.space == parts.front().second.space)) throw DimensionError("mixture: components live on different spaces");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("mixture: weights sum to zero");
  FockOperator out{parts.front().second.space, ComplexMatrix::Zero(parts.front().second.space.dim(),
                                                                   parts.front().second.space.dim()),
                   OperatorKind::density, {}};
  for (const auto& [w, rho] : parts) {
    out.matrix += (w / total) * rho.matrix;
    for (const auto& warn : rho.warnings) add_warning(out.warnings, warn);
  }
  return out;
}

}  // namespace bosonic_ds
