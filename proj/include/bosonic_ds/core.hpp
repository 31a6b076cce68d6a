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

#pragma once

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace bosonic_ds {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not fit together (odd phase-space dimension, mode mismatch).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input violates a physical or structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Truncated Fock space too small for the requested state or operation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Internal self-check failed (calibration, reconstruction).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Numerical tolerances shared by all modules. Every comparison reads from
/// here so callers can tighten or relax them per experiment.
struct Tolerances {
  double symplectic = 1e-10;
  double symmetry = 1e-10;
  double uncertainty = 1e-9;
  double hermitian = 1e-10;
  double trace = 1e-8;
  double psd = 1e-8;
  double leak_budget = 1e-6;
  double unitary_leak = 1e-8;
  double grid_boundary = 1e-4;
  double sigma_psd = 1e-8;
  double classify = 1e-9;
};

/// Worker count: BOSONIC_DS_THREADS if set and positive, else hardware
/// concurrency.
inline unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BOSONIC_DS_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return hw;
}

/// Runs fn(i) for i in [0, count). Each index is visited exactly once, so
/// writing results to slot i keeps output independent of the schedule.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  unsigned workers = std::min<std::size_t>(thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
}

/// Pairwise summation; result does not depend on how the terms were produced.
template <class T>
T pairwise_sum(std::span<const T> xs) {
  if (xs.empty()) return T{};
  if (xs.size() <= 8) {
    T acc{};
    for (const T& x : xs) acc += x;
    return acc;
  }
  std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double max_abs(const RealMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace bosonic_ds
