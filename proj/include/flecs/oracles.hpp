// Copyright 2026 The flecsim Authors. All Rights Reserved.
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
// =============================================================================

#ifndef FLECS_ORACLES_HPP_
#define FLECS_ORACLES_HPP_

#include <functional>

#include "flecs/linalg.hpp"
#include "flecs/objective.hpp"

// Slow, independent reference implementations used to validate the fast
// paths. Everything here recomputes results from first principles (central
// differences, brute-force dense algebra on a hand-rolled Jacobi
// eigensolver, plain sample statistics) and shares nothing with the
// production code beyond the dense matrix types. Test and diagnostic use
// only; nothing in the optimizer may call into this namespace.

namespace flecs {
namespace oracle {

// Central finite-difference gradient of the full-batch objective.
Vector finite_diff_gradient(const Shard& shard, const Vector& w, double step);

// Per-coordinate z-scores of a sampler's mean against a target. A zero
// sample variance yields z = 0 when the mean matches the target exactly and
// z = +inf otherwise. Use draws >= 1e4 for trustworthy scores.
struct UnbiasednessReport {
  Vector mean;
  Vector z;
  double max_abs_z = 0.0;
  int draws = 0;
  bool pass = false;  // max_abs_z <= 4
};

UnbiasednessReport statistical_unbiasedness(
    const std::function<Vector()>& sampler, const Vector& target, int draws);

// Dense reference for the clamped inverse direction -(|B| in band)^{-1} g,
// built by brute force from a full Jacobi eigendecomposition.
Vector dense_reference_truncated(const Matrix& b, const Vector& g,
                                 const TruncationBand& band);

// Dense reference for the factored direction: materializes
// B = Y pinv(M) Y^T outright, splits g into range(B) and its complement,
// applies the clamped inverse on the range and -rho beyond it. Only valid
// when Y has full column rank and M is well conditioned on it. Refuses
// d > 200; this path is deliberately cubic and dense.
Vector dense_reference_direction(const Matrix& y, const Matrix& m_small,
                                 const Vector& g, const TruncationBand& band,
                                 double rho);

}  // namespace oracle
}  // namespace flecs

#endif  // FLECS_ORACLES_HPP_
