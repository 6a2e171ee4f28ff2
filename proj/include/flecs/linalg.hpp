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

#ifndef FLECS_LINALG_HPP_
#define FLECS_LINALG_HPP_

#include <Eigen/Dense>

#include "flecs/errors.hpp"

namespace flecs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Throw NumericError if any entry is NaN or infinite.
void ensure_finite(const Matrix& a, const char* what);
void ensure_finite(const Vector& v, const char* what);

// Two-sided eigenvalue clamp [lo, hi] applied to |lambda|; lo > 0 keeps the
// resulting operator invertible, hi caps its norm.
struct TruncationBand {
  TruncationBand(double lo_in, double hi_in) : lo(lo_in), hi(hi_in) {
    if (!(lo > 0.0) || !(lo <= hi)) {
      throw ConfigError("truncation band requires 0 < lo <= hi");
    }
  }
  double lo;
  double hi;
};

// Eigendecomposition of a symmetric matrix. Eigenvalues are sorted in
// descending order; eigenvector columns are orthonormal and sign-normalized
// so the first nonzero component of each column is positive.
struct SymEig {
  Vector values;
  Matrix vectors;
};

// Symmetrizes the input as (A + A^T)/2 before decomposing, so callers may
// pass matrices that are symmetric only up to rounding.
SymEig sym_eig(const Matrix& a);

// Thin (economy) QR of a d x m matrix with d >= m: q is d x m with
// orthonormal columns, r is m x m upper triangular, a = q * r.
struct QrThin {
  Matrix q;
  Matrix r;
};
QrThin qr_thin(const Matrix& a);

// Moore-Penrose pseudo-inverse of a square matrix. Singular values <= tol
// are treated as zero; tol < 0 selects the default rule n * eps * sigma_max.
Matrix pinv(const Matrix& m, double tol = -1.0);

// Elementwise min(max(|lambda_i|, band.lo), band.hi). Idempotent.
Vector truncate_spectrum(const Vector& lambdas, const TruncationBand& band);

// V * diag(1 / truncate(lambda)) * V^T * v for symmetric b, without forming
// the d x d inverse. Rayleigh quotients of the implied operator lie in
// [1/band.hi, 1/band.lo].
Vector truncated_inverse_apply(const Matrix& b, const Vector& v,
                               const TruncationBand& band);

}  // namespace flecs

#endif  // FLECS_LINALG_HPP_
