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

#include "flecs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace flecs {

void ensure_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite entries");
  }
}

void ensure_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite entries");
  }
}

SymEig sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("sym_eig: matrix must be square");
  }
  ensure_finite(a, "sym_eig");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericError("sym_eig: eigendecomposition did not converge");
  }
  const Eigen::Index n = a.rows();
  SymEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen sorts ascending; flip to descending and fix each column's sign.
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = n - 1 - j;
    out.values[j] = solver.eigenvalues()[src];
    Vector col = solver.eigenvectors().col(src);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (col[i] != 0.0) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    }
    out.vectors.col(j) = col;
  }
  return out;
}

QrThin qr_thin(const Matrix& a) {
  if (a.rows() < a.cols()) {
    throw DimensionError("qr_thin: need rows >= cols");
  }
  ensure_finite(a, "qr_thin");
  Eigen::HouseholderQR<Matrix> qr(a);
  const Eigen::Index m = a.cols();
  QrThin out;
  out.q = qr.householderQ() * Matrix::Identity(a.rows(), m);
  out.r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  return out;
}

Matrix pinv(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("pinv: matrix must be square");
  }
  ensure_finite(m, "pinv");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;
  if (sigma_max == 0.0) {
    return Matrix::Zero(m.cols(), m.rows());
  }
  const double cutoff =
      tol >= 0.0 ? tol
                 : static_cast<double>(m.rows()) *
                       std::numeric_limits<double>::epsilon() * sigma_max;
  Vector inv = Vector::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > cutoff) inv[i] = 1.0 / sigma[i];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector truncate_spectrum(const Vector& lambdas, const TruncationBand& band) {
  Vector out(lambdas.size());
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    out[i] = std::min(std::max(std::abs(lambdas[i]), band.lo), band.hi);
  }
  return out;
}

Vector truncated_inverse_apply(const Matrix& b, const Vector& v,
                               const TruncationBand& band) {
  if (b.rows() != v.size()) {
    throw DimensionError("truncated_inverse_apply: shape mismatch");
  }
  const SymEig eig = sym_eig(b);
  const Vector clamped = truncate_spectrum(eig.values, band);
  const Vector coeffs = eig.vectors.transpose() * v;
  return eig.vectors * (coeffs.array() / clamped.array()).matrix();
}

}  // namespace flecs
