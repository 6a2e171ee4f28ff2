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

#include "flecs/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flecs {
namespace oracle {

namespace {

// Cyclic Jacobi eigensolver for symmetric matrices. Textbook rotations, no
// pivot ordering tricks; kept independent of the production decomposition
// on purpose so the two routes can cross-check each other. Eigenvalues come
// out unsorted, which is fine because every use below sums over the whole
// spectrum.
void jacobi_eig(Matrix a, Vector& values, Matrix& vectors) {
  const Eigen::Index n = a.rows();
  vectors = Matrix::Identity(n, n);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= 1e-15 * scale * static_cast<double>(n)) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = vectors(k, p);
          const double vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values = a.diagonal();
}

double clamp_band(double lambda, const TruncationBand& band) {
  return std::min(std::max(std::abs(lambda), band.lo), band.hi);
}

}  // namespace

Vector finite_diff_gradient(const Shard& shard, const Vector& w, double step) {
  if (!(step > 0.0)) throw ConfigError("finite_diff_gradient: step must be > 0");
  Vector g(w.size());
  Vector probe = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + step;
    const double f_plus = value(shard, probe);
    probe[i] = w[i] - step;
    const double f_minus = value(shard, probe);
    probe[i] = w[i];
    g[i] = (f_plus - f_minus) / (2.0 * step);
  }
  return g;
}

UnbiasednessReport statistical_unbiasedness(
    const std::function<Vector()>& sampler, const Vector& target, int draws) {
  if (draws < 2) throw ConfigError("statistical_unbiasedness: draws must be >= 2");
  const Eigen::Index d = target.size();
  // Welford's online mean/M2 so huge draw counts stay numerically stable.
  Vector mean = Vector::Zero(d);
  Vector m2 = Vector::Zero(d);
  for (int t = 1; t <= draws; ++t) {
    const Vector x = sampler();
    if (x.size() != d) {
      throw DimensionError("statistical_unbiasedness: sampler dim mismatch");
    }
    const Vector delta = x - mean;
    mean += delta / static_cast<double>(t);
    m2.array() += delta.array() * (x - mean).array();
  }
  UnbiasednessReport report;
  report.mean = mean;
  report.z.resize(d);
  report.draws = draws;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double var = m2[i] / static_cast<double>(draws - 1);
    const double se = std::sqrt(var / static_cast<double>(draws));
    if (se > 0.0) {
      report.z[i] = (mean[i] - target[i]) / se;
    } else {
      report.z[i] = mean[i] == target[i]
                        ? 0.0
                        : std::numeric_limits<double>::infinity();
    }
  }
  report.max_abs_z = report.z.cwiseAbs().maxCoeff();
  report.pass = report.max_abs_z <= 4.0;
  return report;
}

Vector dense_reference_truncated(const Matrix& b, const Vector& g,
                                 const TruncationBand& band) {
  if (b.rows() != g.size()) {
    throw DimensionError("dense_reference_truncated: shape mismatch");
  }
  Vector values;
  Matrix vectors;
  jacobi_eig(0.5 * (b + b.transpose()), values, vectors);
  Vector p = Vector::Zero(g.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const Vector v = vectors.col(j);
    p -= v * (v.dot(g) / clamp_band(values[j], band));
  }
  return p;
}

Vector dense_reference_direction(const Matrix& y, const Matrix& m_small,
                                 const Vector& g, const TruncationBand& band,
                                 double rho) {
  const Eigen::Index d = y.rows();
  if (d > 200) {
    throw DimensionError("dense_reference_direction: refusing d > 200");
  }
  if (g.size() != d || m_small.rows() != m_small.cols() ||
      m_small.rows() != y.cols()) {
    throw DimensionError("dense_reference_direction: shape mismatch");
  }
  if (y.norm() == 0.0) return -rho * g;

  // Symmetric pseudo-inverse of M from its own Jacobi decomposition.
  Vector m_values;
  Matrix m_vectors;
  jacobi_eig(0.5 * (m_small + m_small.transpose()), m_values, m_vectors);
  const double m_tol = static_cast<double>(m_small.rows()) *
                       std::numeric_limits<double>::epsilon() *
                       m_values.cwiseAbs().maxCoeff();
  Matrix m_pinv = Matrix::Zero(m_small.rows(), m_small.cols());
  for (Eigen::Index j = 0; j < m_values.size(); ++j) {
    if (std::abs(m_values[j]) > m_tol) {
      m_pinv += m_vectors.col(j) * m_vectors.col(j).transpose() / m_values[j];
    }
  }

  const Matrix b = y * m_pinv * y.transpose();
  Vector b_values;
  Matrix b_vectors;
  jacobi_eig(0.5 * (b + b.transpose()), b_values, b_vectors);
  const double b_tol = std::max(
      static_cast<double>(d) * std::numeric_limits<double>::epsilon() *
          b_values.cwiseAbs().maxCoeff(),
      1e-300);
  Vector p = Vector::Zero(d);
  Vector g_range = Vector::Zero(d);
  for (Eigen::Index j = 0; j < b_values.size(); ++j) {
    if (std::abs(b_values[j]) <= b_tol) continue;
    const Vector v = b_vectors.col(j);
    const double coeff = v.dot(g);
    g_range += v * coeff;
    p -= v * (coeff / clamp_band(b_values[j], band));
  }
  p -= rho * (g - g_range);
  return p;
}

}  // namespace oracle
}  // namespace flecs
