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

#include "flecs/server.hpp"

#include <algorithm>
#include <cmath>

namespace flecs {

ServerState make_server(int d, int n_workers, const StepSizes& steps,
                        const TruncationBand& band, HessianUpdate update,
                        Lsr1Middle middle, DirectionMethod direction,
                        const SketchSpec& sketch) {
  if (d < 1) throw ConfigError("server dimension must be >= 1");
  if (n_workers < 1) throw ConfigError("server needs at least one worker");
  ServerState state;
  state.w = Vector::Zero(d);
  state.b.assign(static_cast<std::size_t>(n_workers), Matrix::Zero(d, d));
  state.h_shadow.assign(static_cast<std::size_t>(n_workers), Vector::Zero(d));
  state.steps = steps;
  state.band = band;
  state.hessian_update = update;
  state.lsr1_middle = middle;
  state.direction = direction;
  state.sketch = sketch;
  return state;
}

AggregateBundle aggregate(ServerState& state,
                          std::span<const UplinkMessage> msgs,
                          const Matrix& sketch) {
  const std::size_t n = state.b.size();
  if (msgs.size() != n) {
    throw DimensionError("aggregate: one message per worker required");
  }
  const Eigen::Index d = state.w.size();
  const Eigen::Index m = sketch.cols();
  AggregateBundle out;
  out.g_avg = Vector::Zero(d);
  out.y_avg = Matrix::Zero(d, m);
  out.m_avg = Matrix::Zero(m, m);
  out.g_worker.reserve(n);
  out.y_worker.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const UplinkMessage& msg = msgs[i];
    if (msg.c.value.size() != d || msg.big_c.value.rows() != d ||
        msg.big_c.value.cols() != m || msg.m_small.rows() != m ||
        msg.m_small.cols() != m) {
      throw DimensionError("aggregate: message shape mismatch");
    }
    // Reconstruction must use the shadow from before this round.
    out.g_worker.push_back(msg.c.value + state.h_shadow[i]);
    out.y_worker.push_back(msg.big_c.value + state.b[i] * sketch);
    out.g_avg += out.g_worker.back();
    out.y_avg += out.y_worker.back();
    out.m_avg += msg.m_small;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.g_avg *= inv_n;
  out.y_avg *= inv_n;
  out.m_avg *= inv_n;
  for (std::size_t i = 0; i < n; ++i) {
    state.h_shadow[i] += state.steps.gamma * msgs[i].c.value;
  }
  return out;
}

Matrix lsr1_update(const Matrix& b, const Matrix& y, const Matrix& m_small,
                   const Matrix& sketch, double omega_floor,
                   Lsr1Middle middle) {
  const Matrix residual = y - b * sketch;
  const Matrix w = middle == Lsr1Middle::kStandard
                       ? Matrix(m_small - sketch.transpose() * b * sketch)
                       : Matrix(m_small - sketch.transpose() * y);
  const SymEig eig = sym_eig(w);
  Vector inv = Vector::Zero(eig.values.size());
  for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
    // Near-singular middle eigenvalues are skipped rather than inverted.
    if (std::abs(eig.values[j]) >= omega_floor) inv[j] = 1.0 / eig.values[j];
  }
  const Matrix core =
      eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
  const Matrix next = b + residual * core * residual.transpose();
  return 0.5 * (next + next.transpose());
}

Matrix direct_update(const Matrix& b, const Matrix& y, const Matrix& m_small,
                     double beta) {
  const Matrix fresh = y * pinv(m_small) * y.transpose();
  const Matrix next = (1.0 - beta) * b + beta * fresh;
  return 0.5 * (next + next.transpose());
}

Vector direction_truncated(const Matrix& b_avg, const Vector& g,
                           const TruncationBand& band) {
  return -truncated_inverse_apply(b_avg, g, band);
}

Vector direction_fedsonia(const Matrix& y, const Matrix& m_small,
                          const Vector& g, const TruncationBand& band,
                          double rho) {
  if (y.rows() != g.size()) {
    throw DimensionError("direction_fedsonia: shape mismatch");
  }
  if (y.norm() == 0.0) {
    return -rho * g;  // no curvature signal yet anywhere
  }
  const QrThin qr = qr_thin(y);
  const SymEig eig = sym_eig(Matrix(qr.r * pinv(m_small) * qr.r.transpose()));
  const Matrix v_tilde = qr.q * eig.vectors;
  const Vector g_par = qr.q * (qr.q.transpose() * g);
  const Vector g_perp = g - g_par;
  const Vector clamped = truncate_spectrum(eig.values, band);
  const Vector coeffs = v_tilde.transpose() * g_par;
  return -v_tilde * (coeffs.array() / clamped.array()).matrix() -
         rho * g_perp;
}

RoundResult server_round(ServerState& state,
                         std::span<const UplinkMessage> msgs, long round) {
  const int d = static_cast<int>(state.w.size());
  const Matrix sketch = sample_sketch(state.sketch, d, round);
  const AggregateBundle bundle = aggregate(state, msgs, sketch);

  const std::size_t n = state.b.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (state.hessian_update == HessianUpdate::kLsr1) {
      state.b[i] = lsr1_update(state.b[i], bundle.y_worker[i],
                               msgs[i].m_small, sketch, state.band.lo,
                               state.lsr1_middle);
    } else {
      state.b[i] = direct_update(state.b[i], bundle.y_worker[i],
                                 msgs[i].m_small, state.steps.beta);
    }
  }

  Vector p;
  if (state.direction == DirectionMethod::kTruncated) {
    Matrix b_avg = Matrix::Zero(d, d);
    for (const Matrix& bi : state.b) b_avg += bi;
    b_avg /= static_cast<double>(n);
    p = direction_truncated(b_avg, bundle.g_avg, state.band);
  } else {
    p = direction_fedsonia(bundle.y_avg, bundle.m_avg, bundle.g_avg,
                           state.band, state.steps.rho);
  }
  ensure_finite(p, "server direction");
  state.w += state.steps.alpha * p;

  const Matrix next_sketch = sample_sketch(state.sketch, d, round + 1);
  RoundResult result;
  result.downlinks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    DownlinkMessage down;
    down.w = state.w;
    down.bs = state.b[i] * next_sketch;
    down.bits = downlink_bits(d, state.sketch.m);
    result.downlinks.push_back(std::move(down));
    result.uplink_bits_per_node =
        std::max(result.uplink_bits_per_node, msgs[i].bits);
  }
  result.downlink_bits_per_node = downlink_bits(d, state.sketch.m);
  return result;
}

}  // namespace flecs
