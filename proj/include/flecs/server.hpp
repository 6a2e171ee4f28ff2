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

#ifndef FLECS_SERVER_HPP_
#define FLECS_SERVER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "flecs/protocol.hpp"

namespace flecs {

// How per-worker curvature matrices B_i are advanced each round.
enum class HessianUpdate { kLsr1, kDirect };

// Which middle matrix the limited-memory SR1 update inverts. kStandard uses
// S^T (Y - B S); kPrinted uses S^T (Y_prev_reconstruction) variant
// M - S^T Y, kept selectable for comparison runs (it degenerates to zero
// curvature whenever the reconstruction is exact).
enum class Lsr1Middle { kStandard, kPrinted };

// How the search direction is formed from curvature state.
enum class DirectionMethod { kTruncated, kFedsonia };

struct StepSizes {
  double alpha = 1.0;  // iterate step
  double gamma = 1.0;  // error-feedback step
  double beta = 1.0;   // direct-update mixing weight
  double rho = 0.0;    // FedSONIA step on the unexplored subspace
};

struct ServerState {
  Vector w;
  std::vector<Matrix> b;         // per-worker d x d symmetric curvature
  std::vector<Vector> h_shadow;  // server copy of each worker's h
  StepSizes steps;
  TruncationBand band{1e-5, 1e8};
  HessianUpdate hessian_update = HessianUpdate::kLsr1;
  Lsr1Middle lsr1_middle = Lsr1Middle::kStandard;
  DirectionMethod direction = DirectionMethod::kFedsonia;
  SketchSpec sketch;
};

ServerState make_server(int d, int n_workers, const StepSizes& steps,
                        const TruncationBand& band, HessianUpdate update,
                        Lsr1Middle middle, DirectionMethod direction,
                        const SketchSpec& sketch);

// Reconstructed per-worker and averaged quantities for one round. The
// gradient reconstruction g_i = c_i + h_shadow_i uses the shadow state from
// *before* this round; aggregate() advances the shadows afterwards, exactly
// mirroring the workers.
struct AggregateBundle {
  Vector g_avg;
  Matrix y_avg;
  Matrix m_avg;
  std::vector<Vector> g_worker;
  std::vector<Matrix> y_worker;
};

AggregateBundle aggregate(ServerState& state,
                          std::span<const UplinkMessage> msgs,
                          const Matrix& sketch);

// Truncated limited-memory SR1: B' = B + R U pinv_skip(L) U^T R^T with
// R = Y - B S, where U L U^T is the eigendecomposition of the middle matrix
// and eigenvalues with |l| < omega_floor are skipped (their inverse set to
// zero) instead of blowing up.
Matrix lsr1_update(const Matrix& b, const Matrix& y, const Matrix& m_small,
                   const Matrix& sketch, double omega_floor,
                   Lsr1Middle middle);

// Direct sketched update: B' = (1 - beta) B + beta * Y pinv(M) Y^T.
Matrix direct_update(const Matrix& b, const Matrix& y, const Matrix& m_small,
                     double beta);

// p = -(|B_avg| clamped to the band)^{-1} g via a full eigendecomposition.
Vector direction_truncated(const Matrix& b_avg, const Vector& g,
                           const TruncationBand& band);

// Factored direction: eigendecompose the m x m core R pinv(M) R^T of the
// thin QR Y = Q R, apply the clamped inverse on range(Y), and step with
// -rho on the orthogonal complement. Y == 0 falls back to -rho g.
Vector direction_fedsonia(const Matrix& y, const Matrix& m_small,
                          const Vector& g, const TruncationBand& band,
                          double rho);

// Per-round outputs the driver needs besides the mutated state.
struct RoundResult {
  std::vector<DownlinkMessage> downlinks;
  std::int64_t uplink_bits_per_node = 0;    // max over workers
  std::int64_t downlink_bits_per_node = 0;
};

// Full server round k: aggregate, update every B_i, form the direction from
// the averaged state, advance w, then sample S_{k+1} and emit downlinks
// carrying w_{k+1} and B_{k+1,i} S_{k+1}.
RoundResult server_round(ServerState& state,
                         std::span<const UplinkMessage> msgs, long round);

}  // namespace flecs

#endif  // FLECS_SERVER_HPP_
