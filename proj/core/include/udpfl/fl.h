/*
 * Copyright 2026 The UDP-FL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef UDPFL_FL_H_
#define UDPFL_FL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "udpfl/accountant.h"
#include "udpfl/dataset.h"
#include "udpfl/loss_model.h"
#include "udpfl/mechanisms.h"
#include "udpfl/mode_connectivity.h"
#include "udpfl/model_vector.h"
#include "udpfl/noise_stream.h"

namespace udpfl {

// g * min(1, c / ||g||). Throws DomainError on non-finite entries or c <= 0.
ModelVector ClipGradient(const ModelVector& g, double clip);

struct ClientConfig {
  int id = 0;
  DatasetShard shard;
  double epsilon = 8.0;
  // Calibrated with sensitivity == clip.
  MechanismParams mechanism;
  double clip = 1.0;
  double sample_rate = 0.05;
  int local_epochs = 2;
  double learning_rate = 0.01;
  // Test hook and noiseless baseline; a run with noise disabled spends no
  // privacy budget.
  bool add_noise = true;

  void Validate() const;
};

// lambda_k = (eps_max - eps_k) / eps_max.
double PenaltyCoefficient(double epsilon_k, double epsilon_max);

// w_k - lr * (g + lambda_k (w_k - w_max)).
ModelVector HeterogeneousUpdate(const ClientConfig& cfg, const ModelVector& w_k,
                                const ModelVector& g_clipped,
                                const ModelVector& w_max, double epsilon_max);

// Model of the weakest-privacy client that penalized updates are pulled to.
struct PenaltyTarget {
  ModelVector w_max;
  double epsilon_max;
};

struct LocalUpdateResult {
  ModelVector model;
  // Local steps that released a noisy gradient (empty subsamples are
  // skipped and not counted).
  int noisy_steps = 0;
};

// Runs cfg.local_epochs noisy DP-SGD steps from `global_w`: Poisson
// subsample at rate q, per-example clipping at c, one noise draw per
// coordinate on the clipped sum, division by the subsample size, SGD step.
LocalUpdateResult LocalUpdate(const ClientConfig& cfg,
                              const ModelVector& global_w,
                              const LossModel& model, NoiseStream& stream,
                              const PenaltyTarget* penalty = nullptr);

// sum_k p_k w_k / sum_k p_k over the given (selected) models.
ModelVector FedAvgAggregate(std::span<const ModelVector> models,
                            std::span<const double> weights);

struct ClientUpdate {
  int client_id;
  ModelVector model;
};

// Uniform permutation applied to the (id, model) pairs.
std::vector<ClientUpdate> ShuffleUpdates(std::vector<ClientUpdate> updates,
                                         NoiseStream& stream);

enum class Aggregator { kFedAvg, kModeConnect };

struct ServerState {
  ModelVector global_model;
  int round = 0;
  // p_k per client, summing to 1.
  std::vector<double> weights;
  Aggregator aggregator = Aggregator::kFedAvg;
  double selection_fraction = 1.0;
  bool shuffle = false;

  void Validate() const;
};

// Data-proportional p_k = n_k / sum n.
std::vector<double> DataProportionalWeights(
    std::span<const ClientConfig> clients);

struct RoundMetrics {
  int round = 0;
  double cumulative_epsilon = 0.0;
  double train_loss = 0.0;
  double eval_accuracy = 0.0;
  MechanismKind mechanism = MechanismKind::kGaussian;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

struct ModeConnectOptions {
  int steps = 100;
  double learning_rate = 0.01;
  CurveKind kind = CurveKind::kPolygonalChain;
  // Server-held data powering the curve loss. When null or empty the merge
  // falls back to ThetaStar with `smoothness`, then to plain midpoints.
  const DatasetShard* public_shard = nullptr;
  std::optional<double> smoothness;
};

// Everything a round needs besides the mutable state.
struct RoundEnvironment {
  const LossModel* model = nullptr;
  const DatasetShard* eval_shard = nullptr;
  double delta = 1e-5;
  int horizon = 150;
  std::uint64_t master_seed = 0;
  ModeConnectOptions mode_connect;
  // Compose shuffle-amplified curves instead of plain ones (opt-in; needs
  // ServerState::shuffle).
  bool shuffle_accounting = false;
};

struct RoundOutcome {
  // True when some selected client could not afford the round. The state
  // and ledgers are then unchanged and `metrics` is not meaningful.
  bool budget_exhausted = false;
  ServerState state;
  RoundMetrics metrics;
  // Noisy local steps per client (index-aligned with `clients`; 0 for
  // clients not selected).
  std::vector<int> noisy_steps;
};

// One round: select ceil(fraction * N) clients, run their local updates,
// optionally shuffle, spend every selected ledger, aggregate.
RoundOutcome RunRound(const ServerState& server,
                      std::span<const ClientConfig> clients,
                      std::span<RdpLedger> ledgers,
                      const RoundEnvironment& env);

// Mean training loss of `w` over all client shards, weighted by size.
double TrainLoss(const LossModel& model, const ModelVector& w,
                 std::span<const ClientConfig> clients);

}  // namespace udpfl

#endif  // UDPFL_FL_H_
