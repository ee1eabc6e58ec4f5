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

#include "udpfl/fl.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "udpfl/errors.h"

namespace udpfl {
namespace {

// Index of the client with the largest epsilon among `selected`; ties go to
// the smallest id.
std::size_t WeakestPrivacyClient(std::span<const ClientConfig> clients,
                                 std::span<const std::size_t> selected) {
  std::size_t best = selected.front();
  for (std::size_t k : selected) {
    const ClientConfig& c = clients[k];
    const ClientConfig& b = clients[best];
    if (c.epsilon > b.epsilon || (c.epsilon == b.epsilon && c.id < b.id)) {
      best = k;
    }
  }
  return best;
}

std::vector<std::size_t> SelectClients(std::size_t n, double fraction,
                                       NoiseStream& stream) {
  const std::size_t count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(fraction * n - 1e-9)), 1, n);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + stream.Below(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

ModelVector ClipGradient(const ModelVector& g, double clip) {
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    throw DomainError("clip bound must be a finite positive real");
  }
  if (!g.AllFinite()) throw DomainError("gradient has non-finite entries");
  const double norm = g.Norm();
  if (norm <= clip) return g;
  return (clip / norm) * g;
}

void ClientConfig::Validate() const {
  shard.Validate();
  if (!(epsilon > 0.0)) throw DomainError("client epsilon must be positive");
  if (!(clip > 0.0)) throw DomainError("clip must be positive");
  if (!(sample_rate > 0.0 && sample_rate <= 1.0)) {
    throw DomainError("sample rate must lie in (0, 1]");
  }
  if (local_epochs < 1) throw DomainError("local epochs must be positive");
  if (!(learning_rate > 0.0)) {
    throw DomainError("learning rate must be positive");
  }
  if (add_noise) {
    mechanism.Validate();
    if (std::abs(mechanism.sensitivity - clip) > 1e-12 * clip) {
      throw MismatchError("mechanism sensitivity must equal the clip bound");
    }
  }
}

double PenaltyCoefficient(double epsilon_k, double epsilon_max) {
  if (!(epsilon_k > 0.0)) throw DomainError("client epsilon must be positive");
  if (epsilon_max < epsilon_k) {
    throw DomainError("eps_max must be >= the client's epsilon");
  }
  if (std::isinf(epsilon_max)) return std::isinf(epsilon_k) ? 0.0 : 1.0;
  return (epsilon_max - epsilon_k) / epsilon_max;
}

ModelVector HeterogeneousUpdate(const ClientConfig& cfg, const ModelVector& w_k,
                                const ModelVector& g_clipped,
                                const ModelVector& w_max, double epsilon_max) {
  CheckSameDimension(w_k, g_clipped);
  CheckSameDimension(w_k, w_max);
  const double lambda = PenaltyCoefficient(cfg.epsilon, epsilon_max);
  ModelVector out = w_k;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] -= cfg.learning_rate *
              (g_clipped[i] + lambda * (w_k[i] - w_max[i]));
  }
  return out;
}

LocalUpdateResult LocalUpdate(const ClientConfig& cfg,
                              const ModelVector& global_w,
                              const LossModel& model, NoiseStream& stream,
                              const PenaltyTarget* penalty) {
  cfg.Validate();
  if (global_w.size() != model.dimension()) {
    throw MismatchError("global model dimension does not match the model");
  }
  LocalUpdateResult result{global_w, 0};
  ModelVector& w = result.model;
  ModelVector sum(w.size());
  ModelVector example(w.size());
  std::vector<std::size_t> batch;
  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    batch.clear();
    for (std::size_t i = 0; i < cfg.shard.size(); ++i) {
      if (stream.Uniform() < cfg.sample_rate) batch.push_back(i);
    }
    if (batch.empty()) continue;
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t i : batch) {
      model.ExampleGradient(w, cfg.shard, i, example.span());
      const double norm = example.Norm();
      const double scale = norm > cfg.clip ? cfg.clip / norm : 1.0;
      sum.Axpy(scale, example);
    }
    if (cfg.add_noise) {
      for (double& v : sum) v += SampleNoise(cfg.mechanism, stream);
    }
    sum *= 1.0 / static_cast<double>(batch.size());
    if (penalty != nullptr) {
      w = HeterogeneousUpdate(cfg, w, sum, penalty->w_max,
                              penalty->epsilon_max);
    } else {
      w.Axpy(-cfg.learning_rate, sum);
    }
    ++result.noisy_steps;
  }
  return result;
}

ModelVector FedAvgAggregate(std::span<const ModelVector> models,
                            std::span<const double> weights) {
  if (models.empty()) throw DomainError("need at least one model to average");
  if (weights.size() != models.size()) {
    throw MismatchError("one weight per model is required");
  }
  double total = 0.0;
  for (double p : weights) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DomainError("aggregation weights must be finite and >= 0");
    }
    total += p;
  }
  if (!(total > 0.0)) throw DomainError("aggregation weights sum to zero");
  ModelVector out(models.front().size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    CheckSameDimension(out, models[k]);
    if (weights[k] == 0.0) continue;
    out.Axpy(weights[k] / total, models[k]);
  }
  return out;
}

std::vector<ClientUpdate> ShuffleUpdates(std::vector<ClientUpdate> updates,
                                         NoiseStream& stream) {
  if (updates.empty()) throw DomainError("nothing to shuffle");
  for (std::size_t i = updates.size() - 1; i > 0; --i) {
    const std::size_t j = stream.Below(i + 1);
    std::swap(updates[i], updates[j]);
  }
  return updates;
}

void ServerState::Validate() const {
  if (!(selection_fraction > 0.0 && selection_fraction <= 1.0)) {
    throw DomainError("selection fraction must lie in (0, 1]");
  }
  double total = 0.0;
  for (double p : weights) {
    if (!(p >= 0.0)) throw DomainError("client weights must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("client weights must sum to 1");
  }
  if (!global_model.AllFinite()) {
    throw DomainError("global model has non-finite entries");
  }
}

std::vector<double> DataProportionalWeights(
    std::span<const ClientConfig> clients) {
  double total = 0.0;
  for (const ClientConfig& c : clients) total += c.shard.size();
  std::vector<double> weights;
  for (const ClientConfig& c : clients) weights.push_back(c.shard.size() / total);
  return weights;
}

double TrainLoss(const LossModel& model, const ModelVector& w,
                 std::span<const ClientConfig> clients) {
  double total = 0.0;
  double count = 0.0;
  for (const ClientConfig& c : clients) {
    total += model.Loss(w, c.shard) * c.shard.size();
    count += c.shard.size();
  }
  return count > 0.0 ? total / count : 0.0;
}

RoundOutcome RunRound(const ServerState& server,
                      std::span<const ClientConfig> clients,
                      std::span<RdpLedger> ledgers,
                      const RoundEnvironment& env) {
  server.Validate();
  if (env.model == nullptr || env.eval_shard == nullptr) {
    throw DomainError("round environment needs a model and an eval shard");
  }
  if (clients.empty()) throw DomainError("no clients");
  if (ledgers.size() != clients.size() ||
      server.weights.size() != clients.size()) {
    throw MismatchError("clients, ledgers and weights must align");
  }
  const std::uint64_t round = static_cast<std::uint64_t>(server.round);

  NoiseStream selection_stream(env.master_seed, round, 0,
                               StreamPurpose::kClientSelection);
  const std::vector<std::size_t> selected =
      SelectClients(clients.size(), server.selection_fraction,
                    selection_stream);

  // The weakest-privacy client trains first so the others can be pulled
  // toward its fresh model.
  const std::size_t anchor = WeakestPrivacyClient(clients, selected);
  const double eps_max = clients[anchor].epsilon;
  bool heterogeneous = false;
  for (std::size_t k : selected) {
    if (clients[k].epsilon != eps_max) heterogeneous = true;
  }

  std::vector<LocalUpdateResult> results(clients.size());
  auto train = [&](std::size_t k, const PenaltyTarget* penalty) {
    NoiseStream stream(env.master_seed, round,
                       static_cast<std::uint64_t>(clients[k].id),
                       StreamPurpose::kGradientNoise);
    results[k] = LocalUpdate(clients[k], server.global_model, *env.model,
                             stream, penalty);
  };
  train(anchor, nullptr);
  std::optional<PenaltyTarget> target;
  if (heterogeneous) target = PenaltyTarget{results[anchor].model, eps_max};
  for (std::size_t k : selected) {
    if (k != anchor) train(k, target ? &*target : nullptr);
  }

  // Spend: all-or-nothing across the selected clients.
  std::vector<RdpLedger> updated(ledgers.begin(), ledgers.end());
  const std::int64_t shuffle_n =
      server.shuffle && env.shuffle_accounting
          ? static_cast<std::int64_t>(selected.size())
          : 0;
  for (std::size_t k : selected) {
    const ClientConfig& c = clients[k];
    if (!c.add_noise || results[k].noisy_steps == 0) continue;
    std::vector<double> curve =
        shuffle_n > 0 ? ShuffledRdpCurve(c.mechanism, ledgers[k].grid(),
                                         shuffle_n)
                      : RdpCurve(c.mechanism, ledgers[k].grid());
    for (double& g : curve) g *= results[k].noisy_steps;
    const SpendOutcome spend =
        Spend(updated[k], curve, PrivacyBudget{c.epsilon, env.delta,
                                               env.horizon});
    if (spend.halted) {
      RoundOutcome halted;
      halted.budget_exhausted = true;
      halted.state = server;
      return halted;
    }
  }
  std::copy(updated.begin(), updated.end(), ledgers.begin());

  std::vector<ClientUpdate> updates;
  for (std::size_t k : selected) {
    updates.push_back({clients[k].id, std::move(results[k].model)});
  }
  if (server.shuffle) {
    NoiseStream shuffle_stream(env.master_seed, round, 0,
                               StreamPurpose::kShuffle);
    updates = ShuffleUpdates(std::move(updates), shuffle_stream);
  }

  // Client ids map back to positions for the weights.
  auto position_of = [&](int id) {
    for (std::size_t k = 0; k < clients.size(); ++k) {
      if (clients[k].id == id) return k;
    }
    throw DomainError("update from unknown client " + std::to_string(id));
  };

  RoundOutcome out;
  out.state = server;
  out.noisy_steps.assign(clients.size(), 0);
  for (std::size_t k : selected) out.noisy_steps[k] = results[k].noisy_steps;
  if (server.aggregator == Aggregator::kFedAvg) {
    std::vector<ModelVector> models;
    std::vector<double> weights;
    for (ClientUpdate& u : updates) {
      weights.push_back(server.weights[position_of(u.client_id)]);
      models.push_back(std::move(u.model));
    }
    out.state.global_model = FedAvgAggregate(models, weights);
  } else {
    std::sort(updates.begin(), updates.end(),
              [](const ClientUpdate& a, const ClientUpdate& b) {
                return a.client_id < b.client_id;
              });
    std::vector<ModelVector> models;
    std::vector<double> weights;
    for (ClientUpdate& u : updates) {
      weights.push_back(server.weights[position_of(u.client_id)]);
      models.push_back(std::move(u.model));
    }
    NoiseStream curve_stream(env.master_seed, round, 0,
                             StreamPurpose::kCurveTraining);
    const ModeConnectOptions& mc = env.mode_connect;
    const bool has_public =
        mc.public_shard != nullptr && mc.public_shard->size() > 0;
    if (has_public) {
      CurveTrainConfig cfg{mc.steps, mc.learning_rate, env.model,
                           mc.public_shard, mc.kind};
      out.state.global_model = ModeConnectAggregate(models, cfg, curve_stream);
    } else if (mc.smoothness.has_value()) {
      const ModelVector v_bar = FedAvgAggregate(models, weights);
      const ModelVector theta =
          ThetaStar(*mc.smoothness, server.global_model, v_bar);
      out.state.global_model = BezierFedAvgUpdate(
          v_bar, theta, server.global_model, curve_stream.Uniform());
    } else {
      CurveTrainConfig midpoints{0, mc.learning_rate, nullptr, nullptr,
                                 mc.kind};
      out.state.global_model =
          ModeConnectAggregate(models, midpoints, curve_stream);
    }
  }
  out.state.round = server.round + 1;

  RoundMetrics& m = out.metrics;
  m.round = out.state.round;
  bool any_noiseless = false;
  for (const ClientConfig& c : clients) any_noiseless |= !c.add_noise;
  m.cumulative_epsilon =
      any_noiseless ? std::numeric_limits<double>::infinity()
                    : SystemEpsilon(std::span<const RdpLedger>(ledgers.data(),
                                                               ledgers.size()),
                                    env.delta);
  m.train_loss = TrainLoss(*env.model, out.state.global_model, clients);
  m.eval_accuracy = env.model->Accuracy(out.state.global_model,
                                        *env.eval_shard);
  std::size_t all_anchor = 0;
  for (std::size_t k = 1; k < clients.size(); ++k) {
    if (clients[k].epsilon > clients[all_anchor].epsilon ||
        (clients[k].epsilon == clients[all_anchor].epsilon &&
         clients[k].id < clients[all_anchor].id)) {
      all_anchor = k;
    }
  }
  m.mechanism = clients[all_anchor].mechanism.kind;
  m.noise_scale =
      clients[all_anchor].add_noise ? clients[all_anchor].mechanism.scale : 0.0;
  m.seed = env.master_seed;
  return out;
}

}  // namespace udpfl
