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

#ifndef UDPFL_EXPERIMENT_H_
#define UDPFL_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "udpfl/fl.h"
#include "udpfl/mechanisms.h"
#include "udpfl/mode_connectivity.h"

namespace udpfl {

// Frozen CSV schema of per-round metrics.
inline constexpr std::string_view kMetricsHeader =
    "round,cumulative_epsilon,train_loss,eval_accuracy,mechanism,noise_scale,"
    "seed";

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error("config key `" + key + "`: " + message),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  MechanismKind mechanism = MechanismKind::kStaircase;
  // +infinity disables noise (non-private baseline).
  double epsilon = 8.0;
  double delta = 1e-5;
  int rounds = 150;
  int clients = 10;
  double selection_fraction = 1.0;
  double sample_rate = 0.05;
  double clip = 1.0;
  int local_epochs = 2;
  double learning_rate = 0.01;
  Aggregator aggregator = Aggregator::kFedAvg;
  bool shuffle = false;
  // Per-client budgets; empty means every client uses `epsilon`.
  std::vector<double> heterogeneous_epsilons;
  // "synthetic" or a CSV path.
  std::string dataset = "synthetic";
  std::uint64_t seed = 0;
  // "-" writes to stdout.
  std::string output = "-";

  // Accounting and calibration.
  bool shuffle_accounting = false;
  double tolerance = 1e-4;

  // Mode-connectivity aggregation.
  double public_fraction = 0.05;
  int curve_steps = 100;
  double curve_learning_rate = 0.01;
  CurveKind curve_kind = CurveKind::kPolygonalChain;
  std::optional<double> smoothness;

  // Synthetic task shape.
  int samples_per_client = 200;
  int eval_samples = 1000;
  int features = 20;
  int classes = 10;
  double separation = 0.6;
  // Rounds the noise is calibrated for; 0 means `rounds`. A smaller value
  // makes the run exhaust its budget early.
  int calibration_rounds = 0;

  // Throws ConfigError naming the first offending key.
  void Validate() const;
};

// Every key ParseConfig accepts, in snake_case.
std::span<const std::string_view> ConfigKeys();

// Parses `key = value` lines (`#` starts a comment; keys may be written
// snake_case or kebab-case) on top of the defaults, then applies
// `overrides` (same keys, later wins). `env_seed` (the UDPFL_SEED value)
// sets the seed only when neither the text nor the overrides do.
ExperimentConfig ParseConfig(
    std::string_view text,
    std::span<const std::pair<std::string, std::string>> overrides = {},
    std::optional<std::string> env_seed = std::nullopt);

struct ExperimentSummary {
  double final_accuracy = 0.0;
  double final_epsilon = 0.0;
  int rounds_run = 0;
  // 0 for noiseless runs; for heterogeneous budgets the scale of the
  // largest-epsilon client.
  double calibrated_scale = 0.0;
  bool completed = false;
  bool budget_exhausted = false;
  // Post-hoc shuffle-amplified epsilon when shuffling is on.
  std::optional<double> amplified_epsilon;
};

struct ExperimentResult {
  std::vector<RoundMetrics> rows;
  ExperimentSummary summary;
};

// Calibrates, runs up to cfg.rounds rounds and stops early on budget
// exhaustion. Throws InfeasibleBudgetError if calibration fails.
ExperimentResult RunExperiment(const ExperimentConfig& cfg);

// "%.6g"; infinities print as "inf".
std::string FormatNumber(double value);

// Header plus one row per round; `experiment_id` adds a leading column.
void WriteMetricsCsv(std::ostream& out, std::span<const RoundMetrics> rows,
                     std::optional<std::string_view> experiment_id = {},
                     bool header = true);

// {"final_accuracy":..,"final_epsilon":..,"rounds_run":..,
//  "calibrated_scale":..} on one line; non-finite numbers become null.
std::string SummaryJson(const ExperimentSummary& summary);

// 0 iff every configured round ran within budget.
int ExitCode(const ExperimentSummary& summary);

struct SweepEntry {
  std::string id;
  ExperimentConfig config;
};

// Cartesian product over mechanisms x epsilons x seeds, ids "0", "1", ...
std::vector<SweepEntry> ExpandSweep(const ExperimentConfig& base,
                                    std::span<const MechanismKind> mechanisms,
                                    std::span<const double> epsilons,
                                    std::span<const std::uint64_t> seeds);

struct SweepResult {
  std::vector<std::pair<std::string, ExperimentSummary>> summaries;
  bool all_completed = true;
};

// Runs each entry (up to `jobs` at once), buffers its CSV and appends it
// atomically after an `experiment_id` column. Throws std::runtime_error if
// an experiment's buffered header differs from kMetricsHeader.
SweepResult RunSweep(std::span<const SweepEntry> entries, std::ostream& csv,
                     int jobs = 1);

}  // namespace udpfl

#endif  // UDPFL_EXPERIMENT_H_
