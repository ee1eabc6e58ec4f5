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

#include "udpfl/experiment.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "udpfl/accountant.h"
#include "udpfl/dataset.h"
#include "udpfl/errors.h"
#include "udpfl/loss_model.h"

namespace udpfl {
namespace {

constexpr std::string_view kKeys[] = {
    "mechanism",       "epsilon",
    "delta",           "rounds",
    "clients",         "selection_fraction",
    "sample_rate",     "clip",
    "local_epochs",    "learning_rate",
    "aggregator",      "shuffle",
    "heterogeneous_epsilons", "dataset",
    "seed",            "output",
    "shuffle_accounting", "tolerance",
    "public_fraction", "curve_steps",
    "curve_learning_rate", "curve_kind",
    "smoothness",      "samples_per_client",
    "eval_samples",    "features",
    "classes",         "separation",
    "calibration_rounds",
};

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string NormalizeKey(std::string_view key) {
  std::string out = Trim(key);
  while (!out.empty() && out.front() == '-') out.erase(out.begin());
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

double ParseDouble(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end || std::isnan(out)) {
    throw ConfigError(key, "expected a real number, got `" + value + "`");
  }
  return out;
}

long long ParseInt(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key, "expected an integer, got `" + value + "`");
  }
  return out;
}

int ParseInt32(const std::string& key, const std::string& value) {
  const long long v = ParseInt(key, value);
  if (v < std::numeric_limits<int>::min() ||
      v > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "integer out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t ParseSeed(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key, "expected an unsigned 64-bit integer");
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw ConfigError(key, "expected true/false, got `" + value + "`");
}

std::vector<double> ParseDoubleList(const std::string& key,
                                    const std::string& value) {
  std::vector<double> out;
  if (Trim(value).empty()) return out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(ParseDouble(key, Trim(item)));
  }
  return out;
}

void Apply(ExperimentConfig& cfg, const std::string& key,
           const std::string& value) {
  if (key == "mechanism") {
    auto kind = ParseMechanismKind(value);
    if (!kind) {
      throw ConfigError(key, "expected gaussian, laplace or staircase");
    }
    cfg.mechanism = *kind;
  } else if (key == "epsilon") {
    cfg.epsilon = ParseDouble(key, value);
  } else if (key == "delta") {
    cfg.delta = ParseDouble(key, value);
  } else if (key == "rounds") {
    cfg.rounds = ParseInt32(key, value);
  } else if (key == "clients") {
    cfg.clients = ParseInt32(key, value);
  } else if (key == "selection_fraction") {
    cfg.selection_fraction = ParseDouble(key, value);
  } else if (key == "sample_rate") {
    cfg.sample_rate = ParseDouble(key, value);
  } else if (key == "clip") {
    cfg.clip = ParseDouble(key, value);
  } else if (key == "local_epochs") {
    cfg.local_epochs = ParseInt32(key, value);
  } else if (key == "learning_rate") {
    cfg.learning_rate = ParseDouble(key, value);
  } else if (key == "aggregator") {
    if (value == "fedavg") {
      cfg.aggregator = Aggregator::kFedAvg;
    } else if (value == "modeconnect") {
      cfg.aggregator = Aggregator::kModeConnect;
    } else {
      throw ConfigError(key, "expected fedavg or modeconnect");
    }
  } else if (key == "shuffle") {
    cfg.shuffle = ParseBool(key, value);
  } else if (key == "heterogeneous_epsilons") {
    cfg.heterogeneous_epsilons = ParseDoubleList(key, value);
  } else if (key == "dataset") {
    cfg.dataset = value;
  } else if (key == "seed") {
    cfg.seed = ParseSeed(key, value);
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "shuffle_accounting") {
    cfg.shuffle_accounting = ParseBool(key, value);
  } else if (key == "tolerance") {
    cfg.tolerance = ParseDouble(key, value);
  } else if (key == "public_fraction") {
    cfg.public_fraction = ParseDouble(key, value);
  } else if (key == "curve_steps") {
    cfg.curve_steps = ParseInt32(key, value);
  } else if (key == "curve_learning_rate") {
    cfg.curve_learning_rate = ParseDouble(key, value);
  } else if (key == "curve_kind") {
    if (value == "polygonal") {
      cfg.curve_kind = CurveKind::kPolygonalChain;
    } else if (value == "bezier") {
      cfg.curve_kind = CurveKind::kQuadraticBezier;
    } else {
      throw ConfigError(key, "expected polygonal or bezier");
    }
  } else if (key == "smoothness") {
    if (value.empty() || value == "none") {
      cfg.smoothness.reset();
    } else {
      cfg.smoothness = ParseDouble(key, value);
    }
  } else if (key == "samples_per_client") {
    cfg.samples_per_client = ParseInt32(key, value);
  } else if (key == "eval_samples") {
    cfg.eval_samples = ParseInt32(key, value);
  } else if (key == "features") {
    cfg.features = ParseInt32(key, value);
  } else if (key == "classes") {
    cfg.classes = ParseInt32(key, value);
  } else if (key == "separation") {
    cfg.separation = ParseDouble(key, value);
  } else if (key == "calibration_rounds") {
    cfg.calibration_rounds = ParseInt32(key, value);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

void Require(bool ok, const char* key, const char* message) {
  if (!ok) throw ConfigError(key, message);
}

bool Noiseless(const ExperimentConfig& cfg) {
  return std::isinf(cfg.epsilon) && cfg.heterogeneous_epsilons.empty();
}

}  // namespace

std::span<const std::string_view> ConfigKeys() { return kKeys; }

void ExperimentConfig::Validate() const {
  Require(epsilon > 0.0, "epsilon", "must be positive (inf disables noise)");
  Require(delta > 0.0 && delta < 1.0, "delta", "must lie in (0, 1)");
  Require(rounds >= 1, "rounds", "must be positive");
  Require(clients >= 1, "clients", "must be positive");
  Require(selection_fraction > 0.0 && selection_fraction <= 1.0,
          "selection_fraction", "must lie in (0, 1]");
  Require(sample_rate > 0.0 && sample_rate <= 1.0, "sample_rate",
          "must lie in (0, 1]");
  Require(clip > 0.0 && std::isfinite(clip), "clip",
          "must be a finite positive real");
  Require(local_epochs >= 1, "local_epochs", "must be positive");
  Require(learning_rate > 0.0 && std::isfinite(learning_rate),
          "learning_rate", "must be a finite positive real");
  if (!heterogeneous_epsilons.empty()) {
    Require(heterogeneous_epsilons.size() == static_cast<std::size_t>(clients),
            "heterogeneous_epsilons", "needs one entry per client");
    for (double e : heterogeneous_epsilons) {
      Require(e > 0.0 && std::isfinite(e), "heterogeneous_epsilons",
              "entries must be finite and positive");
    }
  }
  Require(!dataset.empty(), "dataset", "must be `synthetic` or a path");
  Require(!output.empty(), "output", "must be a path or `-`");
  Require(!shuffle_accounting || shuffle, "shuffle_accounting",
          "requires shuffle = true");
  Require(tolerance > 0.0 && tolerance < 1.0, "tolerance",
          "must lie in (0, 1)");
  Require(public_fraction >= 0.0 && public_fraction < 0.5, "public_fraction",
          "must lie in [0, 0.5)");
  Require(curve_steps >= 0, "curve_steps", "must be >= 0");
  Require(curve_learning_rate > 0.0, "curve_learning_rate",
          "must be positive");
  Require(!smoothness.has_value() || *smoothness > 0.0, "smoothness",
          "must be positive");
  Require(samples_per_client >= 1, "samples_per_client", "must be positive");
  Require(eval_samples >= 1, "eval_samples", "must be positive");
  Require(features >= 1, "features", "must be positive");
  Require(classes >= 2, "classes", "must be >= 2");
  Require(separation >= 0.0 && std::isfinite(separation), "separation",
          "must be finite and >= 0");
  Require(calibration_rounds >= 0, "calibration_rounds", "must be >= 0");
}

ExperimentConfig ParseConfig(
    std::string_view text,
    std::span<const std::pair<std::string, std::string>> overrides,
    std::optional<std::string> env_seed) {
  ExperimentConfig cfg;
  bool seed_set = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (Trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(Trim(line), "line " + std::to_string(line_no) +
                                        " is not `key = value`");
    }
    const std::string key = NormalizeKey(line.substr(0, eq));
    Apply(cfg, key, Trim(line.substr(eq + 1)));
    seed_set |= key == "seed";
  }
  for (const auto& [raw_key, value] : overrides) {
    const std::string key = NormalizeKey(raw_key);
    Apply(cfg, key, Trim(value));
    seed_set |= key == "seed";
  }
  if (!seed_set && env_seed.has_value() && !env_seed->empty()) {
    cfg.seed = ParseSeed("seed", Trim(*env_seed));
  }
  cfg.Validate();
  return cfg;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg) {
  cfg.Validate();
  FederatedTask task;
  if (cfg.dataset == "synthetic") {
    task = MakeSyntheticTask(
        BlobOptions{cfg.features, cfg.classes, cfg.separation}, cfg.clients,
        cfg.samples_per_client, cfg.eval_samples, cfg.public_fraction,
        cfg.seed);
  } else {
    task = SplitTable(LoadCsvShard(cfg.dataset), cfg.clients,
                      cfg.public_fraction, cfg.seed);
  }
  const int num_features = task.eval.num_features;
  int num_classes = task.eval.num_classes;
  for (const DatasetShard& s : task.clients) {
    num_classes = std::max(num_classes, s.num_classes);
  }
  num_classes = std::max(num_classes, 2);
  const SoftmaxRegression model(num_features, num_classes);

  const AlphaGrid grid = AlphaGrid::Default();
  const int horizon =
      (cfg.calibration_rounds > 0 ? cfg.calibration_rounds : cfg.rounds) *
      cfg.local_epochs;
  const bool noiseless = Noiseless(cfg);
  const int selected_count = std::max(
      1, static_cast<int>(std::ceil(cfg.selection_fraction * cfg.clients -
                                    1e-9)));

  std::map<double, MechanismParams> calibrated;
  auto mechanism_for = [&](double eps) {
    auto it = calibrated.find(eps);
    if (it != calibrated.end()) return it->second;
    CalibrationOptions options;
    options.tolerance = cfg.tolerance;
    if (cfg.shuffle_accounting) options.shuffle_clients = selected_count;
    const CalibrationResult result = CalibrateNoise(
        cfg.mechanism, cfg.clip, PrivacyBudget{eps, cfg.delta, horizon}, grid,
        options);
    calibrated.emplace(eps, result.mechanism);
    return result.mechanism;
  };

  std::vector<ClientConfig> clients;
  for (int k = 0; k < cfg.clients; ++k) {
    ClientConfig c;
    c.id = k;
    c.shard = std::move(task.clients[k]);
    c.epsilon = cfg.heterogeneous_epsilons.empty()
                    ? cfg.epsilon
                    : cfg.heterogeneous_epsilons[k];
    c.clip = cfg.clip;
    c.sample_rate = cfg.sample_rate;
    c.local_epochs = cfg.local_epochs;
    c.learning_rate = cfg.learning_rate;
    c.add_noise = !noiseless;
    c.mechanism = noiseless ? MechanismParams{cfg.mechanism, cfg.clip, 1.0, 0.5}
                            : mechanism_for(c.epsilon);
    clients.push_back(std::move(c));
  }
  std::vector<RdpLedger> ledgers(clients.size(), RdpLedger(grid));

  ServerState server;
  server.global_model = ModelVector(model.dimension());
  server.weights = DataProportionalWeights(clients);
  server.aggregator = cfg.aggregator;
  server.selection_fraction = cfg.selection_fraction;
  server.shuffle = cfg.shuffle;

  RoundEnvironment env;
  env.model = &model;
  env.eval_shard = &task.eval;
  env.delta = cfg.delta;
  env.horizon = horizon;
  env.master_seed = cfg.seed;
  env.shuffle_accounting = cfg.shuffle_accounting;
  env.mode_connect.steps = cfg.curve_steps;
  env.mode_connect.learning_rate = cfg.curve_learning_rate;
  env.mode_connect.kind = cfg.curve_kind;
  env.mode_connect.public_shard = &task.public_shard;
  env.mode_connect.smoothness = cfg.smoothness;

  // Post-hoc shuffle-amplified ledgers.
  std::vector<RdpLedger> amplified(clients.size(), RdpLedger(grid));

  ExperimentResult result;
  for (int t = 0; t < cfg.rounds; ++t) {
    RoundOutcome outcome = RunRound(server, clients, ledgers, env);
    if (outcome.budget_exhausted) {
      result.summary.budget_exhausted = true;
      break;
    }
    if (cfg.shuffle && !noiseless) {
      for (std::size_t k = 0; k < clients.size(); ++k) {
        if (outcome.noisy_steps[k] == 0) continue;
        std::vector<double> curve =
            ShuffledRdpCurve(clients[k].mechanism, grid, selected_count);
        for (double& g : curve) g *= outcome.noisy_steps[k];
        amplified[k].Compose(curve);
      }
    }
    server = std::move(outcome.state);
    result.rows.push_back(outcome.metrics);
  }

  ExperimentSummary& s = result.summary;
  s.rounds_run = static_cast<int>(result.rows.size());
  s.completed = s.rounds_run == cfg.rounds && !s.budget_exhausted;
  s.final_accuracy = result.rows.empty()
                         ? model.Accuracy(server.global_model, task.eval)
                         : result.rows.back().eval_accuracy;
  s.final_epsilon = noiseless ? std::numeric_limits<double>::infinity()
                              : SystemEpsilon(ledgers, cfg.delta);
  if (!noiseless) {
    const auto anchor = std::max_element(
        clients.begin(), clients.end(),
        [](const ClientConfig& a, const ClientConfig& b) {
          return a.epsilon < b.epsilon;
        });
    s.calibrated_scale = anchor->mechanism.scale;
    if (cfg.shuffle) s.amplified_epsilon = SystemEpsilon(amplified, cfg.delta);
  }
  return result;
}

std::string FormatNumber(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

void WriteMetricsCsv(std::ostream& out, std::span<const RoundMetrics> rows,
                     std::optional<std::string_view> experiment_id,
                     bool header) {
  if (header) {
    if (experiment_id) out << "experiment_id,";
    out << kMetricsHeader << "\n";
  }
  for (const RoundMetrics& m : rows) {
    if (experiment_id) out << *experiment_id << ",";
    out << m.round << "," << FormatNumber(m.cumulative_epsilon) << ","
        << FormatNumber(m.train_loss) << "," << FormatNumber(m.eval_accuracy)
        << "," << MechanismName(m.mechanism) << ","
        << FormatNumber(m.noise_scale) << "," << m.seed << "\n";
  }
}

std::string SummaryJson(const ExperimentSummary& summary) {
  auto number = [](double v) -> nlohmann::json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  nlohmann::ordered_json j;
  j["final_accuracy"] = number(summary.final_accuracy);
  j["final_epsilon"] = number(summary.final_epsilon);
  j["rounds_run"] = summary.rounds_run;
  j["calibrated_scale"] = number(summary.calibrated_scale);
  if (summary.amplified_epsilon) {
    j["amplified_epsilon"] = number(*summary.amplified_epsilon);
  }
  if (summary.budget_exhausted) j["budget_exhausted"] = true;
  return j.dump();
}

int ExitCode(const ExperimentSummary& summary) {
  return summary.completed ? 0 : 3;
}

std::vector<SweepEntry> ExpandSweep(const ExperimentConfig& base,
                                    std::span<const MechanismKind> mechanisms,
                                    std::span<const double> epsilons,
                                    std::span<const std::uint64_t> seeds) {
  std::vector<SweepEntry> out;
  for (MechanismKind kind : mechanisms) {
    for (double eps : epsilons) {
      for (std::uint64_t seed : seeds) {
        ExperimentConfig cfg = base;
        cfg.mechanism = kind;
        cfg.epsilon = eps;
        cfg.seed = seed;
        cfg.Validate();
        out.push_back({std::to_string(out.size()), std::move(cfg)});
      }
    }
  }
  return out;
}

SweepResult RunSweep(std::span<const SweepEntry> entries, std::ostream& csv,
                     int jobs) {
  csv << "experiment_id," << kMetricsHeader << "\n";
  SweepResult result;
  auto run_one = [](const SweepEntry& entry) {
    const ExperimentResult r = RunExperiment(entry.config);
    std::ostringstream buffer;
    WriteMetricsCsv(buffer, r.rows);
    return std::pair{buffer.str(), r.summary};
  };
  auto emit = [&](const SweepEntry& entry, const std::string& buffered,
                  const ExperimentSummary& summary) {
    std::istringstream in(buffered);
    std::string line;
    std::getline(in, line);
    if (line != kMetricsHeader) {
      throw std::runtime_error("experiment " + entry.id +
                               " produced a different CSV schema: " + line);
    }
    std::ostringstream block;
    while (std::getline(in, line)) block << entry.id << "," << line << "\n";
    csv << block.str();
    result.summaries.emplace_back(entry.id, summary);
    result.all_completed &= summary.completed;
  };

  const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t begin = 0; begin < entries.size(); begin += width) {
    const std::size_t end = std::min(entries.size(), begin + width);
    std::vector<std::future<std::pair<std::string, ExperimentSummary>>> batch;
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(width > 1 ? std::launch::async
                                           : std::launch::deferred,
                                 run_one, std::cref(entries[i])));
    }
    for (std::size_t i = begin; i < end; ++i) {
      auto [buffered, summary] = batch[i - begin].get();
      emit(entries[i], buffered, summary);
    }
  }
  return result;
}

}  // namespace udpfl
