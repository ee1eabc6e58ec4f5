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

// udpfl: noise calibration, federated simulation and utility bounds.
//
//   udpfl calibrate --mechanism gaussian,staircase --epsilon 2,8 --rounds 300
//   udpfl run --config exp.conf --epsilon 8 --output metrics.csv
//   udpfl sweep --mechanisms gaussian,laplace,staircase --epsilons 2,4,8
//       --seeds 5 --output sweep.csv
//   udpfl bounds --mechanism staircase --scale 0.5 --m 210 --rounds 300

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "udpfl/accountant.h"
#include "udpfl/errors.h"
#include "udpfl/experiment.h"
#include "udpfl/mechanisms.h"
#include "udpfl/utility_bounds.h"

namespace {

using nlohmann::ordered_json;
using udpfl::MechanismKind;

constexpr int kExitUsage = 2;

std::string Kebab(std::string_view key) {
  std::string out(key);
  for (char& c : out) {
    if (c == '_') c = '-';
  }
  return out;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

MechanismKind MechanismOrThrow(const std::string& name) {
  auto kind = udpfl::ParseMechanismKind(name);
  if (!kind) throw CLI::ValidationError("unknown mechanism: " + name);
  return *kind;
}

std::vector<MechanismKind> MechanismList(const std::string& text) {
  std::vector<MechanismKind> out;
  for (const std::string& name : SplitList(text)) {
    if (name == "all") {
      out.assign(std::begin(udpfl::kAllMechanismKinds),
                 std::end(udpfl::kAllMechanismKinds));
    } else {
      out.push_back(MechanismOrThrow(name));
    }
  }
  return out;
}

std::vector<double> DoubleList(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : SplitList(text)) out.push_back(std::stod(item));
  return out;
}

ordered_json Number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

// Options mirroring every experiment config key, collected as overrides.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file");
    for (std::string_view key : udpfl::ConfigKeys()) {
      app->add_option("--" + Kebab(key), values[std::string(key)],
                      "config key `" + std::string(key) + "`");
    }
  }

  udpfl::ExperimentConfig Parse(const CLI::App* app) const {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config: " + config_path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      text = buffer.str();
    }
    std::vector<std::pair<std::string, std::string>> overrides;
    for (std::string_view key : udpfl::ConfigKeys()) {
      if (app->count("--" + Kebab(key)) > 0) {
        overrides.emplace_back(std::string(key),
                               values.at(std::string(key)));
      }
    }
    std::optional<std::string> env_seed;
    if (const char* env = std::getenv("UDPFL_SEED")) env_seed = env;
    return udpfl::ParseConfig(text, overrides, env_seed);
  }
};

// Opens `path` for writing, or returns std::cout for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write to " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int RunCalibrate(const std::string& mechanisms, const std::string& epsilons,
                 double delta, int rounds, double sensitivity,
                 double tolerance, std::int64_t shuffle_clients) {
  const udpfl::AlphaGrid grid = udpfl::AlphaGrid::Default();
  udpfl::CalibrationOptions options;
  options.tolerance = tolerance;
  options.shuffle_clients = shuffle_clients;
  for (MechanismKind kind : MechanismList(mechanisms)) {
    for (double eps : DoubleList(epsilons)) {
      const udpfl::PrivacyBudget budget{eps, delta, rounds};
      const udpfl::CalibrationResult r =
          udpfl::CalibrateNoise(kind, sensitivity, budget, grid, options);
      ordered_json j;
      j["mechanism"] = udpfl::MechanismName(kind);
      j["sensitivity"] = r.mechanism.sensitivity;
      j["scale"] = r.mechanism.scale;
      if (kind == MechanismKind::kStaircase) j["nu"] = r.mechanism.nu;
      j["target_epsilon"] = eps;
      j["delta"] = delta;
      j["horizon"] = rounds;
      j["achieved_epsilon"] = r.achieved_epsilon;
      j["minimizing_alpha"] = r.minimizing_alpha;
      j["iterations"] = r.iterations;
      if (shuffle_clients > 0) j["shuffle_clients"] = shuffle_clients;
      std::cout << j.dump() << "\n";
    }
  }
  return 0;
}

int RunBounds(const std::string& mechanism, double sensitivity, double scale,
              std::optional<double> nu, std::int64_t m, std::int64_t rounds) {
  const MechanismKind kind = MechanismOrThrow(mechanism);
  udpfl::MechanismParams params{kind, sensitivity, scale, 0.5};
  if (kind == MechanismKind::kStaircase) {
    params.nu = nu.value_or(udpfl::OptimalNu(scale).nu);
  }
  const udpfl::BoundQuery query{params, m, rounds};
  ordered_json j;
  j["mechanism"] = udpfl::MechanismName(kind);
  j["sensitivity"] = sensitivity;
  j["scale"] = scale;
  if (kind == MechanismKind::kStaircase) j["nu"] = params.nu;
  j["loss_length"] = m;
  j["rounds"] = rounds;
  j["expected_abs_noise"] = udpfl::ExpectedAbsNoise(params);
  j["pure_dp_epsilon"] = Number(udpfl::PureDpEpsilon(params));
  const double numeric = udpfl::L1Bound(query, udpfl::BoundMode::kNumeric);
  j["l1_bound"] = numeric;
  if (kind == MechanismKind::kStaircase) {
    const double published =
        udpfl::L1Bound(query, udpfl::BoundMode::kAsPublished);
    j["l1_bound_as_published"] = published;
    j["as_published_minus_numeric"] = published - numeric;
    const udpfl::OptimalNuResult opt = udpfl::OptimalNu(scale);
    j["optimal_nu"] = opt.nu;
    j["min_amplitude"] = opt.min_amplitude_per_sensitivity * sensitivity;
  }
  std::cout << j.dump() << "\n";
  return 0;
}

int RunExperimentCommand(const udpfl::ExperimentConfig& cfg) {
  const udpfl::ExperimentResult result = udpfl::RunExperiment(cfg);
  {
    Output out(cfg.output);
    udpfl::WriteMetricsCsv(out.stream(), result.rows);
    out.stream().flush();
  }
  if (result.summary.budget_exhausted) {
    std::cerr << "udpfl: privacy budget exhausted after "
              << result.summary.rounds_run << " rounds\n";
  }
  std::cout << udpfl::SummaryJson(result.summary) << std::endl;
  return udpfl::ExitCode(result.summary);
}

int RunSweepCommand(const udpfl::ExperimentConfig& base,
                    const std::string& mechanisms, const std::string& epsilons,
                    int seeds, const std::string& seed_list, int jobs) {
  std::vector<MechanismKind> kinds = mechanisms.empty()
                                         ? std::vector{base.mechanism}
                                         : MechanismList(mechanisms);
  std::vector<double> eps =
      epsilons.empty() ? std::vector{base.epsilon} : DoubleList(epsilons);
  std::vector<std::uint64_t> seed_values;
  if (!seed_list.empty()) {
    for (const std::string& s : SplitList(seed_list)) {
      seed_values.push_back(std::stoull(s));
    }
  } else {
    for (int i = 0; i < seeds; ++i) seed_values.push_back(base.seed + i);
  }
  const std::vector<udpfl::SweepEntry> entries =
      udpfl::ExpandSweep(base, kinds, eps, seed_values);
  Output out(base.output);
  const udpfl::SweepResult result =
      udpfl::RunSweep(entries, out.stream(), jobs);
  out.stream().flush();
  for (const auto& [id, summary] : result.summaries) {
    ordered_json j = ordered_json::parse(udpfl::SummaryJson(summary));
    j["experiment_id"] = id;
    std::cout << j.dump() << "\n";
  }
  return result.all_completed ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private federated learning toolkit"};
  app.require_subcommand(1);

  auto* calibrate = app.add_subcommand(
      "calibrate", "Minimal noise scale for an (epsilon, delta) budget");
  std::string cal_mechanisms = "all";
  std::string cal_epsilons = "8";
  double cal_delta = 1e-5;
  int cal_rounds = 150;
  double cal_sensitivity = 1.0;
  double cal_tolerance = 1e-4;
  std::int64_t cal_shuffle = 0;
  calibrate->add_option("--mechanism", cal_mechanisms,
                        "comma list or `all`");
  calibrate->add_option("--epsilon", cal_epsilons, "comma list of budgets");
  calibrate->add_option("--delta", cal_delta);
  calibrate->add_option("--rounds", cal_rounds,
                        "number of composed releases");
  calibrate->add_option("--sensitivity", cal_sensitivity);
  calibrate->add_option("--tolerance", cal_tolerance,
                        "relative bisection tolerance on the knob");
  calibrate->add_option("--shuffle-clients", cal_shuffle,
                        "calibrate with shuffle amplification over N clients");

  auto* run = app.add_subcommand("run", "Run one federated experiment");
  ConfigFlags run_flags;
  run_flags.Register(run);

  auto* sweep = app.add_subcommand("sweep", "Run a grid of experiments");
  ConfigFlags sweep_flags;
  sweep_flags.Register(sweep);
  std::string sweep_mechanisms;
  std::string sweep_epsilons;
  int sweep_seeds = 1;
  std::string sweep_seed_list;
  int sweep_jobs = 1;
  sweep->add_option("--mechanisms", sweep_mechanisms, "comma list or `all`");
  sweep->add_option("--epsilons", sweep_epsilons, "comma list");
  sweep->add_option("--seeds", sweep_seeds,
                    "number of consecutive seeds starting at --seed");
  sweep->add_option("--seed-list", sweep_seed_list, "explicit comma list");
  sweep->add_option("--jobs", sweep_jobs, "experiments run concurrently");

  auto* bounds =
      app.add_subcommand("bounds", "Expected l1 perturbation of a model");
  std::string b_mechanism = "staircase";
  double b_sensitivity = 1.0;
  double b_scale = 1.0;
  std::optional<double> b_nu;
  std::int64_t b_m = 1;
  std::int64_t b_rounds = 1;
  bounds->add_option("--mechanism", b_mechanism);
  bounds->add_option("--sensitivity", b_sensitivity);
  bounds->add_option("--scale", b_scale, "sigma, b or lambda");
  bounds->add_option("--nu", b_nu,
                     "staircase shape (default: amplitude-optimal)");
  bounds->add_option("--m", b_m, "number of perturbed coordinates");
  bounds->add_option("--rounds", b_rounds);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*calibrate) {
      return RunCalibrate(cal_mechanisms, cal_epsilons, cal_delta, cal_rounds,
                          cal_sensitivity, cal_tolerance, cal_shuffle);
    }
    if (*run) return RunExperimentCommand(run_flags.Parse(run));
    if (*sweep) {
      return RunSweepCommand(sweep_flags.Parse(sweep), sweep_mechanisms,
                             sweep_epsilons, sweep_seeds, sweep_seed_list,
                             sweep_jobs);
    }
    if (*bounds) {
      return RunBounds(b_mechanism, b_sensitivity, b_scale, b_nu, b_m,
                       b_rounds);
    }
  } catch (const udpfl::ConfigError& e) {
    std::cerr << "udpfl: " << e.what() << "\n";
    return kExitUsage;
  } catch (const udpfl::InfeasibleBudgetError& e) {
    std::cerr << "udpfl: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "udpfl: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
