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

#include "udpfl/accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "udpfl/errors.h"
#include "udpfl/utility_bounds.h"

namespace udpfl {
namespace {

bool IsInteger(double x) { return std::isfinite(x) && std::floor(x) == x; }

void CheckShuffleArgs(double gamma, double alpha, std::int64_t n_clients) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("shuffle amplification needs a finite gamma >= 0");
  }
  if (!IsInteger(alpha) || alpha < 2.0) {
    throw DomainError("shuffle amplification is stated for integer alpha >= 2");
  }
  if (n_clients < 1) throw DomainError("n_clients must be positive");
}

// log(1 + excess) / (alpha - 1).
double ShuffleBound(double log_excess, double alpha) {
  if (log_excess == -std::numeric_limits<double>::infinity()) return 0.0;
  // log1p(e^x), stable for large x.
  const double log_term = log_excess > 30.0
                              ? log_excess + std::log1p(std::exp(-log_excess))
                              : std::log1p(std::exp(log_excess));
  return log_term / (alpha - 1.0);
}

}  // namespace

AlphaGrid::AlphaGrid(std::vector<double> alphas) : alphas_(std::move(alphas)) {
  if (alphas_.empty()) throw DomainError("alpha grid must not be empty");
  for (std::size_t i = 0; i < alphas_.size(); ++i) {
    if (!(alphas_[i] > 1.0) || !std::isfinite(alphas_[i])) {
      throw DomainError("alpha grid entries must be finite and > 1");
    }
    if (i > 0 && !(alphas_[i] > alphas_[i - 1])) {
      throw DomainError("alpha grid must be strictly increasing");
    }
  }
}

AlphaGrid AlphaGrid::Default() {
  std::vector<double> alphas = {1.25, 1.5, 1.75};
  for (int a = 2; a <= 64; ++a) alphas.push_back(a);
  return AlphaGrid(std::move(alphas));
}

AlphaGrid AlphaGrid::Integers(int lo, int hi) {
  std::vector<double> alphas;
  for (int a = lo; a <= hi; ++a) alphas.push_back(a);
  return AlphaGrid(std::move(alphas));
}

void PrivacyBudget::Validate() const {
  if (!(epsilon > 0.0) || std::isnan(epsilon)) {
    throw DomainError("budget epsilon must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("budget delta must lie in (0, 1)");
  }
  if (horizon < 1) throw DomainError("budget horizon must be positive");
}

RdpLedger::RdpLedger(AlphaGrid grid)
    : grid_(std::move(grid)), gamma_(grid_.size(), 0.0) {}

RdpLedger::RdpLedger(AlphaGrid grid, std::vector<double> gamma)
    : grid_(std::move(grid)), gamma_(std::move(gamma)) {
  if (gamma_.size() != grid_.size()) {
    throw MismatchError("ledger gamma length differs from the alpha grid");
  }
  for (double g : gamma_) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw DomainError("ledger gamma entries must be finite and >= 0");
    }
  }
}

void RdpLedger::Compose(std::span<const double> curve) {
  if (curve.size() != gamma_.size()) {
    throw MismatchError("RDP curve length differs from the ledger grid");
  }
  for (double g : curve) {
    if (!(g >= 0.0) || std::isnan(g)) {
      throw DomainError("RDP curve entries must be >= 0");
    }
  }
  for (std::size_t i = 0; i < gamma_.size(); ++i) gamma_[i] += curve[i];
  ++rounds_composed_;
}

DpConversion RdpLedger::ToDp(double delta) const {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("delta must lie in (0, 1)");
  }
  const double log_inv_delta = -std::log(delta);
  DpConversion best{std::numeric_limits<double>::infinity(), grid_[0]};
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double eps = gamma_[i] + log_inv_delta / (grid_[i] - 1.0);
    if (eps < best.epsilon) best = {eps, grid_[i]};
  }
  return best;
}

RdpLedger Compose(RdpLedger ledger, std::span<const double> curve) {
  ledger.Compose(curve);
  return ledger;
}

std::vector<double> RdpCurve(const MechanismParams& params,
                             const AlphaGrid& grid) {
  std::vector<double> curve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) curve[i] = Rdp(params, grid[i]);
  return curve;
}

double ShuffleAmplifyUpper(double gamma, double alpha,
                           std::int64_t n_clients) {
  CheckShuffleArgs(gamma, alpha, n_clients);
  // log[C(alpha,2) * 4 (e^gamma - 1)^2 / N]
  const double log_excess = std::log(alpha * (alpha - 1.0) / 2.0) +
                            std::log(4.0) + 2.0 * std::log(std::expm1(gamma)) -
                            std::log(static_cast<double>(n_clients));
  return ShuffleBound(log_excess, alpha);
}

double ShuffleAmplifyLower(double gamma, double alpha,
                           std::int64_t n_clients) {
  CheckShuffleArgs(gamma, alpha, n_clients);
  // log[C(alpha,2) (e^gamma - 1)^2 / (N e^gamma)]
  const double log_excess = std::log(alpha * (alpha - 1.0) / 2.0) +
                            2.0 * std::log(std::expm1(gamma)) -
                            std::log(static_cast<double>(n_clients)) - gamma;
  return ShuffleBound(log_excess, alpha);
}

std::vector<double> ShuffledRdpCurve(const MechanismParams& params,
                                     const AlphaGrid& grid,
                                     std::int64_t n_clients) {
  std::vector<double> curve = RdpCurve(params, grid);
  const double pure = PureDpEpsilon(params);
  if (!std::isfinite(pure)) return curve;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (IsInteger(grid[i]) && grid[i] >= 2.0) {
      curve[i] =
          std::min(curve[i], ShuffleAmplifyUpper(pure, grid[i], n_clients));
    }
  }
  return curve;
}

MechanismParams MechanismFromKnob(MechanismKind kind, double sensitivity,
                                  double knob) {
  switch (kind) {
    case MechanismKind::kGaussian:
      return MechanismParams::Gaussian(sensitivity, knob);
    case MechanismKind::kLaplace:
      return MechanismParams::Laplace(sensitivity, knob);
    case MechanismKind::kStaircase: {
      const double lambda = 1.0 / knob;
      return MechanismParams::Staircase(sensitivity, lambda,
                                        OptimalNu(lambda).nu);
    }
  }
  return {};
}

double KnobOf(const MechanismParams& params) {
  return params.kind == MechanismKind::kStaircase ? 1.0 / params.scale
                                                  : params.scale;
}

DpConversion ComposedEpsilon(const MechanismParams& params, int horizon,
                             double delta, const AlphaGrid& grid,
                             std::int64_t shuffle_clients) {
  std::vector<double> curve = shuffle_clients > 0
                                  ? ShuffledRdpCurve(params, grid,
                                                     shuffle_clients)
                                  : RdpCurve(params, grid);
  for (double& g : curve) g *= horizon;
  return RdpLedger(grid, std::move(curve)).ToDp(delta);
}

CalibrationResult CalibrateNoise(MechanismKind kind, double sensitivity,
                                 const PrivacyBudget& budget,
                                 const AlphaGrid& grid,
                                 const CalibrationOptions& options) {
  budget.Validate();
  if (!(options.tolerance > 0.0)) {
    throw DomainError("calibration tolerance must be positive");
  }
  if (!(sensitivity > 0.0)) throw DomainError("sensitivity must be positive");
  if (!(options.knob_min > 0.0 && options.knob_max > options.knob_min)) {
    throw DomainError("calibration knob bounds must satisfy 0 < min < max");
  }

  auto evaluate = [&](double knob) {
    const MechanismParams params = MechanismFromKnob(kind, sensitivity, knob);
    return std::pair{params,
                     ComposedEpsilon(params, budget.horizon, budget.delta,
                                     grid, options.shuffle_clients)};
  };

  auto [hi_params, hi_dp] = evaluate(options.knob_max);
  if (hi_dp.epsilon > budget.epsilon) {
    std::ostringstream msg;
    msg << "infeasible budget: " << MechanismName(kind)
        << " noise at the largest searched knob (" << options.knob_max
        << ") still yields epsilon " << hi_dp.epsilon << " > "
        << budget.epsilon << " over " << budget.horizon << " compositions";
    throw InfeasibleBudgetError(msg.str());
  }
  auto [lo_params, lo_dp] = evaluate(options.knob_min);
  if (lo_dp.epsilon <= budget.epsilon) {
    return {lo_params, lo_dp.epsilon, lo_dp.alpha, 0};
  }

  double lo = options.knob_min;
  double hi = options.knob_max;
  int iterations = 0;
  while (hi / lo > 1.0 + options.tolerance) {
    const double mid = std::sqrt(lo * hi);
    auto [params, dp] = evaluate(mid);
    if (dp.epsilon <= budget.epsilon) {
      hi = mid;
      hi_params = params;
      hi_dp = dp;
    } else {
      lo = mid;
    }
    ++iterations;
  }
  return {hi_params, hi_dp.epsilon, hi_dp.alpha, iterations};
}

SpendOutcome Spend(RdpLedger& ledger, std::span<const double> curve,
                   const PrivacyBudget& budget) {
  budget.Validate();
  RdpLedger trial = Compose(ledger, curve);
  const double eps = trial.ToDp(budget.delta).epsilon;
  if (eps > budget.epsilon) {
    return {true, 0.0, ledger.ToDp(budget.delta).epsilon};
  }
  ledger = std::move(trial);
  return {false, budget.epsilon - eps, eps};
}

double SystemEpsilon(std::span<const RdpLedger> ledgers, double delta) {
  double eps = 0.0;
  for (const RdpLedger& ledger : ledgers) {
    eps = std::max(eps, ledger.ToDp(delta).epsilon);
  }
  return eps;
}

}  // namespace udpfl
