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

#ifndef UDPFL_ACCOUNTANT_H_
#define UDPFL_ACCOUNTANT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "udpfl/mechanisms.h"

namespace udpfl {

// Strictly increasing list of Renyi orders, all > 1.
class AlphaGrid {
 public:
  // Throws DomainError if empty, unsorted, duplicated, or any entry <= 1.
  explicit AlphaGrid(std::vector<double> alphas);

  // {1.25, 1.5, 1.75, 2, 3, ..., 64}.
  static AlphaGrid Default();
  // {lo, lo + 1, ..., hi}.
  static AlphaGrid Integers(int lo, int hi);

  std::span<const double> values() const { return alphas_; }
  std::size_t size() const { return alphas_.size(); }
  double operator[](std::size_t i) const { return alphas_[i]; }

  friend bool operator==(const AlphaGrid&, const AlphaGrid&) = default;

 private:
  std::vector<double> alphas_;
};

// Target (epsilon, delta) over a horizon of `horizon` compositions.
struct PrivacyBudget {
  double epsilon = 8.0;
  double delta = 1e-5;
  int horizon = 150;

  void Validate() const;
};

struct DpConversion {
  double epsilon;
  double alpha;
};

// Per-order accumulated Renyi divergence. Single writer.
class RdpLedger {
 public:
  explicit RdpLedger(AlphaGrid grid);
  RdpLedger(AlphaGrid grid, std::vector<double> gamma);

  const AlphaGrid& grid() const { return grid_; }
  std::span<const double> gamma() const { return gamma_; }
  std::int64_t rounds_composed() const { return rounds_composed_; }

  // Adds `curve` entrywise. Throws MismatchError if the length differs from
  // the grid, DomainError on negative or non-finite entries.
  void Compose(std::span<const double> curve);

  // min over the grid of gamma(alpha) + log(1/delta) / (alpha - 1); ties go
  // to the smaller alpha.
  DpConversion ToDp(double delta) const;

 private:
  AlphaGrid grid_;
  std::vector<double> gamma_;
  std::int64_t rounds_composed_ = 0;
};

// Functional form of RdpLedger::Compose.
RdpLedger Compose(RdpLedger ledger, std::span<const double> curve);

// Rdp(params, alpha) at every grid entry.
std::vector<double> RdpCurve(const MechanismParams& params,
                             const AlphaGrid& grid);

// Shuffle-model amplification of a per-client pure-DP level `gamma` with
// `n_clients` reporting clients. Stated for integer alpha >= 2 only.
double ShuffleAmplifyUpper(double gamma, double alpha, std::int64_t n_clients);
double ShuffleAmplifyLower(double gamma, double alpha, std::int64_t n_clients);

// Per-order curve when updates pass through a shuffler: at integer orders
// the smaller of the plain RDP and the shuffle upper bound evaluated at the
// mechanism's pure-DP level; plain RDP elsewhere. Gaussian noise has no
// pure-DP level and keeps its plain curve.
std::vector<double> ShuffledRdpCurve(const MechanismParams& params,
                                     const AlphaGrid& grid,
                                     std::int64_t n_clients);

struct CalibrationOptions {
  double tolerance = 1e-4;  // relative, on the privacy knob
  double knob_min = 1e-4;
  double knob_max = 1e6;
  // When > 0, calibrate against ShuffledRdpCurve with this many clients.
  std::int64_t shuffle_clients = 0;
};

struct CalibrationResult {
  MechanismParams mechanism;
  double achieved_epsilon;
  double minimizing_alpha;
  int iterations;
};

// The privacy knob is the quantity composed epsilon decreases in:
// sigma, b, or 1 / lambda. Staircase nu follows the amplitude-optimal
// choice for each candidate lambda.
MechanismParams MechanismFromKnob(MechanismKind kind, double sensitivity,
                                  double knob);
double KnobOf(const MechanismParams& params);

// Epsilon after composing `params` `horizon` times and converting at delta.
DpConversion ComposedEpsilon(const MechanismParams& params, int horizon,
                             double delta, const AlphaGrid& grid,
                             std::int64_t shuffle_clients = 0);

// Smallest-noise mechanism whose `budget.horizon`-fold composition stays
// within `budget.epsilon`. Bisection in log-knob space until consecutive
// brackets are within a factor (1 + tolerance); the returned knob is
// feasible and knob / (1 + tolerance) is not. Throws InfeasibleBudgetError
// if even knob_max violates the budget.
CalibrationResult CalibrateNoise(MechanismKind kind, double sensitivity,
                                 const PrivacyBudget& budget,
                                 const AlphaGrid& grid,
                                 const CalibrationOptions& options = {});

struct SpendOutcome {
  bool halted;
  // Budget epsilon minus the post-spend epsilon; 0 when halted.
  double remaining_epsilon;
  // Epsilon the ledger reports after this call.
  double epsilon;
};

// Tentatively composes `curve`; commits only if the converted epsilon stays
// within budget. On halt the ledger is left untouched.
SpendOutcome Spend(RdpLedger& ledger, std::span<const double> curve,
                   const PrivacyBudget& budget);

// Max over per-client ledgers of the converted epsilon.
double SystemEpsilon(std::span<const RdpLedger> ledgers, double delta);

}  // namespace udpfl

#endif  // UDPFL_ACCOUNTANT_H_
