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

#include <benchmark/benchmark.h>

#include "udpfl/accountant.h"
#include "udpfl/dataset.h"
#include "udpfl/fl.h"
#include "udpfl/loss_model.h"
#include "udpfl/mechanisms.h"
#include "udpfl/noise_stream.h"

namespace udpfl {
namespace {

MechanismParams ParamsFor(int kind) {
  switch (static_cast<MechanismKind>(kind)) {
    case MechanismKind::kGaussian:
      return MechanismParams::Gaussian(1.0, 3.0);
    case MechanismKind::kLaplace:
      return MechanismParams::Laplace(1.0, 3.0);
    case MechanismKind::kStaircase:
      break;
  }
  return MechanismParams::Staircase(1.0, 0.4, 0.45);
}

void BM_RdpCurve(benchmark::State& state) {
  const MechanismParams p = ParamsFor(static_cast<int>(state.range(0)));
  const AlphaGrid grid = AlphaGrid::Default();
  for (auto _ : state) benchmark::DoNotOptimize(RdpCurve(p, grid));
  state.SetLabel(std::string(MechanismName(p.kind)));
}
BENCHMARK(BM_RdpCurve)->DenseRange(0, 2);

void BM_SampleNoise(benchmark::State& state) {
  const MechanismParams p = ParamsFor(static_cast<int>(state.range(0)));
  NoiseStream stream(1, 0, 0, StreamPurpose::kTesting);
  for (auto _ : state) benchmark::DoNotOptimize(SampleNoise(p, stream));
  state.SetLabel(std::string(MechanismName(p.kind)));
}
BENCHMARK(BM_SampleNoise)->DenseRange(0, 2);

void BM_Calibrate(benchmark::State& state) {
  const auto kind = static_cast<MechanismKind>(state.range(0));
  const AlphaGrid grid = AlphaGrid::Default();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        CalibrateNoise(kind, 1.0, PrivacyBudget{8.0, 1e-5, 300}, grid));
  }
  state.SetLabel(std::string(MechanismName(kind)));
}
BENCHMARK(BM_Calibrate)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_LocalUpdate(benchmark::State& state) {
  const FederatedTask task = MakeSyntheticTask({}, 1, 200, 10, 0.0, 1);
  const SoftmaxRegression model(20, 10);
  ClientConfig cfg;
  cfg.shard = task.clients[0];
  cfg.mechanism = MechanismParams::Staircase(1.0, 0.4, 0.45);
  cfg.sample_rate = 0.5;
  const ModelVector global(model.dimension());
  std::uint64_t round = 0;
  for (auto _ : state) {
    NoiseStream stream(1, round++, 0, StreamPurpose::kGradientNoise);
    benchmark::DoNotOptimize(LocalUpdate(cfg, global, model, stream));
  }
}
BENCHMARK(BM_LocalUpdate)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace udpfl

BENCHMARK_MAIN();
