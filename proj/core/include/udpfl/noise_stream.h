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

#ifndef UDPFL_NOISE_STREAM_H_
#define UDPFL_NOISE_STREAM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace udpfl {

// What a random sub-stream is used for. Part of the stream derivation so
// that e.g. client subsampling and gradient noise never share draws.
enum class StreamPurpose : std::uint32_t {
  kGradientNoise = 1,
  kSubsample = 2,
  kClientSelection = 3,
  kShuffle = 4,
  kCurveTraining = 5,
  kDataGeneration = 6,
  kModelInit = 7,
  kTesting = 100,
};

// Deterministic pseudo-random sub-stream keyed by
// (master seed, round, client, purpose).
//
// The generator is std::mt19937_64 seeded through a SplitMix64 mix of the
// four keys. Draws are reproducible within one build; distribution
// algorithms come from the standard library, so bit-exactness across
// toolchains is not promised.
class NoiseStream {
 public:
  using Engine = std::mt19937_64;

  NoiseStream(std::uint64_t master_seed, std::uint64_t round,
              std::uint64_t client, StreamPurpose purpose);

  // Uniform on [0, 1).
  double Uniform();
  // Uniform on (0, 1); safe to pass to log().
  double UniformOpen();
  double StandardNormal();
  // Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n);

  Engine& engine() { return engine_; }

  // The 64-bit seed the engine was initialized with.
  std::uint64_t derived_seed() const { return derived_seed_; }

 private:
  std::uint64_t derived_seed_;
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t SplitMix64(std::uint64_t x);

}  // namespace udpfl

#endif  // UDPFL_NOISE_STREAM_H_
