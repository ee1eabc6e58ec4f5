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

#include "udpfl/noise_stream.h"

#include <limits>

namespace udpfl {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t DeriveSeed(std::uint64_t master_seed, std::uint64_t round,
                         std::uint64_t client, StreamPurpose purpose) {
  std::uint64_t h = SplitMix64(master_seed);
  h = SplitMix64(h ^ SplitMix64(round + 0x1000));
  h = SplitMix64(h ^ SplitMix64(client + 0x2000));
  h = SplitMix64(h ^ SplitMix64(static_cast<std::uint64_t>(purpose) + 0x3000));
  return h;
}

}  // namespace

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint64_t round,
                         std::uint64_t client, StreamPurpose purpose)
    : derived_seed_(DeriveSeed(master_seed, round, client, purpose)),
      engine_(derived_seed_) {}

double NoiseStream::Uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NoiseStream::UniformOpen() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseStream::StandardNormal() { return normal_(engine_); }

std::uint64_t NoiseStream::Below(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace udpfl
