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

#ifndef UDPFL_DATASET_H_
#define UDPFL_DATASET_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "udpfl/noise_stream.h"

namespace udpfl {

// Labelled examples held row-major: example i occupies
// features[i * num_features, (i + 1) * num_features).
struct DatasetShard {
  int num_features = 0;
  int num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> Row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * num_features,
                                                     num_features);
  }

  // n >= 1, feature matrix shape consistent, labels in [0, num_classes).
  void Validate() const;

  DatasetShard Subset(std::span<const std::size_t> indices) const;
};

// Reads a comma-separated table whose header names the feature columns
// followed by a final `label` column. num_classes is max(label) + 1 unless
// `num_classes` > 0 is given.
DatasetShard ParseCsvShard(std::istream& in, int num_classes = 0);
DatasetShard LoadCsvShard(const std::string& path, int num_classes = 0);
void WriteCsvShard(std::ostream& out, const DatasetShard& shard);

// Deterministic IID split: shuffle, then deal contiguous near-equal parts.
std::vector<DatasetShard> SplitIid(const DatasetShard& data, int parts,
                                   NoiseStream& stream);

// Isotropic Gaussian blobs: class means ~ N(0, separation^2 I), examples
// ~ N(mean, I).
struct BlobOptions {
  int num_features = 20;
  int num_classes = 10;
  double separation = 0.6;
};

struct FederatedTask {
  std::vector<DatasetShard> clients;
  DatasetShard eval;
  // Held-out shard available to the server (may be empty).
  DatasetShard public_shard;
};

FederatedTask MakeSyntheticTask(const BlobOptions& options, int num_clients,
                                int samples_per_client, int eval_samples,
                                double public_fraction, std::uint64_t seed);

// Splits a loaded table into `num_clients` IID client shards, an eval shard
// (20% of rows) and a public shard (`public_fraction` of rows).
FederatedTask SplitTable(const DatasetShard& table, int num_clients,
                         double public_fraction, std::uint64_t seed);

}  // namespace udpfl

#endif  // UDPFL_DATASET_H_
