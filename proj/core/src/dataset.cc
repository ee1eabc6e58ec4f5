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

#include "udpfl/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "udpfl/errors.h"

namespace udpfl {
namespace {

std::vector<std::string> SplitCommas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
      cell.pop_back();
    }
    std::size_t start = cell.find_first_not_of(' ');
    cells.push_back(start == std::string::npos ? "" : cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

DatasetShard Blobs(const std::vector<double>& means, const BlobOptions& options,
                   int count, NoiseStream& stream) {
  DatasetShard shard;
  shard.num_features = options.num_features;
  shard.num_classes = options.num_classes;
  shard.features.reserve(static_cast<std::size_t>(count) *
                         options.num_features);
  shard.labels.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int label = static_cast<int>(stream.Below(options.num_classes));
    for (int j = 0; j < options.num_features; ++j) {
      shard.features.push_back(means[label * options.num_features + j] +
                               stream.StandardNormal());
    }
    shard.labels.push_back(label);
  }
  return shard;
}

}  // namespace

void DatasetShard::Validate() const {
  if (labels.empty()) throw DomainError("dataset shard must not be empty");
  if (num_features < 1 || num_classes < 1) {
    throw DomainError("dataset shard needs >= 1 feature and >= 1 class");
  }
  if (features.size() != labels.size() * num_features) {
    throw MismatchError("feature matrix shape does not match label count");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw DomainError("label " + std::to_string(y) + " outside [0, " +
                        std::to_string(num_classes) + ")");
    }
  }
}

DatasetShard DatasetShard::Subset(std::span<const std::size_t> indices) const {
  DatasetShard out;
  out.num_features = num_features;
  out.num_classes = num_classes;
  out.features.reserve(indices.size() * num_features);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    auto row = Row(i);
    out.features.insert(out.features.end(), row.begin(), row.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

DatasetShard ParseCsvShard(std::istream& in, int num_classes) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("dataset CSV: missing header row");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const std::vector<std::string> header = SplitCommas(line);
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error(
        "dataset CSV: header must list feature columns then `label`");
  }
  DatasetShard shard;
  shard.num_features = static_cast<int>(header.size()) - 1;
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = SplitCommas(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("dataset CSV line " + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " cells");
    }
    try {
      for (int j = 0; j < shard.num_features; ++j) {
        std::size_t used = 0;
        const double v = std::stod(cells[j], &used);
        if (used != cells[j].size() || !std::isfinite(v)) {
          throw std::invalid_argument(cells[j]);
        }
        shard.features.push_back(v);
      }
      std::size_t used = 0;
      const int label = std::stoi(cells.back(), &used);
      if (used != cells.back().size() || label < 0) {
        throw std::invalid_argument(cells.back());
      }
      shard.labels.push_back(label);
      max_label = std::max(max_label, label);
    } catch (const std::logic_error&) {
      throw std::runtime_error("dataset CSV line " + std::to_string(line_no) +
                               ": malformed value");
    }
  }
  shard.num_classes = num_classes > 0 ? num_classes : max_label + 1;
  shard.Validate();
  return shard;
}

DatasetShard LoadCsvShard(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return ParseCsvShard(in, num_classes);
}

void WriteCsvShard(std::ostream& out, const DatasetShard& shard) {
  for (int j = 0; j < shard.num_features; ++j) out << "x" << j << ",";
  out << "label\n";
  out.precision(17);
  for (std::size_t i = 0; i < shard.size(); ++i) {
    for (double v : shard.Row(i)) out << v << ",";
    out << shard.labels[i] << "\n";
  }
}

std::vector<DatasetShard> SplitIid(const DatasetShard& data, int parts,
                                   NoiseStream& stream) {
  if (parts < 1) throw DomainError("split needs at least one part");
  if (data.size() < static_cast<std::size_t>(parts)) {
    throw DomainError("not enough examples for the requested split");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), stream.engine());
  std::vector<DatasetShard> out;
  const std::size_t n = data.size();
  for (int p = 0; p < parts; ++p) {
    const std::size_t begin = n * p / parts;
    const std::size_t end = n * (p + 1) / parts;
    out.push_back(data.Subset(
        std::span<const std::size_t>(order).subspan(begin, end - begin)));
  }
  return out;
}

FederatedTask MakeSyntheticTask(const BlobOptions& options, int num_clients,
                                int samples_per_client, int eval_samples,
                                double public_fraction, std::uint64_t seed) {
  if (num_clients < 1 || samples_per_client < 1 || eval_samples < 1) {
    throw DomainError("synthetic task sizes must be positive");
  }
  if (!(public_fraction >= 0.0 && public_fraction < 1.0)) {
    throw DomainError("public fraction must lie in [0, 1)");
  }
  NoiseStream means_stream(seed, 0, 0, StreamPurpose::kDataGeneration);
  std::vector<double> means(
      static_cast<std::size_t>(options.num_classes) * options.num_features);
  for (double& m : means) m = options.separation * means_stream.StandardNormal();

  FederatedTask task;
  for (int k = 0; k < num_clients; ++k) {
    NoiseStream stream(seed, 1, k, StreamPurpose::kDataGeneration);
    task.clients.push_back(Blobs(means, options, samples_per_client, stream));
  }
  NoiseStream eval_stream(seed, 2, 0, StreamPurpose::kDataGeneration);
  task.eval = Blobs(means, options, eval_samples, eval_stream);
  const int public_count = static_cast<int>(
      std::lround(public_fraction * num_clients * samples_per_client));
  NoiseStream public_stream(seed, 3, 0, StreamPurpose::kDataGeneration);
  task.public_shard = Blobs(means, options, public_count, public_stream);
  return task;
}

FederatedTask SplitTable(const DatasetShard& table, int num_clients,
                         double public_fraction, std::uint64_t seed) {
  table.Validate();
  if (!(public_fraction >= 0.0 && public_fraction < 0.5)) {
    throw DomainError("public fraction must lie in [0, 0.5)");
  }
  NoiseStream stream(seed, 0, 0, StreamPurpose::kDataGeneration);
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), stream.engine());
  const std::size_t n = table.size();
  const std::size_t n_public =
      static_cast<std::size_t>(std::floor(public_fraction * n));
  const std::size_t n_eval = std::max<std::size_t>(1, n / 5);
  if (n_public + n_eval + num_clients > n) {
    throw DomainError("dataset too small for the requested split");
  }
  std::span<const std::size_t> all(order);
  FederatedTask task;
  task.public_shard = table.Subset(all.subspan(0, n_public));
  task.eval = table.Subset(all.subspan(n_public, n_eval));
  DatasetShard rest = table.Subset(all.subspan(n_public + n_eval));
  NoiseStream split_stream(seed, 1, 0, StreamPurpose::kDataGeneration);
  task.clients = SplitIid(rest, num_clients, split_stream);
  return task;
}

}  // namespace udpfl
