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

#include "udpfl/loss_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "udpfl/errors.h"

namespace udpfl {

ModelVector LossModel::Gradient(const ModelVector& w,
                                const DatasetShard& shard,
                                std::span<const std::size_t> indices) const {
  ModelVector sum(dimension());
  if (indices.empty()) return sum;
  ModelVector scratch(dimension());
  for (std::size_t i : indices) {
    ExampleGradient(w, shard, i, scratch.span());
    sum += scratch;
  }
  sum *= 1.0 / static_cast<double>(indices.size());
  return sum;
}

ModelVector LossModel::FullGradient(const ModelVector& w,
                                    const DatasetShard& shard) const {
  std::vector<std::size_t> all(shard.size());
  std::iota(all.begin(), all.end(), 0);
  return Gradient(w, shard, all);
}

SoftmaxRegression::SoftmaxRegression(int num_features, int num_classes)
    : num_features_(num_features), num_classes_(num_classes) {
  if (num_features < 1 || num_classes < 2) {
    throw DomainError("softmax regression needs >= 1 feature, >= 2 classes");
  }
}

std::size_t SoftmaxRegression::dimension() const {
  return static_cast<std::size_t>(num_classes_) * (num_features_ + 1);
}

void SoftmaxRegression::CheckShapes(const ModelVector& w,
                                    const DatasetShard& shard) const {
  if (w.size() != dimension()) {
    throw MismatchError("parameter vector has the wrong dimension");
  }
  if (shard.num_features != num_features_ ||
      shard.num_classes > num_classes_) {
    throw MismatchError("dataset shape does not match the model");
  }
}

void SoftmaxRegression::Logits(const ModelVector& w,
                               std::span<const double> x,
                               std::span<double> logits) const {
  const std::size_t bias = static_cast<std::size_t>(num_classes_) *
                           num_features_;
  for (int c = 0; c < num_classes_; ++c) {
    double z = w[bias + c];
    const std::size_t row = static_cast<std::size_t>(c) * num_features_;
    for (int j = 0; j < num_features_; ++j) z += w[row + j] * x[j];
    logits[c] = z;
  }
}

double SoftmaxRegression::Loss(const ModelVector& w,
                               const DatasetShard& shard) const {
  CheckShapes(w, shard);
  if (shard.size() == 0) return 0.0;
  std::vector<double> logits(num_classes_);
  double total = 0.0;
  for (std::size_t i = 0; i < shard.size(); ++i) {
    Logits(w, shard.Row(i), logits);
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - top);
    total += top + std::log(sum) - logits[shard.labels[i]];
  }
  return total / static_cast<double>(shard.size());
}

void SoftmaxRegression::ExampleGradient(const ModelVector& w,
                                        const DatasetShard& shard,
                                        std::size_t index,
                                        std::span<double> out) const {
  CheckShapes(w, shard);
  std::vector<double> prob(num_classes_);
  const auto x = shard.Row(index);
  Logits(w, x, prob);
  const double top = *std::max_element(prob.begin(), prob.end());
  double sum = 0.0;
  for (double& p : prob) {
    p = std::exp(p - top);
    sum += p;
  }
  const std::size_t bias = static_cast<std::size_t>(num_classes_) *
                           num_features_;
  for (int c = 0; c < num_classes_; ++c) {
    // d loss / d z_c = softmax_c - [c == y].
    const double coeff =
        prob[c] / sum - (c == shard.labels[index] ? 1.0 : 0.0);
    const std::size_t row = static_cast<std::size_t>(c) * num_features_;
    for (int j = 0; j < num_features_; ++j) out[row + j] = coeff * x[j];
    out[bias + c] = coeff;
  }
}

double SoftmaxRegression::Accuracy(const ModelVector& w,
                                   const DatasetShard& shard) const {
  CheckShapes(w, shard);
  if (shard.size() == 0) return 0.0;
  std::vector<double> logits(num_classes_);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < shard.size(); ++i) {
    Logits(w, shard.Row(i), logits);
    const auto best = std::max_element(logits.begin(), logits.end());
    if (best - logits.begin() == shard.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(shard.size());
}

}  // namespace udpfl
