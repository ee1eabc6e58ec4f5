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

#ifndef UDPFL_LOSS_MODEL_H_
#define UDPFL_LOSS_MODEL_H_

#include <cstddef>
#include <span>

#include "udpfl/dataset.h"
#include "udpfl/model_vector.h"

namespace udpfl {

// Differentiable per-example loss over a flat parameter vector.
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual std::size_t dimension() const = 0;

  // Mean loss over the shard.
  virtual double Loss(const ModelVector& w, const DatasetShard& shard) const = 0;

  // Gradient of the loss of example `index`, written into `out`
  // (size dimension()).
  virtual void ExampleGradient(const ModelVector& w, const DatasetShard& shard,
                               std::size_t index,
                               std::span<double> out) const = 0;

  // Fraction of correctly classified examples; models without a notion of
  // accuracy return 0.
  virtual double Accuracy(const ModelVector& w,
                          const DatasetShard& shard) const = 0;

  // Mean of the example gradients over `indices`.
  virtual ModelVector Gradient(const ModelVector& w, const DatasetShard& shard,
                               std::span<const std::size_t> indices) const;

  ModelVector FullGradient(const ModelVector& w,
                           const DatasetShard& shard) const;
};

// Multinomial logistic regression with cross-entropy loss. Parameters are
// the row-major (classes x features) weight matrix followed by one bias per
// class.
class SoftmaxRegression final : public LossModel {
 public:
  SoftmaxRegression(int num_features, int num_classes);

  std::size_t dimension() const override;
  double Loss(const ModelVector& w, const DatasetShard& shard) const override;
  void ExampleGradient(const ModelVector& w, const DatasetShard& shard,
                       std::size_t index,
                       std::span<double> out) const override;
  double Accuracy(const ModelVector& w,
                  const DatasetShard& shard) const override;

  int num_features() const { return num_features_; }
  int num_classes() const { return num_classes_; }

 private:
  // Class logits of one example into `logits` (size num_classes).
  void Logits(const ModelVector& w, std::span<const double> x,
              std::span<double> logits) const;
  void CheckShapes(const ModelVector& w, const DatasetShard& shard) const;

  int num_features_;
  int num_classes_;
};

}  // namespace udpfl

#endif  // UDPFL_LOSS_MODEL_H_
