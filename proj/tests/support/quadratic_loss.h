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

// l(w) = ||w - centre||^2, independent of the data. Used as a convex oracle
// for curve training.

#ifndef UDPFL_TESTS_SUPPORT_QUADRATIC_LOSS_H_
#define UDPFL_TESTS_SUPPORT_QUADRATIC_LOSS_H_

#include <cstddef>
#include <span>

#include "udpfl/dataset.h"
#include "udpfl/loss_model.h"
#include "udpfl/model_vector.h"

namespace udpfl::testing {

class QuadraticLoss final : public LossModel {
 public:
  explicit QuadraticLoss(ModelVector centre) : centre_(std::move(centre)) {}

  std::size_t dimension() const override { return centre_.size(); }

  double Loss(const ModelVector& w, const DatasetShard&) const override {
    const ModelVector diff = w - centre_;
    return Dot(diff, diff);
  }

  void ExampleGradient(const ModelVector& w, const DatasetShard&, std::size_t,
                       std::span<double> out) const override {
    for (std::size_t i = 0; i < w.size(); ++i) {
      out[i] = 2.0 * (w[i] - centre_[i]);
    }
  }

  double Accuracy(const ModelVector&, const DatasetShard&) const override {
    return 0.0;
  }

 private:
  ModelVector centre_;
};

// A one-row shard; the quadratic loss ignores its contents.
inline DatasetShard DummyShard() {
  DatasetShard shard;
  shard.num_features = 1;
  shard.num_classes = 2;
  shard.features = {0.0};
  shard.labels = {0};
  return shard;
}

}  // namespace udpfl::testing

#endif  // UDPFL_TESTS_SUPPORT_QUADRATIC_LOSS_H_
