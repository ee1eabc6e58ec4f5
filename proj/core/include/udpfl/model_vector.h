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

#ifndef UDPFL_MODEL_VECTOR_H_
#define UDPFL_MODEL_VECTOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace udpfl {

// Flat parameter vector of a trainable model.
class ModelVector {
 public:
  ModelVector() = default;
  explicit ModelVector(std::size_t dimension, double fill = 0.0)
      : values_(dimension, fill) {}
  explicit ModelVector(std::vector<double> values)
      : values_(std::move(values)) {}
  ModelVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  const std::vector<double>& values() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  ModelVector& operator+=(const ModelVector& other);
  ModelVector& operator-=(const ModelVector& other);
  ModelVector& operator*=(double s);

  // this += s * other.
  void Axpy(double s, const ModelVector& other);

  double Norm() const;
  bool AllFinite() const;

  friend bool operator==(const ModelVector&, const ModelVector&) = default;

 private:
  std::vector<double> values_;
};

ModelVector operator+(ModelVector a, const ModelVector& b);
ModelVector operator-(ModelVector a, const ModelVector& b);
ModelVector operator*(double s, ModelVector v);

double Dot(const ModelVector& a, const ModelVector& b);

// Throws MismatchError if the dimensions differ.
void CheckSameDimension(const ModelVector& a, const ModelVector& b);

}  // namespace udpfl

#endif  // UDPFL_MODEL_VECTOR_H_
