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

#include "udpfl/model_vector.h"

#include <cmath>
#include <string>

#include "udpfl/errors.h"

namespace udpfl {

void CheckSameDimension(const ModelVector& a, const ModelVector& b) {
  if (a.size() != b.size()) {
    throw MismatchError("model dimension mismatch: " + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()));
  }
}

ModelVector& ModelVector::operator+=(const ModelVector& other) {
  CheckSameDimension(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

ModelVector& ModelVector::operator-=(const ModelVector& other) {
  CheckSameDimension(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other[i];
  return *this;
}

ModelVector& ModelVector::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

void ModelVector::Axpy(double s, const ModelVector& other) {
  CheckSameDimension(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other[i];
}

double ModelVector::Norm() const { return std::sqrt(Dot(*this, *this)); }

bool ModelVector::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ModelVector operator+(ModelVector a, const ModelVector& b) { return a += b; }
ModelVector operator-(ModelVector a, const ModelVector& b) { return a -= b; }
ModelVector operator*(double s, ModelVector v) { return v *= s; }

double Dot(const ModelVector& a, const ModelVector& b) {
  CheckSameDimension(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace udpfl
