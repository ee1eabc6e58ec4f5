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

#ifndef UDPFL_ERRORS_H_
#define UDPFL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace udpfl {

// Argument outside the mathematical domain of an operation (alpha <= 1,
// non-finite input, p outside [0, 1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised by calibration when no knob inside the search bounds meets the
// requested budget.
class InfeasibleBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural mismatch between inputs (alpha grids, vector dimensions).
class MismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace udpfl

#endif  // UDPFL_ERRORS_H_
