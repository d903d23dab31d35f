// SPDX-License-Identifier: Apache-2.0
//
// coba: convolutional and sparse convolutional beamforming for ultrasound
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace coba {

// Bad input values or inconsistent shapes.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A searched-for feature (beam-pattern zero, lobe edge, ...) does not exist.
class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// N has no divisor in (1, N).
class NoNontrivialDivisor : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A desired weight sits on a co-array position that no element pair reaches.
class UnreachablePosition : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coba
