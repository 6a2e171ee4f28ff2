// Copyright 2026 The flecsim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef FLECS_ERRORS_HPP_
#define FLECS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace flecs {

// Error taxonomy. The CLI maps these onto process exit codes:
// ConfigError -> 1, DataError -> 2, DimensionError / NumericError -> 3.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration (unknown key, invalid value, bad band).
struct ConfigError : Error {
  using Error::Error;
};

// Unreadable or malformed input data (missing file, libsvm parse failure).
struct DataError : Error {
  using Error::Error;
};

// Mismatched operand shapes.
struct DimensionError : Error {
  using Error::Error;
};

// Non-finite values or a failed numeric routine.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace flecs

#endif  // FLECS_ERRORS_HPP_
