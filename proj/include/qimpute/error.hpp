// Copyright 2026 The qimpute Authors
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
#pragma once

#include <stdexcept>
#include <string>

namespace qimpute {

/// Invalid sizes or values passed to a numerical routine.
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (e.g. encoding a missing cell).
class ContractViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Malformed input files. Messages carry row/column coordinates.
class LoadError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Statistics could not be fitted (e.g. a column with no observed values).
class FitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Training diverged.
class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define QIMPUTE_REQUIRE(cond, ExcType, msg)                                   \
    do {                                                                       \
        if (!(cond)) {                                                         \
            throw ExcType(std::string(msg));                                   \
        }                                                                      \
    } while (0)

} // namespace qimpute
