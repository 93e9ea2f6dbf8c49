// Copyright 2026 The cpmts Authors
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

#ifndef CPMTS_ERROR_HPP
#define CPMTS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cpmts {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad shapes, out-of-range tuning values, non-finite input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical step could not complete (zero variance, singular system, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The loadings are not identified, so latent-factor recovery is refused.
class NotIdentifiable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace cpmts

#define CPMTS_REQUIRE(cond, msg)                       \
  do {                                                 \
    if (!(cond)) throw ::cpmts::InvalidArgument(msg);  \
  } while (0)

#endif  // CPMTS_ERROR_HPP
