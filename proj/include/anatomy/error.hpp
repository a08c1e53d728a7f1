// Copyright 2026 The Anatomy-kNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ANATOMY_ERROR_HPP_
#define ANATOMY_ERROR_HPP_

#include <stdexcept>

namespace anatomy {

// Malformed or unreadable input: files, CSV tokens, schema/header mismatch.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter or precondition was violated, or an operation is infeasible
// on the given data (e.g. no l-diverse group can be formed).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace anatomy

#endif  // ANATOMY_ERROR_HPP_
