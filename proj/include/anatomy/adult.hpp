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

#ifndef ANATOMY_ADULT_HPP_
#define ANATOMY_ADULT_HPP_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace anatomy {

// Columns kept from the raw UCI census income files, in output order.
const std::vector<std::string>& adult_columns();

struct AdultPrepStats {
  std::size_t read = 0;
  std::size_t kept = 0;
  std::size_t dropped_missing = 0;
};

// Converts raw adult.data / adult.test records (", "-separated, no header,
// "?" for missing) into a CSV with the kept columns. Records with a missing
// value in any raw column are dropped, the "|..." banner line of adult.test
// is skipped and the trailing "." of test labels is removed. The header is
// written when `header` is set.
AdultPrepStats prepare_adult(std::istream& raw, std::ostream& out, bool header);

}  // namespace anatomy

#endif  // ANATOMY_ADULT_HPP_
