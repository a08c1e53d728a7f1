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

#ifndef ANATOMY_CSV_HPP_
#define ANATOMY_CSV_HPP_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace anatomy::csv {

using Record = std::vector<std::string>;

// Comma-delimited records with optional double-quoted fields ("" escapes a
// quote inside a quoted field). Unquoted fields are trimmed of surrounding
// spaces and tabs; blank lines are skipped.
std::vector<Record> read(std::istream& in);

// Throws DataError if the file cannot be opened.
std::vector<Record> read_file(const std::string& path);

// Quotes the field only when it contains a delimiter, quote, newline or
// leading/trailing whitespace.
std::string escape(std::string_view field);

void write_record(std::ostream& out, const Record& record);

}  // namespace anatomy::csv

#endif  // ANATOMY_CSV_HPP_
