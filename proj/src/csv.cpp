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

#include "anatomy/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "anatomy/error.hpp"

namespace anatomy::csv {
namespace {

bool is_blank(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_blank(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<Record> read(std::istream& in) {
  std::vector<Record> records;
  Record record;
  std::string field;
  bool quoted = false;      // inside quotes
  bool was_quoted = false;  // current field started with a quote
  bool any = false;         // record has content
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(was_quoted ? field : std::string(trim(field)));
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = record.size() == 1 && record[0].empty() && !any;
    if (!blank) records.push_back(std::move(record));
    record.clear();
    any = false;
  };

  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!trim(field).empty()) {
          throw DataError("csv: stray quote on line " + std::to_string(line));
        }
        field.clear();
        quoted = true;
        was_quoted = true;
        any = true;
        break;
      case ',':
        end_field();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (was_quoted && !is_blank(c)) {
          throw DataError("csv: text after closing quote on line " + std::to_string(line));
        }
        if (!was_quoted) field.push_back(c);
        if (!is_blank(c)) any = true;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  if (any || !field.empty() || !record.empty()) end_record();
  return records;
}

std::vector<Record> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read(in);
}

std::string escape(std::string_view field) {
  bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos ||
               (!field.empty() && (is_blank(field.front()) || is_blank(field.back())));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_record(std::ostream& out, const Record& record) {
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i) out << ',';
    out << escape(record[i]);
  }
  out << '\n';
}

}  // namespace anatomy::csv
