// Copyright 2026 The TAL Racing Authors
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

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Minimal comma-separated tables with a header row. Numbers are written in
// shortest round-trip form, so write -> parse reproduces every double exactly.
namespace tal::csv
{

class CsvError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Table
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  /// Throws CsvError for unparsable or non-finite values.
  double number(std::size_t row, std::size_t col) const;
  std::vector<double> numbers(std::string_view name) const;
  const std::string & text(std::size_t row, std::string_view name) const;
};

/// Parses a table. A leading '#' on the header line is ignored, fields are
/// trimmed and blank lines skipped.
Table parse(std::string_view text);
Table read_file(const std::string & path);

std::string format_number(double value);

class Writer
{
public:
  explicit Writer(std::vector<std::string> header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double> & values);
  void text_row(const std::vector<std::string> & fields);

  const std::string & str() const { return out_; }
  void save(const std::string & path) const;

private:
  std::size_t columns_;
  std::string out_;
};

}  // namespace tal::csv
