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

#include "tal/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tal::csv
{
namespace
{

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line)
{
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::optional<std::size_t> Table::column(std::string_view name) const
{
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  return std::nullopt;
}

double Table::number(std::size_t row, std::size_t col) const
{
  const std::string & field = rows.at(row).at(col);
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw CsvError("not a number: '" + field + "' (row " + std::to_string(row + 1) + ")");
  }
  if (!std::isfinite(value)) {
    throw CsvError("non-finite value in row " + std::to_string(row + 1));
  }
  return value;
}

std::vector<double> Table::numbers(std::string_view name) const
{
  const auto col = column(name);
  if (!col) {
    throw CsvError("missing column " + std::string(name));
  }
  std::vector<double> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out[r] = number(r, *col);
  }
  return out;
}

const std::string & Table::text(std::size_t row, std::string_view name) const
{
  const auto col = column(name);
  if (!col) {
    throw CsvError("missing column " + std::string(name));
  }
  return rows.at(row).at(*col);
}

Table parse(std::string_view text)
{
  Table table;
  bool have_header = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) {
        break;
      }
      continue;
    }
    if (!have_header) {
      if (line.front() == '#') {
        line = trim(line.substr(1));
      }
      table.header = split(line);
      have_header = true;
      continue;
    }
    auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw CsvError(
        "row " + std::to_string(table.rows.size() + 1) + " has " + std::to_string(fields.size()) +
        " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
    if (end == text.size()) {
      break;
    }
  }
  if (!have_header) {
    throw CsvError("empty CSV");
  }
  return table;
}

Table read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CsvError("cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string format_number(double value)
{
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

Writer::Writer(std::vector<std::string> header) : columns_(header.size())
{
  text_row(header);
}

void Writer::row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

void Writer::row(const std::vector<double> & values)
{
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) {
    fields.push_back(format_number(v));
  }
  text_row(fields);
}

void Writer::text_row(const std::vector<std::string> & fields)
{
  if (fields.size() != columns_) {
    throw CsvError("row width does not match header");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) {
      out_ += ',';
    }
    out_ += fields[i];
  }
  out_ += '\n';
}

void Writer::save(const std::string & path) const
{
  std::ofstream out(path, std::ios::binary);
  out << out_;
  if (!out) {
    throw CsvError("failed to write " + path);
  }
}

}  // namespace tal::csv
