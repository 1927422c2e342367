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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

namespace tal::csv
{
namespace
{

TEST(Csv, ParsesHeaderAndTrimsFields)
{
  const auto t = parse("# a, b\n 1 , 2\n\n3,4.5\n");
  ASSERT_EQ(t.header.size(), 2u);
  EXPECT_EQ(t.header[0], "a");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(t.number(1, 1), 4.5);
  EXPECT_EQ(t.numbers("a"), (std::vector<double>{1.0, 3.0}));
  EXPECT_FALSE(t.column("c").has_value());
}

TEST(Csv, RejectsNonFiniteAndGarbage)
{
  const auto t = parse("a\nnan\nxyz\n");
  EXPECT_THROW(t.number(0, 0), CsvError);
  EXPECT_THROW(t.number(1, 0), CsvError);
}

TEST(Csv, NumbersRoundTripExactly)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  Writer w({"v"});
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) {
    values.push_back(u(rng) * std::pow(10.0, i % 13 - 6));
    w.row({values.back()});
  }
  w.row({std::numeric_limits<double>::denorm_min()});
  values.push_back(std::numeric_limits<double>::denorm_min());
  const auto back = parse(w.str()).numbers("v");
  ASSERT_EQ(back.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    EXPECT_EQ(back[i], values[i]);
  }
}

TEST(Csv, WriterChecksColumnCount)
{
  Writer w({"a", "b"});
  EXPECT_THROW(w.row({1.0}), CsvError);
}

}  // namespace
}  // namespace tal::csv
