// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sketchir
{

// Shortest decimal string that parses back to exactly x.
std::string format_number(double x);
double parse_number(std::string_view token);

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
  const std::string &text(std::size_t row, std::string_view name) const;
};

void write_csv(std::ostream &os, const CsvTable &table);
void save_csv(const CsvTable &table, const std::string &path);
CsvTable read_csv(std::istream &is);
CsvTable load_csv(const std::string &path);

}  // namespace sketchir
