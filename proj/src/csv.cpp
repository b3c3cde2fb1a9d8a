// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sketchir/error.hpp"

namespace sketchir
{

std::string format_number(double x)
{
  if (std::isnan(x))
  {
    return "nan";
  }
  if (std::isinf(x))
  {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view token)
{
  if (token == "nan")
  {
    return std::nan("");
  }
  if (token == "inf")
  {
    return HUGE_VAL;
  }
  if (token == "-inf")
  {
    return -HUGE_VAL;
  }
  double x = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), x);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
  {
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(token) + "'");
  }
  return x;
}

std::size_t CsvTable::column(std::string_view name) const
{
  for (std::size_t i = 0; i < header.size(); ++i)
  {
    if (header[i] == name)
    {
      return i;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "no column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::string_view name) const
{
  return parse_number(rows.at(row).at(column(name)));
}

const std::string &CsvTable::text(std::size_t row, std::string_view name) const
{
  return rows.at(row).at(column(name));
}

namespace
{

void write_line(std::ostream &os, const std::vector<std::string> &fields)
{
  for (std::size_t i = 0; i < fields.size(); ++i)
  {
    if (i > 0)
    {
      os << ',';
    }
    const std::string &f = fields[i];
    if (f.find_first_of(",\"\n") != std::string::npos)
    {
      os << '"';
      for (char c : f)
      {
        if (c == '"')
        {
          os << '"';
        }
        os << c;
      }
      os << '"';
    }
    else
    {
      os << f;
    }
  }
  os << '\n';
}

std::vector<std::string> split_line(const std::string &line, std::size_t lineno)
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i)
  {
    const char c = line[i];
    if (quoted)
    {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
      {
        cur += '"';
        ++i;
      }
      else if (c == '"')
      {
        quoted = false;
      }
      else
      {
        cur += c;
      }
    }
    else if (c == '"')
    {
      quoted = true;
    }
    else if (c == ',')
    {
      out.push_back(std::move(cur));
      cur.clear();
    }
    else
    {
      cur += c;
    }
  }
  if (quoted)
  {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unterminated quote");
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

void write_csv(std::ostream &os, const CsvTable &table)
{
  write_line(os, table.header);
  for (const auto &row : table.rows)
  {
    write_line(os, row);
  }
}

void save_csv(const CsvTable &table, const std::string &path)
{
  std::ofstream os(path);
  if (!os)
  {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  }
  write_csv(os, table);
}

CsvTable read_csv(std::istream &is)
{
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line))
  {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
    {
      line.pop_back();
    }
    if (line.empty())
    {
      continue;
    }
    auto fields = split_line(line, lineno);
    if (t.header.empty())
    {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
    {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                             std::to_string(t.header.size()) + " fields, got " +
                                             std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

CsvTable load_csv(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
  {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  }
  return read_csv(is);
}

}  // namespace sketchir
