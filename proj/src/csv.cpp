#include "bicatch/csv.hpp"

#include <cstdio>
#include <sstream>

#include "bicatch/errors.hpp"

namespace bicatch::io {

std::string format_number(Real value) {
  if (value == 0.0) value = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& header)
    : out_(path) {
  if (!out_) throw std::runtime_error("cannot write '" + path + "'");
  out_ << header << '\n';
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<Real>& values) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_number(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << '\n'; }

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    if (line_no == 1) {
      while (std::getline(ls, cell, ',')) table.header.push_back(cell);
      continue;
    }
    std::vector<Real> row;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("non-numeric cell '" + cell + "'", line_no);
      }
    }
    if (!table.header.empty() && row.size() != table.header.size()) {
      throw ParseError("row width differs from header", line_no);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace bicatch::io
