#pragma once

// Minimal CSV writing/reading with deterministic number formatting
// (shortest round-trip via %.17g trimmed through to_string rules is not
// reproducible across libcs; fixed %.12g is, and is what all artifacts use).

#include <fstream>
#include <string>
#include <vector>

#include "bicatch/types.hpp"

namespace bicatch::io {

std::string format_number(Real value);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header);
  ~CsvWriter();
  void row(const std::vector<Real>& values);
  void raw_row(const std::string& line);

 private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<Real>> rows;
};

// Numeric CSV with a single header line. Throws ParseError.
CsvTable read_csv(const std::string& path);

}  // namespace bicatch::io
