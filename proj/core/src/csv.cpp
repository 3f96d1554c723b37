#include "bsdelab/csv.hpp"

#include <cstdio>

#include "bsdelab/errors.hpp"

namespace bsdelab {

CsvWriter::CsvWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw Error("CsvWriter: cannot open '" + path + "' for writing");
}

std::string CsvWriter::format(const Cell& cell) {
  if (const double* d = std::get_if<double>(&cell)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  if (const long long* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  if (const std::uint64_t* u = std::get_if<std::uint64_t>(&cell)) return std::to_string(*u);
  if (const bool* b = std::get_if<bool>(&cell)) return *b ? "true" : "false";
  return std::get<std::string>(cell);
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  n_columns_ = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (n_columns_ != 0 && cells.size() != n_columns_)
    throw Error("CsvWriter: row width differs from header in '" + path_ + "'");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << format(cells[i]);
  }
  out_ << '\n';
}

void CsvWriter::flush() { out_.flush(); }

}  // namespace bsdelab
