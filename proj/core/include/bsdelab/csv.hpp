#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace bsdelab {

// Minimal CSV emitter: comma separation, '\n' rows, doubles at full precision
// (%.17g) so reports are bit-faithful and reproducible byte-for-byte.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::uint64_t, std::string, bool>;

  explicit CsvWriter(const std::string& path);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<Cell>& cells);
  void flush();

  static std::string format(const Cell& cell);

 private:
  std::ofstream out_;
  std::size_t n_columns_ = 0;
  std::string path_;
};

}  // namespace bsdelab
