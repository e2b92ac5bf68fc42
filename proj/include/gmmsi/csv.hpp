#pragma once

#include <string>
#include <vector>

namespace gmmsi {

/// Round-trip decimal (17 significant digits); "nan", "inf", "-inf" for
/// non-finite values.
std::string format_double(double v);

/// Small in-memory CSV table. Cells are written verbatim, so callers format
/// numbers with format_double.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& data() const { return rows_; }

  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes `content` to a temporary sibling file and renames it over `path`,
/// so readers never observe a partial file. Throws Error(kIo).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace gmmsi
