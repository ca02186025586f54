#pragma once

#include <string>
#include <vector>

namespace evcoord::scenario {

/// Minimal CSV table: a header row plus string cells. All project file
/// schemas are plain comma-separated text with a header line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws when absent
  double num(size_t row, int col) const;
  const std::string& str(size_t row, int col) const;
};

CsvTable read_csv(const std::string& path);

/// Writes rows with deterministic number formatting (shortest round-trip
/// representation), so identical inputs give byte-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(std::string path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& names);
  void cell(const std::string& s);
  void cell(double v);
  void cell(int v);
  void end_row();

 private:
  struct Impl;
  Impl* impl_;
};

std::string format_number(double v);

}  // namespace evcoord::scenario
