#include "evcoord/scenario/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace evcoord::scenario {

namespace {
std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("csv: missing column '" + name + "'");
}

double CsvTable::num(size_t row, int col) const {
  const std::string& s = rows.at(row).at(static_cast<size_t>(col));
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("csv: cell '" + s + "' is not a number");
  }
}

const std::string& CsvTable::str(size_t row, int col) const {
  return rows.at(row).at(static_cast<size_t>(col));
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      t.header = split_line(line);
      first = false;
    } else {
      auto cells = split_line(line);
      if (cells.size() != t.header.size())
        throw std::runtime_error(path + ": row with " + std::to_string(cells.size()) +
                                 " cells, expected " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw std::runtime_error(path + ": empty file");
  return t;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // normalizes -0
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  // Shortest representation that round-trips exactly.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
  bool at_line_start = true;
};

CsvWriter::CsvWriter(std::string path) : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out) {
    delete impl_;
    throw std::runtime_error("cannot write " + path);
  }
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::header(const std::vector<std::string>& names) {
  for (size_t i = 0; i < names.size(); ++i)
    impl_->out << (i ? "," : "") << names[i];
  impl_->out << "\n";
}

void CsvWriter::cell(const std::string& s) {
  if (!impl_->at_line_start) impl_->out << ",";
  impl_->out << s;
  impl_->at_line_start = false;
}

void CsvWriter::cell(double v) { cell(format_number(v)); }
void CsvWriter::cell(int v) { cell(std::to_string(v)); }

void CsvWriter::end_row() {
  impl_->out << "\n";
  impl_->at_line_start = true;
}

}  // namespace evcoord::scenario
