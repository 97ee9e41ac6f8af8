#include "discoflux/csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace discoflux {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Guard against a locale with a comma decimal separator.
  for (char* p = buf; *p; ++p) {
    if (*p == ',') *p = '.';
  }
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter::~CsvWriter() {
  if (out_.is_open()) out_.close();
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_real(v)); }

CsvWriter& CsvWriter::cell(std::int64_t v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (pending_ >= columns_) throw std::logic_error("too many cells for " + path_);
  out_ << (pending_ ? "," : "") << v;
  ++pending_;
  return *this;
}

void CsvWriter::end_row() {
  if (pending_ != columns_) throw std::logic_error("incomplete row in " + path_);
  out_ << '\n';
  pending_ = 0;
  if (!out_) throw std::runtime_error("write failed for " + path_);
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw std::runtime_error("closing " + path_ + " failed");
}

}  // namespace discoflux
