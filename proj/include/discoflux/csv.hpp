#ifndef DISCOFLUX_CSV_HPP
#define DISCOFLUX_CSV_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace discoflux {

/// Shortest round-trip form: 17 significant digits, '.' separator.
std::string format_real(double v);

/// Comma-separated writer with a fixed header; throws std::runtime_error on I/O failure.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();

  CsvWriter& cell(double v);
  CsvWriter& cell(std::int64_t v);
  CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  CsvWriter& cell(const std::string& v);
  void end_row();
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t pending_ = 0;
};

}  // namespace discoflux

#endif  // DISCOFLUX_CSV_HPP
