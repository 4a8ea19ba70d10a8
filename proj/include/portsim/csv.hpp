#pragma once

// Minimal CSV reading/writing for the project's own formats. Fields are
// plain comma-separated values without quoting; identifiers must not
// contain commas.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

namespace portsim {

class CsvReader {
 public:
  CsvReader(std::istream& in, std::string name);

  /// Header fields (read on construction).
  const std::vector<std::string>& header() const { return header_; }
  void expect_header(const std::vector<std::string>& expected) const;

  /// Reads the next non-blank row. Returns false at end of input.
  bool next(std::vector<std::string>& fields);

  std::size_t line() const { return line_; }
  const std::string& name() const { return name_; }

  [[noreturn]] void fail(const std::string& what) const;
  [[noreturn]] void fail_header(const std::string& what) const;

 private:
  std::istream& in_;
  std::string name_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
};

std::vector<std::string> split_csv_line(const std::string& line);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
};

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);

}  // namespace portsim
