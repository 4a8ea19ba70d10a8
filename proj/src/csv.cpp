#include "portsim/csv.hpp"

#include <charconv>
#include <istream>

#include "portsim/common.hpp"

namespace portsim {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(',', start);
    if (end == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

namespace {

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

CsvReader::CsvReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {
  std::string line;
  while (read_line(in_, line)) {
    ++line_;
    if (line.empty()) continue;
    header_ = split_csv_line(line);
    return;
  }
  throw ParseError(name_, line_, "missing header row");
}

void CsvReader::expect_header(const std::vector<std::string>& expected) const {
  if (header_ == expected) return;
  std::string want;
  for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + expected[i];
  fail_header("expected header " + want);
}

bool CsvReader::next(std::vector<std::string>& fields) {
  std::string line;
  while (read_line(in_, line)) {
    ++line_;
    if (line.empty()) continue;
    fields = split_csv_line(line);
    return true;
  }
  return false;
}

void CsvReader::fail(const std::string& what) const { throw ParseError(name_, line_, what); }

void CsvReader::fail_header(const std::string& what) const { throw ParseError(name_, 1, what); }

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw Error("cannot write " + path.string());
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace portsim
