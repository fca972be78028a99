#include "keig/io.hpp"

#include <cstdio>
#include <fstream>

#include "keig/errors.hpp"

namespace keig {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string cell(double v) { return format_double(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(long long v) { return std::to_string(v); }

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void write_line(std::ofstream& out, const CsvRow& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvRow& header,
               const std::vector<CsvRow>& rows) {
  std::ofstream out = open_out(path);
  write_line(out, header);
  for (const auto& row : rows) write_line(out, row);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace keig
