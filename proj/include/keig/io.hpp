#pragma once

// CSV/JSON emission. All floating-point cells go through one shortest-exact
// formatter so identical runs produce identical bytes.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace keig {

std::string format_double(double v);  // %.17g, round-trip exact

using CsvRow = std::vector<std::string>;

std::string cell(double v);
std::string cell(int v);
std::string cell(long long v);
inline std::string cell(const std::string& v) { return v; }

// Writes header + rows, comma separated, trailing newline. Throws IoError.
void write_csv(const std::filesystem::path& path, const CsvRow& header,
               const std::vector<CsvRow>& rows);

// Pretty-printed with sorted keys (nlohmann's default object ordering).
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace keig
