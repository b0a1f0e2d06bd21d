#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modeshift/errors.hpp"

namespace modeshift {

inline constexpr int kCsvSchemaVersion = 1;

// Minimal RFC-4180-style CSV: header row, comma separators, double-quote
// escaping, "." decimal separator, UTF-8 passed through untouched. Lines
// starting with '#' before the header carry metadata, notably
// "# schema_version=N".
struct CsvTable {
  std::filesystem::path source;
  std::vector<std::string> comments;  // leading '#' lines, verbatim
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(const std::string& name) const;
  // Column index or IoError naming the file and the missing column.
  std::size_t require_column(const std::string& name) const;
  // Parsed "# schema_version=N" if present; IoError on unsupported versions.
  void check_schema_version() const;
};

CsvTable read_csv(const std::filesystem::path& path);

// Writes "# schema_version=1", the header, then the rows.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Strict double parse; context lands in the error message.
double parse_double(const std::string& text, const std::string& context);
long long parse_int(const std::string& text, const std::string& context);

}  // namespace modeshift
