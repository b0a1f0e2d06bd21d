#include "modeshift/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "modeshift/format.hpp"

namespace modeshift {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

std::size_t CsvTable::require_column(const std::string& name) const {
  auto idx = column(name);
  if (!idx)
    throw IoError(source.string() + ": missing required column '" + name + "'");
  return *idx;
}

namespace {

// Splits one logical CSV record; returns false at end of stream. Quoted
// fields may contain commas, escaped quotes ("") and newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r') {
      // swallow; \r\n handled by the \n branch
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

bool needs_quoting(const std::string& field) {
  return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quoted(const std::string& field) {
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

void CsvTable::check_schema_version() const {
  for (const auto& comment : comments) {
    const std::string key = "# schema_version=";
    if (comment.rfind(key, 0) != 0) continue;
    int version = static_cast<int>(parse_int(comment.substr(key.size()),
                                             source.string() + ": schema_version"));
    if (version != kCsvSchemaVersion)
      throw IoError(source.string() + ": unsupported schema_version " +
                    std::to_string(version));
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  CsvTable table;
  table.source = path;
  std::vector<std::string> fields;
  for (;;) {
    if (!read_record(in, fields) || fields.empty() ||
        (fields.size() == 1 && fields[0].empty()))
      throw IoError(path.string() + ": empty file or missing header row");
    if (fields.size() == 1 && !fields[0].empty() && fields[0][0] == '#') {
      table.comments.push_back(fields[0]);
      continue;
    }
    break;
  }
  table.header = fields;
  table.check_schema_version();

  std::size_t line = 1;
  while (read_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != table.header.size())
      throw IoError(path.string() + ":" + std::to_string(line) + ": expected " +
                    std::to_string(table.header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    table.rows.push_back(fields);
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << (needs_quoting(fields[i]) ? quoted(fields[i]) : fields[i]);
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw IoError(path.string() + ": row width does not match header");
    emit(row);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

double parse_double(const std::string& text, const std::string& context) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  double value = 0.0;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw IoError(context + ": invalid number '" + text + "'");
  return value;
}

long long parse_int(const std::string& text, const std::string& context) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  long long value = 0;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw IoError(context + ": invalid integer '" + text + "'");
  return value;
}

}  // namespace modeshift
