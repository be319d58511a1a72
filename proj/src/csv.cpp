#include "blend/csv.hpp"

#include <fstream>
#include <sstream>

namespace blend {

namespace {

// One RFC-4180-style record starting at `pos`. Returns false at end of input.
bool parse_record(std::string_view text, std::size_t& pos,
                  std::vector<std::string>& out) {
  if (pos >= text.size()) return false;
  out.clear();
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;

  while (pos <= text.size()) {
    if (pos == text.size()) {
      if (in_quotes) throw CsvError("unbalanced quote at end of input");
      out.push_back(std::move(field));
      return true;
    }
    char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field += '"';
          pos += 2;
        } else {
          in_quotes = false;
          ++pos;
        }
      } else {
        field += c;
        ++pos;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted)
          throw CsvError("stray quote inside unquoted field");
        in_quotes = true;
        field_was_quoted = true;
        ++pos;
        break;
      case ',':
        out.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        ++pos;
        break;
      case '\r':
        if (pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
        [[fallthrough]];
      case '\n':
        ++pos;
        out.push_back(std::move(field));
        return true;
      default:
        if (field_was_quoted)
          throw CsvError("data after closing quote");
        field += c;
        ++pos;
    }
  }
  return false;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  if (text.starts_with("\xef\xbb\xbf")) text.remove_prefix(3);
  CsvTable table;
  std::size_t pos = 0;
  std::vector<std::string> record;
  if (!parse_record(text, pos, record)) throw CsvError("missing header row");
  table.header = std::move(record);
  while (parse_record(text, pos, record)) {
    // A bare trailing newline yields one empty field; skip it.
    if (record.size() == 1 && record[0].empty() && pos >= text.size()) break;
    table.rows.push_back(std::move(record));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::string csv_escape(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot write " + path.string());
  auto write_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(row[i]);
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

}  // namespace blend
