#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blend {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Fixed dialect: comma delimiter, double-quote quoting with "" escapes,
// first record is the header. Quoted fields may span lines; CRLF and LF
// are both accepted. Throws CsvError on unbalanced or stray quotes.
CsvTable parse_csv(std::string_view text);

CsvTable read_csv_file(const std::filesystem::path& path);

// Quotes the field iff it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

}  // namespace blend
