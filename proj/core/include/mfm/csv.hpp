#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mfm::csv {

/// One parsed record plus the physical line it started on (1-based).
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// RFC 4180 reader: comma-delimited, double-quote quoting with "" escapes,
/// quoted fields may span lines, CRLF or LF terminators. A UTF-8 BOM at the
/// start of input is skipped. `source` is used in error messages.
std::vector<Record> parse(std::string_view text, std::string_view source, char delimiter = ',');

/// Quotes a field when it contains the delimiter, a quote, CR or LF.
std::string escape(std::string_view field, char delimiter = ',');

/// Writes one record terminated by "\n".
void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

/// Reads a whole file into memory; throws mfm::Error on I/O failure.
std::string read_file(const std::string& path);

}  // namespace mfm::csv
