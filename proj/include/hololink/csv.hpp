#pragma once

#include <string>
#include <vector>

namespace hololink {

// RFC 4180 parsing: comma-separated fields, optional double-quote quoting with
// "" escapes; quoted fields may contain commas and newlines. Accepts CRLF and
// LF record separators and an optional UTF-8 BOM.
std::vector<std::vector<std::string>> parse_csv_text(const std::string& text);

// Quotes a field only when it needs quoting.
std::string csv_escape(const std::string& field);

}  // namespace hololink
