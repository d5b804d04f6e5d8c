#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace evtab::csv {

using Record = std::vector<std::string>;

/// Parses RFC-4180 text: quoted fields may hold separators, doubled quotes
/// and line breaks; CRLF and LF both end a record. A trailing newline does
/// not produce an empty record. Throws InputError on an unterminated quote.
std::vector<Record> parse(std::string_view text, char separator = ',');

/// Writes records with LF line endings, quoting only fields that need it.
std::string write(const std::vector<Record>& records, char separator = ',');

}  // namespace evtab::csv
