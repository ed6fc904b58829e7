#pragma once

#include <ostream>
#include <string>

#include "fockbench/scenario.hpp"

namespace fockbench {

// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double value);

// Quotes a field when it holds a comma, quote or line break.
std::string csv_field(const std::string& text);

// RFC 4180: CRLF record ends, one header record, '.' decimal separator.
void write_csv(std::ostream& out, const Table& table);

}  // namespace fockbench
