#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deltahjb::csv {

/// Shortest round-trippable text for artifacts: 17 significant digits.
std::string num(double value);

void write_row(std::ostream& os, std::span<const std::string> fields);

std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace deltahjb::csv
