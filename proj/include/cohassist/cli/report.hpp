#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace cohassist::cli {

/// Serializes a report with sorted keys, two-space indentation and every floating value printed
/// with 17 significant digits, so equal reports are byte-identical and values round-trip exactly.
std::string dump_report(const nlohmann::json& report);

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace cohassist::cli
