#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace logbandit {

/// 64-bit FNV-1a, stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex_digest(std::string_view bytes);

/// Shortest round-trippable decimal form of a double.
std::string exact_decimal(double v);
/// Decimal form with 12 significant digits, the serialization precision of
/// every output file.
std::string fmt12(double v);

}  // namespace logbandit
