#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace pdistill {

// Shortest round-trip-safe text for a double: 17 significant digits.
std::string format_g17(double v);
std::string format_fixed(double v, int decimals);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
// Writes bytes verbatim (LF endings are the caller's job).
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace pdistill
