#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace extremo::io {

/// Locale-independent, 17 significant digits; "inf"/"-inf"/"nan" for
/// non-finite values.
std::string format_double(double x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::string hex64(std::uint64_t value);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace extremo::io
