#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace nudg::csv {

/// Shortest-roundtrip-safe rendering: 17 significant digits, "%g" style.
std::string number(double x);

/// Empty field when absent.
std::string number(const std::optional<double>& x);

/// Writes `content` to `path`, creating parent directories. Throws
/// std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace nudg::csv
