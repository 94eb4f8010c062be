#pragma once

#include <functional>
#include <string_view>

namespace nudg {

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink (default: one line on std::clog).
/// Returns the previous handler.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace nudg
