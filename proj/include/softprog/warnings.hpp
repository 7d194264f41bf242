#pragma once

#include <functional>
#include <string>

namespace softprog {

using WarningHandler = std::function<void(const std::string&)>;

/// Replace the process-wide warning sink (default: stderr). Returns the
/// previous handler.
WarningHandler set_warning_handler(WarningHandler handler);
void emit_warning(const std::string& message);

} // namespace softprog
