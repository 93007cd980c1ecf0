#pragma once

#include <string>

namespace gmpbound {

inline constexpr const char* kVersion = "0.1.0";

/// 15 significant digits, for records and CSV files.
std::string fmt_machine(double value);
/// 6 significant digits, for human-readable lines.
std::string fmt_human(double value);

}  // namespace gmpbound
