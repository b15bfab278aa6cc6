#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

namespace msfv::csv {

/// 17 significant digits, enough to round-trip any double.
std::string format(double value);

/// Shortest round-trip representation; used in file names.
std::string format_short(double value);

/// Opens `path` for writing in binary mode (LF line endings on every platform).
/// Throws std::runtime_error when the file cannot be created.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace msfv::csv
