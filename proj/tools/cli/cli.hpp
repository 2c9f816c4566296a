#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fgnmt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one fgnmt command. `args` excludes the program name. Returns the
/// process exit code: 0 success, 2 usage/data error, 3 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// key=value lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace fgnmt::cli
