#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace extremo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Parses `key = value` lines; '#' starts a comment. Throws ConfigError.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Entry point of the `extremo` executable. Primary output goes to --out
/// (atomically) or to `out` when --out is absent; errors go to `err` as a
/// single JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace extremo::cli
