#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace torusflow::cli {

enum ExitCode : int { kPass = 0, kUsage = 1, kCheckFailed = 2 };

/// Environment variable naming the default output directory for commands run without --out.
inline constexpr const char* kOutDirEnv = "TORUSFLOW_OUT_DIR";

/// Parses a key=value config file into "--key=value" tokens. Blank lines and lines
/// starting with '#' are skipped. Throws std::runtime_error on unreadable files and
/// malformed lines.
std::vector<std::string> load_config_tokens(const std::string& path);

/// Removes every "--config FILE" / "--config=FILE" from args and inserts the file's tokens
/// right after the subcommand name, so flags given on the command line (parsed later)
/// override the file.
std::vector<std::string> splice_config(std::vector<std::string> args);

/// Entry point without argv[0]. Returns an ExitCode.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace torusflow::cli
