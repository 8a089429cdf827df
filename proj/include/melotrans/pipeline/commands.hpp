/**
 * @file commands.hpp
 * @brief The melotrans command line: label, build-dataset, motif, melody,
 * train, eval and synth-corpus.
 *
 * Exit codes: 0 success, 1 usage or configuration error, 2 data error
 * (missing or malformed files, module failures).
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace melotrans::pipeline {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Config files are TOML with `config-version = 1` at the top and one table
/// per subcommand (e.g. `[motif]`); flags given on the command line win.
inline constexpr int kConfigVersion = 1;

/// Runs one command; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace melotrans::pipeline
