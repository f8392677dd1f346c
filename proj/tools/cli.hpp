#ifndef MUTGEN_TOOLS_CLI_HPP
#define MUTGEN_TOOLS_CLI_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "mutgen/expansion.hpp"
#include "mutgen/sexpr.hpp"

namespace mutgen::cli {

enum class Command { Parse, MakeFlag, CheckEquiv, Dmgen, Expand, ScaffoldSk };

std::optional<Command> parse_command(std::string_view name);

struct RunConfig {
  Command command = Command::Parse;
  std::string input_path;
  std::optional<std::string> output_path;
  std::optional<std::string> clique_name;
  /// Only meaningful for `expand`.
  std::optional<Stage> stage;
  std::uint64_t seed = 0;
  /// Only meaningful for `check-equiv`; defaults to 1000 there.
  std::optional<std::size_t> trials;
  bool wrap_encapsulate = false;
  PrintStyle format = PrintStyle::Pretty;
};

struct RunResult {
  /// 0 success, 1 user error, 2 failing equivalence report.
  int exit_code = 0;
  std::string output;
  /// Error and warning lines for stderr.
  std::string diagnostics;
};

/// Runs one command over the contents of an input file. Never throws for
/// user errors; they come back as exit code 1 with a `file:line:col:` message.
RunResult run(const RunConfig& config, std::string_view input);

/// Command-line entry point: parses flags, reads the input file, and writes
/// the result to stdout or `--output`.
int main_entry(int argc, char** argv);

}  // namespace mutgen::cli

#endif  // MUTGEN_TOOLS_CLI_HPP
