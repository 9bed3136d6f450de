#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgch::cli {

/// Process exit codes of `sgch run`.
enum class Status : int {
  ok = 0,
  bound_failed = 1,
  parse_error = 2,
  invalid_config = 3,
  unstable = 4,
};

/// Command-line and environment overrides; unset fields fall back to the
/// config file, then to the built-in defaults.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::filesystem::path> out;
};

/// Reads SGCH_SEED and SGCH_THREADS.  Malformed values are ignored with a
/// warning on `log`.
Overrides environment_overrides(std::ostream& log);

/// Flag values win over environment values.
Overrides merge(const Overrides& flags, const Overrides& env);

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunResult {
  Status status = Status::ok;
  std::string message;
  std::filesystem::path output_dir;
  std::vector<Verdict> verdicts;
};

/// Parses, validates and executes one experiment config.  Writes
/// summary.json and the CSV series into the output directory and prints
/// one line per bound check on `log`.
RunResult run_file(const std::filesystem::path& config, const Overrides& overrides, std::ostream& log);
RunResult run_text(std::string_view toml_text, std::string_view source_name, const Overrides& overrides,
                   std::ostream& log);

struct CatalogueEntry {
  std::string kind;
  std::string checks;
  std::vector<std::string> sections;
  std::string minimal_config;
};

const std::vector<CatalogueEntry>& catalogue();

void print_catalogue(std::ostream& os);

}  // namespace sgch::cli
