#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cqed/ghztest.hpp"

namespace cqed::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kValidation = 2, kNumerical = 3 };

/// Flat `key = value` pairs, as read from a config file or collected from flags.
using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
KeyValues parse_config_text(std::string_view text);
KeyValues read_config_file(const std::string &path);

struct RunConfig {
    double alpha = 2.0;
    std::size_t dim = 64;
    std::size_t shots = 1000;
    std::uint64_t seed = 0;
    std::optional<double> gt_probe;
    double phi = std::numbers::pi;
    std::vector<double> delta_over_g{50.0, 100.0, 200.0};
    std::string output;
    std::string mode = "atomic";
    std::string sign = "+";
    std::string variant = "phi+";
    std::string format = "json";
    unsigned threads = 1;
    /// Truncation and fixed phase for dispersive-convergence.
    std::size_t convergence_dim = 16;
    double convergence_phi = std::numbers::pi / 16.0;
    /// Number of probe times in probe-sweep (0 .. 2x optimal).
    std::size_t sweep_points = 41;
};

/// Every key accepted in a config file (and by the matching --flag).
const std::vector<std::string> &config_keys();

/// Defaults, overridden by `file`, overridden by `flags`. Unknown keys and
/// unparsable or out-of-range values raise ValidationError naming the key.
RunConfig resolve_config(const KeyValues &file, const KeyValues &flags);

/// Flat key/value echo of a resolved config, as embedded in every report.
KeyValues echo(const RunConfig &config);

struct CommandResult {
    int exit_code = kSuccess;
    std::string report;
    std::string error;
};

/// Runs one subcommand (prepare-epr, prepare-ghz, ghz-test, probe-sweep,
/// dispersive-convergence) and renders its report. Never throws: errors are
/// mapped to exit codes.
CommandResult execute(std::string_view command, const RunConfig &config);

const std::vector<std::string> &commands();

} // namespace cqed::cli
