#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "gqn/cli/run_config.hpp"

namespace gqn::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kConfigError = 2,
  kNumericError = 3,
  kDiverged = 4,
};

/// maps.csv, globals.csv and meta.json.
int cmd_run(const RunConfig& config, std::ostream& log);
/// gradcheck.json; fails when any group exceeds the tolerance or some global
/// vector gets no gradient. Grids above 1024 cells are refused.
int cmd_gradcheck(const RunConfig& config, std::ostream& log);
/// cost_report.json and bench.csv.
int cmd_bench(const RunConfig& config, std::ostream& log);
/// loss_curve.csv.
int cmd_train_demo(const RunConfig& config, std::ostream& log);

inline constexpr std::size_t kGradcheckMaxCells = 1024;

/// Loads the config, applies overrides and runs `command`, turning errors
/// into exit codes with a message on `err`.
int dispatch(const std::string& command, const std::filesystem::path& config_path,
             const Overrides& overrides, std::ostream& log, std::ostream& err);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace gqn::cli
