#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "config.hpp"

namespace efk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNoConvergence = 1;
inline constexpr int kExitConfig = 2;

/// Runs analyze | kink1d | solve | verify | sweep with all outputs under
/// `out_dir`, finishing with manifest.json. Returns the process exit code;
/// errors are described on `log`.
int run_command(const std::string& command, const Config& config, const std::filesystem::path& out_dir,
                std::ostream& log);

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::filesystem::path& out_dir, std::ostream& log);

/// Exit code for a library error category.
int exit_code_for(const std::exception& e);

}  // namespace efk::cli
