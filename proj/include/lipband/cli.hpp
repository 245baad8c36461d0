#pragma once
// Subcommand entry points, kept in the library so they can be exercised by
// tests without spawning processes.  Exit codes: 0 success, 1 validation or
// invariant failure, 2 unreadable input (file or config syntax).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lipband {

struct CliOverrides {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    int jobs = 0;  // 0 picks hardware concurrency
};

int cmd_run(const std::string& config_path, const CliOverrides& overrides);
int cmd_sweep(const std::string& config_path, const std::vector<std::uint64_t>& horizons,
              const CliOverrides& overrides);
int cmd_verify(const std::optional<std::string>& config_path);
int cmd_plot_data(const std::string& experiment_dir);

} // namespace lipband
