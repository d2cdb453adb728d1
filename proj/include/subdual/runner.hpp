#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subdual/config.hpp"
#include "subdual/estimates.hpp"

namespace subdual {

// exit-code contract shared by every subcommand
enum ExitCode : int {
    exit_ok = 0,
    exit_config_error = 1,
    exit_solver_failed = 2,
    exit_verify_failed = 3,
};

std::string csv_join(const std::vector<std::string>& cells);
void write_text_file(const std::string& path, const std::string& content);
void ensure_dir(const std::string& path);

struct RunArtifacts {
    int exit_code = exit_ok;
    std::string failed_stage; // empty when exit_code == 0
    std::vector<EstimateReport> reports;
    std::vector<std::string> files_written;
};

// single-run pipelines behind the subcommands; out_dir may be empty (no files)
RunArtifacts run_resolvent(const RunConfig& cfg, const std::string& out_dir);
RunArtifacts run_identities(const RunConfig& cfg, const std::string& out_dir);
RunArtifacts run_solve(const RunConfig& cfg, const std::string& out_dir);
RunArtifacts run_react(const RunConfig& cfg, const std::string& out_dir);
RunArtifacts run_verify(const RunConfig& cfg, const std::vector<std::string>& estimates,
                        const std::string& out_dir);

// Cartesian sweep over cfg.sweep axes. Rows are emitted in lexicographic axis
// order regardless of completion order; summary.csv contains only
// deterministic columns (bit-identical across repeats for a fixed seed), wall
// times go to timings.csv alongside it.
RunArtifacts run_sweep(const RunConfig& cfg, const std::string& out_dir, int workers);

} // namespace subdual
