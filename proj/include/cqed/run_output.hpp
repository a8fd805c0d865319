#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cqed/config.hpp"

namespace cqed {

enum class RunMode { mtef, exact, both };

RunMode parse_run_mode(const std::string& text);

struct RunSummary {
    int flagged_trajectories = 0;
    double flagged_fraction = 0.0;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;
};

// Executes the configured run and writes the CSV set plus run_meta.json under
// out_dir (subdirectories mtef/ and exact/ per solver).
RunSummary run(const RunConfig& config, RunMode mode, const std::filesystem::path& out_dir,
               int threads);

struct FileDeviation {
    std::string file;
    long cells = 0;
    long mask_mismatches = 0;
    double max_abs = 0.0;
    double mean_abs = 0.0;
};

struct CompareReport {
    std::vector<FileDeviation> files;
    double max_abs = 0.0;
    long mask_mismatches = 0;

    std::string to_json() const;
    std::string to_text() const;
};

// Compares the observable CSV sets of two run directories on identical grids.
CompareReport compare_runs(const std::filesystem::path& dir_a,
                           const std::filesystem::path& dir_b);

// Basis dimension / trajectory step counts for the configured run, without
// running anything.
std::string estimate_cost_text(const RunConfig& config);

} // namespace cqed
