// ===== Experiment orchestration =====
//
// Runs the requested pipeline(s) for a config and renders the results as
// CSV rows plus a JSON summary.  This is the only layer that touches the
// filesystem; emit_report writes atomically via temp + rename.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfsmp/config.hpp"

namespace mfsmp {

struct CsvRow {
    std::string quantity;
    std::int64_t index = 0;
    double value = 0.0;
    double se = 0.0;
};

struct ReportBundle {
    std::string experiment_id;
    std::string subcommand;
    std::vector<CsvRow> rows;
    nlohmann::ordered_json summary;
    int exit_code = 0;  ///< 0 pass, 2 an acceptance check failed
};

/// Valid subcommands: forward, filter-check, taylor, duality, smp-scan,
/// brute-force, all.
ReportBundle run_experiment(const ExperimentConfig& config, const std::string& subcommand);

struct ReportPaths {
    std::filesystem::path csv;
    std::filesystem::path json;
};

/// Writes <id>_<subcommand>.csv and .json under out_dir, creating the
/// directory tree and replacing existing files atomically.
ReportPaths emit_report(const ReportBundle& bundle, const std::filesystem::path& out_dir);

}  // namespace mfsmp
