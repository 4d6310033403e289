#pragma once

// Pipeline orchestration: geometry -> measures -> transport -> potential ->
// chambers -> oracle, with CSV/JSON artifact export.

#include <optional>
#include <string>
#include <vector>

#include "otlim/chambers.hpp"
#include "otlim/geometry.hpp"
#include "otlim/measures.hpp"
#include "otlim/oracle.hpp"
#include "otlim/potential.hpp"
#include "otlim/transport.hpp"

namespace otlim {

struct RunConfig {
    ProblemConfig problem;
    int simplex_resolution = 0;
    int dual_resolution = 0;
    std::string solver = "exact";  // "exact" | "entropic"
    EpsSchedule entropic;
    std::string output_dir = ".";
    int pushforward_bins = 5;  // dual-grid resolution of the histogram bins
    double delta_wall = 0.02;
    bool emit_plan = false;
    std::uint64_t seed = 0;  // Monte Carlo spot checks only, never the solve

    struct Reports {
        bool oracle_comparison = true;
        bool chamber_map = true;
        std::vector<int> fs_ks = {4, 8, 16, 32};
        bool mu_checks = true;
        bool independence = true;
        bool symmetry = true;
    } reports;

    void validate() const;
};

// Throws ConfigError with a diagnostic naming the offending field.
RunConfig parse_run_config(const std::string& path);

inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverError = 3;
inline constexpr int kExitValidationError = 4;

// Full pipeline; writes potential.csv, dual.csv, map.csv, chambers.csv,
// plan.csv (optional) and report.json into the output directory. Returns the
// process exit status (0, or kExitValidationError when strict and a
// validation threshold is breached).
int run_pipeline(const RunConfig& cfg, bool strict);

// Cheap checks only (C1 quadrature vs closed form, grid counts, measure
// masses); writes report.json, solves nothing.
int validate_pipeline(const RunConfig& cfg, bool strict);

}  // namespace otlim
