#pragma once

#include <span>
#include <string>
#include <vector>

#include "densctl/metrics.hpp"
#include "densctl/micro.hpp"
#include "densctl/scenario.hpp"

namespace densctl {

inline constexpr const char* kVersion = "0.1.0";

struct RunRecord {
    std::string scenario_name;
    std::string scenario_hash;
    std::string version;
    double wall_seconds = 0.0;
    MetricsTable metrics;
    // final density sampled on the grid (row-major for 2D) plus grid shape
    std::vector<double> final_density;
    int n1 = 0, n2 = 0;
    double half_width = 0.0;
    // micro extras
    std::vector<Snapshot> snapshots;
    std::vector<double> max_abs_drift;
    long containment_violations = 0;
    int n_agents = 0;
    double gain_floor = 0.0;
    double min_density = 0.0;  // macro runs: minimum over every step
};

/// Validate, build and execute one scenario.
RunRecord run(const Scenario& s);

/// Vary exactly one declared parameter. The seed is kept fixed across
/// elements unless the swept parameter is the seed itself. Elements execute
/// concurrently up to `workers`.
std::vector<RunRecord> sweep(const Scenario& s, const std::string& param,
                             std::span<const double> values, int workers = 1);

struct BoundCheckResult {
    bool pass = true;
    double first_violation_t = -1.0;
    int samples_checked = 0;
};

/// Verifies e(t)^2 <= e(0)^2 exp(-k_p t) (1 + slack) for every sample above
/// the floor value.
BoundCheckResult exponential_bound_check(std::span<const double> t,
                                         std::span<const double> l2_error, double k_p,
                                         double slack, double floor_value);

/// metrics.csv, final_density.csv, record.json and (micro, when snapshots
/// were recorded) snapshots.csv under `dir`.
void write_run_outputs(const RunRecord& r, const std::string& dir);

}  // namespace densctl
