#pragma once

#include <bicomp/scenario.hpp>
#include <bicomp/simulation.hpp>

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace bicomp {

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

/**
 * "key=v1,v2,v3" or "key=lo..hi" or "key=lo..hi:step" (integers). Throws
 * std::invalid_argument on malformed specs.
 */
SweepAxis parse_axis(std::string_view spec);

struct SweepRun {
    std::size_t point = 0;
    std::uint64_t seed = 0;
    std::optional<Metrics> metrics;
    std::string trace_hash;
    std::string error;
};

struct SweepResult {
    std::vector<SweepAxis> axes;
    //! Axis values per point, in cartesian order with the last axis varying fastest.
    std::vector<std::vector<std::string>> points;
    //! Sorted by (point, seed).
    std::vector<SweepRun> runs;
};

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

/**
 * Runs every point of the axes product with seeds base.seed .. base.seed+seeds-1.
 * Runs are distributed over jobs threads; output order does not depend on it.
 * Axis keys are checked up front; a run that fails records its error and the
 * sweep continues.
 */
SweepResult run_sweep(const Scenario& base, const std::vector<SweepAxis>& axes, std::uint32_t seeds, unsigned jobs = 1,
                      const SweepProgress& progress = {});

/**
 * One "run" row per (point, seed) followed by one "mean" row per point whose
 * metric columns hold the mean over successful seeds and whose _sd columns hold
 * the sample standard deviation.
 */
void write_sweep_csv(std::ostream& out, const SweepResult& r);
void write_sweep_schema(std::ostream& out, const SweepResult& r);

} // namespace bicomp
