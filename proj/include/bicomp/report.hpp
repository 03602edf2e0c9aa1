#pragma once

#include <bicomp/simulation.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace bicomp {

struct MetricColumn {
    const char* name;
    const char* unit;
    const char* description;
    double (*get)(const Metrics&);
};

//! Fixed column order of every metrics CSV.
const std::vector<MetricColumn>& metric_columns();
const MetricColumn* find_metric(std::string_view name);

//! Shortest round-trip decimal form; integers print without a fractional part.
std::string format_number(double v);

//! CSV field quoting for values containing separators or quotes.
std::string csv_field(std::string_view s);

//! column,unit,description for the metrics columns plus any extra leading columns.
void write_schema(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& leading = {});

void write_metrics_csv(std::ostream& out, std::uint64_t seed, const Metrics& m);
void write_rounds_csv(std::ostream& out, const std::vector<RoundRow>& rows);
void write_revenue_csv(std::ostream& out, const std::vector<RevenueRow>& rows);
void write_attempts_csv(std::ostream& out, const std::vector<DoubleSpendAttempt>& attempts, const BlockEntry* chosen_tip);

/**
 * Runs a scenario and writes its artifacts into dir: scenario.scn,
 * metrics.csv, columns.csv, rounds.csv, revenue.csv, attempts.csv (attacks
 * only), trace.jsonl (unless the trace level is none) and chain.bin.
 */
RunResult run_to_directory(const Scenario& s, const std::filesystem::path& dir);

} // namespace bicomp
