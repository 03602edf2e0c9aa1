#include <bicomp/report.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace bicomp {

namespace {

template <auto Field>
double field(const Metrics& m)
{
    return static_cast<double>(m.*Field);
}

std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode = std::ios::out)
{
    std::ofstream f(p, mode | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

} // namespace

const std::vector<MetricColumn>& metric_columns()
{
    static const std::vector<MetricColumn> cols{
        {"elapsed_s", "s", "simulated time at stop", field<&Metrics::elapsed_s>},
        {"height", "blocks", "chosen-chain height", field<&Metrics::height>},
        {"injected_txs", "tx", "transactions generated by the workload", field<&Metrics::injected_txs>},
        {"packaged_txs", "tx", "transactions carried by chosen-chain macroblocks, duplicates included",
         field<&Metrics::packaged_txs>},
        {"valid_txs", "tx", "non-overlapping valid transactions on the chosen chain", field<&Metrics::valid_txs>},
        {"total_tps", "tx/s", "packaged_txs / elapsed_s", field<&Metrics::total_tps>},
        {"nonoverlap_tps", "tx/s", "valid_txs / elapsed_s", field<&Metrics::nonoverlap_tps>},
        {"mean_block_bytes", "bytes", "mean serialized macroblock size on the chosen chain",
         field<&Metrics::mean_block_bytes>},
        {"expected_block_bytes", "bytes", "size of a macroblock filled to capacity and tx cap",
         field<&Metrics::expected_block_bytes>},
        {"mean_micros_per_block", "micro", "mean microblocks per chosen-chain macroblock",
         field<&Metrics::mean_micros_per_block>},
        {"mean_latency_s", "s", "workload tx injection to first sighting of its chosen-chain macroblock",
         field<&Metrics::mean_latency_s>},
        {"mean_queue_s", "s", "injection to the timestamp of the packaging microblock", field<&Metrics::mean_queue_s>},
        {"mean_inclusion_s", "s", "packaging microblock timestamp to macroblock first sighting",
         field<&Metrics::mean_inclusion_s>},
        {"forks", "blocks", "valid macroblocks seen by honest nodes but off the chosen chain", field<&Metrics::forks>},
        {"max_reorg_depth", "blocks", "deepest tip switch at an honest node", field<&Metrics::max_reorg_depth>},
        {"equivocations", "headers", "headers carrying two or more valid bodies", field<&Metrics::equivocations>},
        {"expirations", "events", "honest leader expirations", field<&Metrics::expirations>},
        {"attacker_reward", "coin", "coinbase and fee income of attacker nodes on the settled chain",
         field<&Metrics::attacker_reward>},
        {"honest_reward", "coin", "coinbase and fee income of honest nodes on the settled chain",
         field<&Metrics::honest_reward>},
        {"attacker_share", "ratio", "attacker_reward / total reward", field<&Metrics::attacker_share>},
        {"honest_share", "ratio", "honest_reward / total reward", field<&Metrics::honest_share>},
        {"ds_attempts", "count", "completed double-spend attempts", field<&Metrics::ds_attempts>},
        {"ds_successes", "count", "double-spend attempts that ended on the chosen chain after victim acceptance",
         field<&Metrics::ds_successes>},
        {"attack_releases", "count", "withheld blocks released", field<&Metrics::attack_releases>},
        {"attack_abandons", "count", "withheld blocks abandoned", field<&Metrics::attack_abandons>},
        {"detain_forks", "count", "header-detain races against a public block", field<&Metrics::detain_forks>},
        {"detain_private_lower", "count", "detain races where the private block had lower diversity",
         field<&Metrics::detain_private_lower>},
        {"max_private_lead", "blocks", "longest private lead during a double-spend attempt",
         field<&Metrics::max_private_lead>},
        {"conservation_ok", "bool", "supply equals genesis plus rewards on the chosen chain",
         [](const Metrics& m) { return m.conservation_ok ? 1.0 : 0.0; }},
        {"events", "count", "events processed", field<&Metrics::events>},
    };
    return cols;
}

const MetricColumn* find_metric(std::string_view name)
{
    for (const auto& c : metric_columns()) {
        if (name == c.name) return &c;
    }
    return nullptr;
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (v == std::floor(v) && std::fabs(v) < 9.0e15) return std::to_string(static_cast<long long>(v));
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_schema(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& leading)
{
    out << "column,unit,description\n";
    for (const auto& [name, desc] : leading) out << csv_field(name) << ",," << csv_field(desc) << '\n';
    for (const auto& c : metric_columns()) out << c.name << ',' << c.unit << ',' << csv_field(c.description) << '\n';
}

void write_metrics_csv(std::ostream& out, std::uint64_t seed, const Metrics& m)
{
    out << "seed";
    for (const auto& c : metric_columns()) out << ',' << c.name;
    out << '\n' << seed;
    for (const auto& c : metric_columns()) out << ',' << format_number(c.get(m));
    out << '\n';
}

void write_rounds_csv(std::ostream& out, const std::vector<RoundRow>& rows)
{
    out << "height,leader,honest,micros,txs,valid,bytes,timestamp_ms,first_seen_ms\n";
    for (const auto& r : rows) {
        out << r.height << ',' << r.leader << ',' << (r.honest ? 1 : 0) << ',' << r.micros << ',' << r.txs << ','
            << r.valid << ',' << r.bytes << ',' << r.timestamp << ',' << r.first_seen << '\n';
    }
}

void write_revenue_csv(std::ostream& out, const std::vector<RevenueRow>& rows)
{
    out << "node,honest,reward\n";
    for (const auto& r : rows) out << r.node << ',' << (r.honest ? 1 : 0) << ',' << r.reward << '\n';
}

void write_attempts_csv(std::ostream& out, const std::vector<DoubleSpendAttempt>& attempts, const BlockEntry* chosen_tip)
{
    out << "attempt,leader,started_ms,header,poison_tx,m1_height,accepted,accepted_at_ms,released,gave_up,success,"
           "m1_on_chain\n";
    for (std::size_t i = 0; i < attempts.size(); ++i) {
        const auto& a = attempts[i];
        const bool m1_on_chain = a.m1 != nullptr && chosen_tip != nullptr && BlockTree::is_ancestor(a.m1, chosen_tip);
        out << i << ',' << a.leader << ',' << a.started << ',' << a.header_hash.hex() << ',' << a.poison.hex() << ','
            << (a.m1 != nullptr ? a.m1->height : 0) << ',' << (a.accepted ? 1 : 0) << ',' << a.accepted_at << ','
            << (a.released ? 1 : 0) << ',' << (a.gave_up ? 1 : 0) << ',' << (a.success ? 1 : 0) << ','
            << (m1_on_chain ? 1 : 0) << '\n';
    }
}

RunResult run_to_directory(const Scenario& s, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    {
        auto f = open_out(dir / "scenario.scn");
        f << scenario_to_text(s);
    }
    std::optional<std::ofstream> trace;
    if (s.trace != TraceLevel::None) trace.emplace(open_out(dir / "trace.jsonl"));

    Simulation sim(s, trace ? &*trace : nullptr);
    RunResult r = sim.run();
    if (trace) {
        trace->flush();
        if (!*trace) throw std::runtime_error("failed writing trace.jsonl");
    }

    {
        auto f = open_out(dir / "metrics.csv");
        write_metrics_csv(f, s.seed, r.metrics);
    }
    {
        auto f = open_out(dir / "columns.csv");
        write_schema(f, {{"seed", "scenario seed"}});
    }
    {
        auto f = open_out(dir / "rounds.csv");
        write_rounds_csv(f, r.rounds);
    }
    {
        auto f = open_out(dir / "revenue.csv");
        write_revenue_csv(f, r.revenue);
    }
    if (s.attack == AttackStrategy::DoubleSpend) {
        auto f = open_out(dir / "attempts.csv");
        write_attempts_csv(f, r.attempts, sim.chosen_tip());
    }
    {
        auto f = open_out(dir / "chain.bin", std::ios::binary);
        const auto bytes = serialize_chain(r.chain);
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    return r;
}

} // namespace bicomp
