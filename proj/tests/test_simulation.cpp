#include "oracles.hpp"

#include <bicomp/report.hpp>
#include <bicomp/simulation.hpp>
#include <bicomp/sweep.hpp>
#include <bicomp/verify.hpp>

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace bicomp;
namespace fs = std::filesystem;

namespace {

//! Eight fast nodes: ~37 s header interval, ~4.7 s microblocks, light load.
Scenario small(std::uint64_t seed = 5)
{
    Scenario s;
    s.seed = seed;
    s.stop_time_s = 900;
    s.trace = TraceLevel::None;
    s.nodes = 8;
    s.degree = 3;
    s.regions = 2;
    s.hash_power = 14000;
    s.tx_rate = 20;
    s.accounts = 400;
    return s;
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("bicomp-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') quoted = !quoted;
        else if (c == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else cur += c;
    }
    out.push_back(cur);
    return out;
}

} // namespace

TEST_CASE("a run stopped immediately holds only genesis")
{
    auto s = small();
    s.stop_time_s = 0.001;
    const auto r = run_scenario(s);
    CHECK(r.metrics.height == 0);
    CHECK(r.chain.blocks.size() == 1);
    CHECK(r.metrics.valid_txs == 0);
    CHECK(r.metrics.total_tps == 0);
    CHECK(r.metrics.conservation_ok);
    CHECK(r.chain.blocks[0]->header.hash() == make_genesis(s.n_macro).header.hash());
}

TEST_CASE("runs are deterministic per seed")
{
    const auto a = run_scenario(small(5));
    const auto b = run_scenario(small(5));
    const auto c = run_scenario(small(6));
    CHECK(a.trace_hash == b.trace_hash);
    CHECK(a.tip_id == b.tip_id);
    CHECK(a.metrics.valid_txs == b.metrics.valid_txs);
    CHECK(a.trace_hash != c.trace_hash);

    // Trace output does not perturb the run.
    auto s = small(5);
    s.trace = TraceLevel::Full;
    std::ostringstream out;
    const auto d = run_scenario(s, &out);
    CHECK(d.tip_id == a.tip_id);
    CHECK(d.metrics.valid_txs == a.metrics.valid_txs);
    CHECK(out.str().size() > 1000);
}

TEST_CASE("metrics are consistent with the chosen chain")
{
    const auto s = small(9);
    const auto r = run_scenario(s);
    const auto& m = r.metrics;
    REQUIRE(m.height >= 5);
    CHECK(m.conservation_ok);
    CHECK(m.valid_txs > 0);
    CHECK(m.nonoverlap_tps <= m.total_tps);
    CHECK(m.total_tps * m.elapsed_s == doctest::Approx(static_cast<double>(m.packaged_txs)));
    CHECK(m.nonoverlap_tps * m.elapsed_s == doctest::Approx(static_cast<double>(m.valid_txs)));
    CHECK(m.mean_block_bytes <= m.expected_block_bytes);
    CHECK(m.attacker_share == 0);
    CHECK(m.honest_share == doctest::Approx(1.0));
    CHECK(m.mean_latency_s == doctest::Approx(m.mean_queue_s + m.mean_inclusion_s).epsilon(1e-9));

    // Independent re-scan of the chosen chain.
    const auto g = genesis_state(s);
    const auto p = s.protocol();
    CHECK(oracle::rescan_valid(r.chain, *g, p.incentives.block_reward, p.incentives.leader_fee_share_ppm) == m.valid_txs);
    std::uint64_t packaged = 0, micros = 0;
    for (std::size_t i = 1; i < r.chain.blocks.size(); ++i) {
        packaged += r.chain.blocks[i]->transaction_count();
        micros += r.chain.blocks[i]->microblocks.size();
    }
    CHECK(packaged == m.packaged_txs);
    CHECK(m.mean_micros_per_block == doctest::Approx(static_cast<double>(micros) / static_cast<double>(m.height)));
    REQUIRE(r.rounds.size() == m.height);
    for (std::size_t i = 0; i < r.rounds.size(); ++i) {
        CHECK(r.rounds[i].height == i + 1);
        CHECK(r.rounds[i].micros == r.chain.blocks[i + 1]->microblocks.size());
    }

    std::uint64_t reward = 0;
    for (const auto& row : r.revenue) reward += row.reward;
    CHECK(reward == m.honest_reward);

    const auto v = verify_chain(s, r.chain);
    CHECK(v.ok());
    CHECK(v.valid_txs == m.valid_txs);
}

TEST_CASE("zero transaction rate still produces blocks")
{
    auto s = small(3);
    s.tx_rate = 0;
    s.stop_time_s = 1800;
    const auto r = run_scenario(s);
    CHECK(r.metrics.total_tps == 0);
    CHECK(r.metrics.valid_txs == 0);
    CHECK(r.metrics.injected_txs == 0);
    // A round lasts about one header interval plus one tenure: ~97 s.
    CHECK(r.metrics.height >= 8);
    CHECK(r.metrics.height <= 40);
    CHECK(r.metrics.mean_micros_per_block == 0);
}

TEST_CASE("single node: blocks on schedule, no forks, nothing to package")
{
    auto s = small(4);
    s.nodes = 1;
    s.regions = 1;
    s.stop_time_s = 3600;
    const auto r = run_scenario(s);
    CHECK(r.metrics.height >= 5);
    CHECK(r.metrics.forks == 0);
    CHECK(r.metrics.max_reorg_depth == 0);
    // A leader never packages its own microblocks and there is nobody else.
    CHECK(r.metrics.packaged_txs == 0);
    CHECK(r.metrics.conservation_ok);
}

TEST_CASE("two nodes on a fast link: every pooled microblock is packaged up to capacity")
{
    auto s = small(12);
    s.nodes = 2;
    s.regions = 1;
    s.topology = TopologyKind::Complete;
    s.latency.kind = LatencyModel::Kind::Fixed;
    s.latency.fixed_ms = 1;
    s.stop_time_s = 2400;
    Simulation sim(s);
    std::map<Hash256, std::set<Hash256>> pools;
    while (sim.step()) {
        for (std::uint32_t i = 0; i < 2; ++i) {
            if (const auto* l = std::get_if<Leader>(&sim.node(i).role())) {
                auto& p = pools[l->header_hash];
                for (const auto& m : l->pool) p.insert(m->hash());
            }
        }
    }
    const auto r = sim.collect();
    REQUIRE(r.metrics.height >= 5);
    CHECK(r.metrics.forks == 0);
    std::size_t checked = 0, micros = 0;
    for (std::size_t i = 1; i < r.chain.blocks.size(); ++i) {
        const auto& b = *r.chain.blocks[i];
        auto it = pools.find(b.header.hash());
        REQUIRE(it != pools.end());
        std::set<Hash256> got;
        for (const auto& m : b.microblocks) got.insert(m->hash());
        INFO("height " << i << " packaged " << got.size() << " pooled " << it->second.size());
        // One micro miner never repeats itself within a round, so only the capacity bound can leave any out.
        CHECK(got.size() == std::min<std::size_t>(it->second.size(), s.capacity));
        CHECK(std::includes(it->second.begin(), it->second.end(), got.begin(), got.end()));
        micros += got.size();
        ++checked;
    }
    CHECK(checked == r.metrics.height);
    CHECK(micros > 10);
}

TEST_CASE("honest microblocks never carry transactions already on their chain")
{
    auto s = small(21);
    s.stop_time_s = 1800;
    s.tx_rate = 40;
    Simulation sim(s);
    sim.run_until(static_cast<SimTime>(s.stop_time_s * 1000));
    const auto& tree = sim.tree();
    std::size_t micro_count = 0;
    for (const auto& e : tree.entries()) {
        if (!e->valid() || e->parent == nullptr) continue;
        for (const auto& m : e->block->microblocks) {
            ++micro_count;
            for (const auto& t : m->transactions) REQUIRE_FALSE(tree.included_on(t->id(), e->parent));
        }
    }
    CHECK(micro_count > 20);
}

TEST_CASE("leader crash: expiry, re-election, successor at the same height")
{
    auto s = load_scenario(std::string(BICOMP_SCENARIO_DIR) + "/leader-crash.scn");
    std::ostringstream trace;
    Simulation sim(s, &trace);
    sim.record_observations(true);
    const auto r = sim.run();

    std::istringstream in(trace.str());
    std::string line;
    std::map<std::pair<std::uint32_t, std::string>, std::int64_t> deadline;
    std::int64_t dropped_height = -1;
    std::string dropped_hash;
    std::size_t expired = 0, on_time = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        if (j.value("type", "") != "obs") continue;
        const auto kind = j["kind"].get<std::string>();
        const auto node = j["node"].get<std::uint32_t>();
        const auto hash = j["hash"].get<std::string>();
        if (kind == "role" && j.value("detail", "") == "micro-miner") deadline[{node, hash}] = j["b"].get<std::int64_t>();
        if (kind == "macro-dropped") {
            dropped_height = j["a"].get<std::int64_t>();
            dropped_hash = hash;
        }
        if (kind == "expired") {
            ++expired;
            auto it = deadline.find({node, hash});
            REQUIRE(it != deadline.end());
            on_time += j["t"].get<std::int64_t>() == it->second ? 1 : 0;
        }
    }
    CHECK(dropped_height == 3);
    CHECK(expired >= 10);
    CHECK(on_time == expired);
    CHECK(r.metrics.expirations == expired);
    REQUIRE(r.metrics.height > 3);
    CHECK(r.chain.blocks[3]->header.hash().hex() != dropped_hash);
    CHECK(r.metrics.conservation_ok);
    CHECK(sim.snapshot(0).tip != nullptr);
}

TEST_CASE("stop conditions")
{
    auto s = small(8);
    s.stop_time_s = 0;
    s.stop_height = 4;
    const auto r = run_scenario(s);
    CHECK(r.metrics.height == 4);

    auto e = small(8);
    e.stop_time_s = 0;
    e.stop_events = 500;
    CHECK(run_scenario(e).metrics.events == 500);
}

TEST_CASE("run directory and verification")
{
    auto s = small(14);
    s.trace = TraceLevel::Blocks;
    const auto dir = scratch("run");
    const auto r = run_to_directory(s, dir);
    for (const char* f : {"scenario.scn", "trace.jsonl", "metrics.csv", "columns.csv", "rounds.csv", "revenue.csv", "chain.bin"}) {
        CHECK(fs::exists(dir / f));
    }
    CHECK(load_scenario((dir / "scenario.scn").string()) == s);

    const auto ok = verify_trace(dir / "trace.jsonl", true);
    CHECK(ok.ok());
    CHECK(ok.replay_match == true);
    CHECK(ok.height == r.metrics.height);
    CHECK(ok.tip_id == r.tip_id);

    SUBCASE("a swapped transaction is caught")
    {
        Chain c = r.chain;
        std::size_t h = 1;
        while (h < c.blocks.size() && c.blocks[h]->transaction_count() == 0) ++h;
        REQUIRE(h < c.blocks.size());
        auto b = std::make_shared<Macroblock>(*c.blocks[h]);
        auto m = std::make_shared<Microblock>(*b->microblocks[0]);
        const auto& t = *m->transactions[0];
        m->transactions[0] = std::make_shared<const Transaction>(t.sender(), t.recipient(), t.amount() + 1, t.fee(),
                                                                 t.nonce(), t.payload());
        b->microblocks[0] = m;
        c.blocks[h] = b;
        CHECK_FALSE(verify_chain(s, c).ok());
    }

    SUBCASE("a corrupted chain file is caught")
    {
        std::fstream f(dir / "chain.bin", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(static_cast<std::streamoff>(fs::file_size(dir / "chain.bin") / 2));
        char c = 0;
        f.read(&c, 1);
        f.seekp(static_cast<std::streamoff>(fs::file_size(dir / "chain.bin") / 2));
        c = static_cast<char>(c ^ 0x5a);
        f.write(&c, 1);
        f.close();
        bool caught = false;
        try {
            caught = !verify_trace(dir / "trace.jsonl").ok();
        } catch (const VerifyInputError&) {
            caught = true;
        }
        CHECK(caught);
    }

    SUBCASE("a different seed does not replay")
    {
        auto other = small(15);
        other.trace = TraceLevel::Blocks;
        const auto d2 = scratch("run-other");
        run_to_directory(other, d2);
        fs::copy_file(d2 / "chain.bin", dir / "chain.bin", fs::copy_options::overwrite_existing);
        CHECK_FALSE(verify_trace(dir / "trace.jsonl").ok());
    }

    CHECK_THROWS_AS(verify_trace(dir / "missing.jsonl"), VerifyInputError);
}

TEST_CASE("sweep axes")
{
    const auto a = parse_axis("protocol.capacity=2,4,6");
    CHECK(a.key == "protocol.capacity");
    CHECK(a.values == std::vector<std::string>{"2", "4", "6"});
    CHECK(parse_axis("capacity=2..10:4").values == std::vector<std::string>{"2", "6", "10"});
    CHECK(parse_axis("capacity=1..3").values == std::vector<std::string>{"1", "2", "3"});
    CHECK_THROWS_AS(parse_axis("capacity"), std::invalid_argument);
    CHECK_THROWS_AS(parse_axis("capacity=5..1"), std::invalid_argument);
    CHECK_THROWS(run_sweep(small(), {parse_axis("nonsense=1,2")}, 1));
}

TEST_CASE("one-point sweep reproduces the single run")
{
    const auto s = small(30);
    const auto single = run_scenario(s);
    const auto sw = run_sweep(s, {}, 1);
    REQUIRE(sw.runs.size() == 1);
    REQUIRE(sw.runs[0].metrics.has_value());
    CHECK(sw.runs[0].seed == 30);
    CHECK(sw.runs[0].trace_hash == single.trace_hash.hex());
    for (const auto& col : metric_columns()) CHECK(col.get(*sw.runs[0].metrics) == col.get(single.metrics));
}

TEST_CASE("sweep rows, summaries and thread independence")
{
    auto s = small(40);
    s.stop_time_s = 400;
    const std::vector<SweepAxis> axes{parse_axis("capacity=2,6"), parse_axis("tenure_s=30,60")};
    const auto one = run_sweep(s, axes, 2, 1);
    const auto two = run_sweep(s, axes, 2, 2);
    std::ostringstream c1, c2;
    write_sweep_csv(c1, one);
    write_sweep_csv(c2, two);
    CHECK(c1.str() == c2.str());

    std::istringstream in(c1.str());
    std::string line;
    std::getline(in, line);
    const auto header = split_csv(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    REQUIRE(col.count("row_type"));
    REQUIRE(col.count("valid_txs"));
    REQUIRE(col.count("valid_txs_sd"));

    std::vector<std::vector<std::string>> runs, means;
    while (std::getline(in, line)) {
        auto f = split_csv(line);
        (f[col["row_type"]] == "run" ? runs : means).push_back(f);
    }
    CHECK(runs.size() == 8);
    CHECK(means.size() == 4);

    // Recompute mean and sample sd per point from the run rows.
    for (const auto& mean_row : means) {
        std::vector<double> xs;
        for (const auto& run : runs) {
            if (run[col["capacity"]] == mean_row[col["capacity"]] && run[col["tenure_s"]] == mean_row[col["tenure_s"]]) {
                xs.push_back(std::stod(run[col["valid_txs"]]));
            }
        }
        REQUIRE(xs.size() == 2);
        const double mu = (xs[0] + xs[1]) / 2;
        const double sd = std::sqrt(((xs[0] - mu) * (xs[0] - mu) + (xs[1] - mu) * (xs[1] - mu)) / 1.0);
        CHECK(std::stod(mean_row[col["valid_txs"]]) == doctest::Approx(mu));
        CHECK(std::stod(mean_row[col["valid_txs_sd"]]) == doctest::Approx(sd));
    }
}

TEST_CASE("a failing sweep run is recorded and the sweep continues")
{
    auto s = small(50);
    s.stop_time_s = 200;
    // A zero tenure parses but fails validation when the run starts.
    const auto r = run_sweep(s, {parse_axis("tenure_s=60,0")}, 1);
    REQUIRE(r.runs.size() == 2);
    CHECK(r.runs[0].metrics.has_value());
    CHECK(r.runs[0].error.empty());
    CHECK_FALSE(r.runs[1].metrics.has_value());
    CHECK_FALSE(r.runs[1].error.empty());
}
