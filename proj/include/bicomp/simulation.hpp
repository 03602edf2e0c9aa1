#pragma once

#include <bicomp/adversary.hpp>
#include <bicomp/block_tree.hpp>
#include <bicomp/netsim.hpp>
#include <bicomp/node.hpp>
#include <bicomp/scenario.hpp>

#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace bicomp {

struct Metrics {
    double elapsed_s = 0;
    std::uint64_t height = 0;
    std::uint64_t injected_txs = 0;
    //! Every transaction carried by chosen-chain macroblocks, duplicates included.
    std::uint64_t packaged_txs = 0;
    //! Transactions with a valid verdict on the chosen chain.
    std::uint64_t valid_txs = 0;
    double total_tps = 0;
    double nonoverlap_tps = 0;
    double mean_block_bytes = 0;
    double expected_block_bytes = 0;
    double mean_micros_per_block = 0;
    double mean_latency_s = 0;
    double mean_queue_s = 0;
    double mean_inclusion_s = 0;
    std::uint64_t forks = 0;
    std::uint64_t max_reorg_depth = 0;
    std::uint64_t equivocations = 0;
    std::uint64_t expirations = 0;
    std::uint64_t attacker_reward = 0;
    std::uint64_t honest_reward = 0;
    double attacker_share = 0;
    double honest_share = 0;
    std::uint64_t ds_attempts = 0;
    std::uint64_t ds_successes = 0;
    std::uint64_t attack_releases = 0;
    std::uint64_t attack_abandons = 0;
    std::uint64_t detain_forks = 0;
    std::uint64_t detain_private_lower = 0;
    std::uint64_t max_private_lead = 0;
    bool conservation_ok = false;
    std::uint64_t events = 0;
};

struct RoundRow {
    std::uint64_t height = 0;
    std::uint32_t leader = 0;
    bool honest = true;
    std::size_t micros = 0;
    std::uint64_t txs = 0;
    std::uint64_t valid = 0;
    std::size_t bytes = 0;
    SimTime timestamp = 0;
    SimTime first_seen = 0;
};

struct RevenueRow {
    std::uint32_t node = 0;
    bool honest = true;
    std::uint64_t reward = 0;
};

struct RunResult {
    Metrics metrics;
    Hash256 trace_hash;
    Hash256 tip_id;
    std::vector<RoundRow> rounds;
    std::vector<RevenueRow> revenue;
    //! Block pointers inside attempts refer to the Simulation's tree and dangle once it is destroyed.
    std::vector<DoubleSpendAttempt> attempts;
    Chain chain;
};

//! Per-node view used by liveness checks.
struct NodeSnapshot {
    std::uint32_t index = 0;
    bool honest = true;
    bool crashed = false;
    const BlockEntry* tip = nullptr;
    std::string role;
};

/**
 * One run of a scenario. The kernel is single threaded; independent
 * Simulation objects may run on different threads.
 */
class Simulation final : public NodeHost {
public:
    //! trace_out receives the line-delimited trace when the scenario's trace level is not none.
    explicit Simulation(const Scenario& s, std::ostream* trace_out = nullptr);
    ~Simulation() override;
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    //! Runs to the scenario's stop condition and computes the results.
    RunResult run();
    //! Processes events up to and including time t (or until stopped). Returns false when stopped.
    bool run_until(SimTime t);
    bool step();
    bool stopped() const { return stopped_; }

    SimTime now() const override { return queue_.now(); }
    BlockTree& tree() override { return *tree_; }
    const ProtocolParams& params() const override { return params_; }
    void broadcast(std::uint32_t from, MsgPtr msg) override;
    void schedule(std::uint32_t node, EventKind kind, SimTime at, std::uint64_t tag) override;
    bool fault_drop_macroblock(std::uint64_t height) override;
    void observe(const Observation& o) override;
    void on_adopt(std::uint32_t node, const BlockEntry* old_tip, const BlockEntry* new_tip) override;

    const Scenario& scenario() const { return scenario_; }
    const Topology& topology() const { return topology_; }
    std::size_t node_count() const { return nodes_.size(); }
    Node& node(std::uint32_t i) { return *nodes_.at(i); }
    NodeSnapshot snapshot(std::uint32_t i) const;
    const Coalition* coalition() const { return coalition_.get(); }
    const std::vector<Observation>& observations() const { return observations_; }
    //! Best tip among honest nodes that have not crashed.
    const BlockEntry* chosen_tip() const;
    SimTime injection_time(std::uint64_t serial) const { return inject_times_.at(serial); }
    Hash256 trace_hash() const { return trace_.digest(); }
    //! Keep every observation in memory (tests); off by default.
    void record_observations(bool on) { keep_observations_ = on; }

    RunResult collect();

private:
    void inject_transaction();
    void trace_event(const Event& e);
    void trace_json(const std::string& line);
    const std::vector<Delivery>& broadcast_paths(std::uint32_t origin);
    const std::vector<Delivery>& gossip_paths(std::uint32_t origin);

    Scenario scenario_;
    ProtocolParams params_;
    std::vector<ResolvedNode> resolved_;
    std::unique_ptr<BlockTree> tree_;
    Topology topology_;
    EventQueue queue_;
    std::unique_ptr<Coalition> coalition_;
    std::vector<std::unique_ptr<Node>> nodes_;
    BroadcastModel broadcast_model_;
    GossipPolicy gossip_;
    std::vector<std::vector<Delivery>> broadcast_cache_;
    std::vector<std::vector<Delivery>> gossip_cache_;

    RngStream workload_rng_;
    RngStream jitter_rng_;
    double inject_clock_ms_ = 0;
    std::vector<AccountId> accounts_;
    std::vector<std::uint64_t> last_sent_nonce_;
    std::vector<SimTime> last_sent_at_;
    std::uint64_t next_account_ = 0;
    std::vector<SimTime> inject_times_;
    const BlockEntry* state_tip_ = nullptr;
    std::shared_ptr<const LedgerState> state_cache_;

    std::vector<std::uint64_t> dropped_heights_;
    unsigned __int128 genesis_supply_ = 0;
    std::uint64_t max_reorg_ = 0;
    std::uint64_t expirations_ = 0;
    bool stopped_ = false;
    bool started_ = false;

    std::ostream* trace_out_;
    Sha256Stream trace_;
    bool keep_observations_ = false;
    std::vector<Observation> observations_;
};

RunResult run_scenario(const Scenario& s, std::ostream* trace_out = nullptr);

//! Genesis ledger of a scenario: workload accounts, explicit allocations and attacker wallets.
std::shared_ptr<const LedgerState> genesis_state(const Scenario& s);

} // namespace bicomp
