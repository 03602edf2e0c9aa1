#pragma once

#include <bicomp/hash.hpp>
#include <bicomp/netsim.hpp>
#include <bicomp/node.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bicomp {

enum class TraceLevel : std::uint8_t { None = 0, Blocks = 1, Full = 2 };
enum class TopologyKind : std::uint8_t { Random = 0, Complete = 1, Line = 2 };
enum class AttackStrategy : std::uint8_t { None = 0, SelfishWithhold = 1, HeaderDetain = 2, DoubleSpend = 3 };

const char* to_string(TraceLevel t);
const char* to_string(TopologyKind t);
const char* to_string(AttackStrategy a);
const char* to_string(LatencyModel::Kind k);

struct NodeSpec {
    std::uint32_t id = 0;
    std::optional<double> hash_power;
    std::optional<std::uint32_t> region;
    std::optional<bool> honest;
    std::optional<SelectionStrategy> selection;

    friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

//! A node with every default applied.
struct ResolvedNode {
    std::uint32_t id = 0;
    double hash_power = 0;
    std::uint32_t region = 0;
    bool honest = true;
    SelectionStrategy selection = SelectionStrategy::Random;
};

struct GenesisAlloc {
    AccountId account;
    std::uint64_t amount = 0;

    friend bool operator==(const GenesisAlloc&, const GenesisAlloc&) = default;
};

struct Scenario {
    // [run]
    std::uint64_t seed = 1;
    double stop_time_s = 3600;
    std::uint64_t stop_height = 0;
    std::uint64_t stop_events = 0;
    TraceLevel trace = TraceLevel::Blocks;

    // [protocol]
    double tenure_s = 60;
    std::uint32_t capacity = 12;
    std::uint32_t micro_tx_cap = 1500;
    //! 0 means capacity * micro_tx_cap.
    std::uint64_t macro_tx_cap = 0;
    double delta_s = 3;
    std::uint32_t n_macro = 22;
    std::uint32_t n_micro = 16;
    std::uint32_t pow_check_bits = 8;
    std::uint64_t block_reward = 50;
    double leader_fee_share = 0.3;
    std::uint64_t mempool_bound = 100000;
    SelectionStrategy selection = SelectionStrategy::Random;

    // [network]
    std::uint32_t nodes = 50;
    TopologyKind topology = TopologyKind::Random;
    double degree = 6;
    LatencyModel latency;
    std::uint32_t regions = 6;
    std::int64_t jitter_ms = 0;
    double bandwidth_mbps = 0;
    std::int64_t tx_hop_limit = 2;

    // [workload]
    double tx_rate = 1000;
    std::uint64_t accounts = 200000;
    std::uint64_t initial_balance = 1000000000000ull;
    std::uint64_t fee_min = 1;
    std::uint64_t fee_max = 20;
    std::uint64_t amount_min = 1;
    std::uint64_t amount_max = 1000;
    double resend_after_s = 600;

    // [nodes]
    double hash_power = 1400;

    // [node] stanzas
    std::vector<NodeSpec> node_specs;

    // [attack]
    AttackStrategy attack = AttackStrategy::None;
    std::vector<std::uint32_t> attackers;
    std::uint32_t victim = 0;
    std::uint32_t confirmations = 6;
    std::uint32_t give_up_margin = 3;
    bool threshold_search = false;
    std::uint64_t max_attempts = 0;

    // [fault]
    std::vector<std::uint64_t> drop_macroblock_heights;

    // [genesis]
    std::vector<GenesisAlloc> genesis;

    friend bool operator==(const Scenario&, const Scenario&) = default;

    std::uint64_t effective_macro_tx_cap() const
    {
        return macro_tx_cap != 0 ? macro_tx_cap : static_cast<std::uint64_t>(capacity) * micro_tx_cap;
    }
    std::vector<ResolvedNode> resolved_nodes() const;
    //! Attacker share of total hash power.
    double attacker_fraction() const;
    ProtocolParams protocol() const;
};

struct ScenarioIssue {
    std::size_t line = 0;
    std::string key;
    std::string message;

    std::string str() const;
};

class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(std::vector<ScenarioIssue> issues);
    const std::vector<ScenarioIssue>& issues() const { return issues_; }

private:
    std::vector<ScenarioIssue> issues_;
};

//! Parses and validates; throws ScenarioError listing every problem found.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);
//! Canonical text form; parse_scenario(scenario_to_text(s)) == s.
std::string scenario_to_text(const Scenario& s);

//! Invariant checks on an assembled scenario. Empty when valid.
std::vector<ScenarioIssue> validate(const Scenario& s);

/**
 * Sets one parameter from its text form. key is "section.key" or a bare key
 * when it is unique across sections. Throws ScenarioError on bad input.
 */
void set_parameter(Scenario& s, std::string_view key, std::string_view value);
std::string get_parameter(const Scenario& s, std::string_view key);

//! Deterministic account ids used by the workload generator and the double-spend attacker.
AccountId workload_account(std::uint64_t index);
AccountId attacker_wallet(const NodeId& node);
NodeId node_identity(std::uint32_t index);

} // namespace bicomp
