#pragma once

#include <bicomp/block_tree.hpp>
#include <bicomp/chain.hpp>
#include <bicomp/netsim.hpp>
#include <bicomp/pow.hpp>
#include <bicomp/types.hpp>

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace bicomp {

struct TenureConfig {
    SimTime tenure_ms = 60000;
    std::uint32_t capacity = 12;
    std::uint64_t tx_cap = 12 * 1500;
    SimTime delta_ms = 3000;
};

//! E = T_a - (T_b - T_ts) + delta, in seconds.
double expiration_deadline(double tenure_s, double receipt_s, double header_ts_s, double delta_s);
SimTime expiration_deadline_ms(SimTime tenure_ms, SimTime receipt, SimTime header_ts, SimTime delta_ms);

enum class SelectionStrategy : std::uint8_t { Random = 0, FeePriority = 1, Locality = 2 };

const char* to_string(SelectionStrategy s);
std::optional<SelectionStrategy> parse_selection(std::string_view s);

struct PoolEntry {
    TxPtr tx;
    SimTime arrival = 0;
    std::uint8_t hops = 0;
    //! Round tag of the last local microblock that took this transaction.
    std::uint32_t reserved_round = 0;
};

using IncludedPredicate = std::function<bool(const TxId&)>;

/**
 * Pending transactions in arrival order, bounded with oldest-first eviction.
 * Entries may carry future arrival times (gossip in flight) and become
 * visible once the clock passes them. Transactions already on the local
 * chain are filtered lazily through the included predicate.
 */
class Mempool {
public:
    explicit Mempool(std::size_t bound = 100000) : bound_(bound) {}

    void add(TxPtr tx, SimTime arrival, std::uint8_t hops);
    std::size_t size() const { return entries_.size() - dead_; }
    std::size_t bound() const { return bound_; }
    std::uint64_t evicted() const { return evicted_; }

    std::size_t slots() const { return entries_.size(); }
    PoolEntry& slot(std::size_t i) { return entries_[i]; }
    const PoolEntry& slot(std::size_t i) const { return entries_[i]; }
    void remove_slot(std::size_t i);
    void compact();

    //! Visible, not included transactions in arrival order.
    std::vector<TxPtr> pending(SimTime now, const IncludedPredicate& included) const;
    //! Drops entries the predicate reports as included.
    void prune(const IncludedPredicate& included);

private:
    std::deque<PoolEntry> entries_;
    std::size_t bound_;
    std::size_t dead_ = 0;
    std::uint64_t evicted_ = 0;
};

/**
 * Picks up to cap visible transactions not included on the local chain and
 * not already taken in this round, and tags them with round.
 */
std::vector<TxPtr> select_transactions(Mempool& pool, std::size_t cap, SelectionStrategy strategy, SimTime now,
                                       RngStream& rng, const IncludedPredicate& included, std::uint32_t round);

/**
 * Microblock choice for a macroblock. Under capacity every microblock that
 * adds a new transaction is kept; otherwise greedy by marginal gain (lazy
 * evaluation) until C or the transaction cap is reached. Microblocks mined by
 * the leader are never eligible. Output keeps arrival order.
 */
std::vector<MicroPtr> select_microblocks(const std::vector<MicroPtr>& pool, std::uint32_t capacity,
                                         std::uint64_t tx_cap, const NodeId& leader, const SeenPredicate& seen);

//! Number of distinct transactions in the set that are not seen on the chain.
std::uint64_t coverage(const std::vector<MicroPtr>& micros, const SeenPredicate& seen);

Macroblock assemble_macroblock(const MacroblockHeader& header, const std::vector<MicroPtr>& pool,
                               const TenureConfig& cfg, const SeenPredicate& seen, const SignatureScheme& signer);

//! Signs a macroblock with an explicit microblock list (used for equivocating bodies too).
Macroblock seal_macroblock(const MacroblockHeader& header, std::vector<MicroPtr> micros, const SignatureScheme& signer);

struct Competing {};
struct Leader {
    HeaderPtr header;
    Hash256 header_hash;
    SimTime tenure_end = 0;
    std::vector<MicroPtr> pool;
    std::unordered_set<Hash256, Hash256Hasher> pool_ids;
};
struct MicroMiner {
    HeaderPtr header;
    Hash256 header_hash;
    SimTime deadline = 0;
};
using NodeRole = std::variant<Competing, Leader, MicroMiner>;

const char* role_name(const NodeRole& r);

struct ProtocolParams {
    ChainRules rules;
    TenureConfig tenure;
    IncentiveParams incentives;
    std::size_t mempool_bound = 100000;
};

struct NodeConfig {
    std::uint32_t index = 0;
    NodeId id;
    HashPower power;
    SelectionStrategy selection = SelectionStrategy::Random;
    bool honest = true;
    std::uint32_t region = 0;
};

/** Things nodes report for tracing and metrics. */
struct Observation {
    enum class Kind : std::uint8_t {
        RoleChange,
        Adopt,
        Reject,
        Equivocation,
        Expired,
        HeaderReuse,
        LeaderAbdicated,
        MacroDropped,
        AttackRelease,
        AttackAbandon,
        AttackStart,
    };
    Kind kind;
    std::uint32_t node = 0;
    Hash256 hash;
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::string detail;
};

const char* to_string(Observation::Kind k);

class NodeHost {
public:
    virtual ~NodeHost() = default;
    virtual SimTime now() const = 0;
    virtual BlockTree& tree() = 0;
    virtual const ProtocolParams& params() const = 0;
    virtual void broadcast(std::uint32_t from, MsgPtr msg) = 0;
    virtual void schedule(std::uint32_t node, EventKind kind, SimTime at, std::uint64_t tag) = 0;
    //! Fault injection: true when the leader of this height must silently drop its macroblock.
    virtual bool fault_drop_macroblock(std::uint64_t height) = 0;
    virtual void observe(const Observation& o) = 0;
    //! Called after every tip change.
    virtual void on_adopt(std::uint32_t node, const BlockEntry* old_tip, const BlockEntry* new_tip) = 0;
};

/** Honest protocol state machine. Adversaries subclass and override the decision hooks. */
class Node {
public:
    Node(NodeConfig cfg, NodeHost& host, std::uint64_t seed);
    virtual ~Node() = default;
    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    void start();
    void handle(const Event& e);

    const NodeConfig& config() const { return cfg_; }
    const NodeId& id() const { return cfg_.id; }
    std::uint32_t index() const { return cfg_.index; }
    const BlockEntry* tip() const { return tip_; }
    const NodeRole& role() const { return role_; }
    Mempool& mempool() { return mempool_; }
    const Mempool& mempool() const { return mempool_; }
    bool crashed() const { return crashed_; }
    bool knows(const BlockEntry* e) const { return e->index < known_.size() && known_[e->index] != 0; }
    //! Header receipt time, if this node has seen the header.
    std::optional<SimTime> header_receipt(const Hash256& header_hash) const;

protected:
    virtual void on_header(const HeaderPtr& h);
    virtual void on_micro(const MicroPtr& m);
    virtual void on_macro(const MacroPtr& mb);
    virtual void on_header_mined();
    virtual void on_micro_mined();
    virtual void on_tenure_end();
    virtual void on_expiration();
    virtual void on_attack_timer(std::uint64_t) {}
    //! Adoption decision for a newly accepted valid block.
    virtual void consider(const BlockEntry* e);

    HeaderPtr build_header(const BlockEntry* parent);
    MicroPtr build_microblock(const MacroblockHeader& round);
    MacroPtr build_macroblock(const MacroblockHeader& header, const std::vector<MicroPtr>& pool);

    //! Validates and records a block. Returns the entry when it is valid and new to this node.
    const BlockEntry* accept_block(const MacroPtr& mb);
    void mark_known(const BlockEntry* e);
    void adopt(const BlockEntry* e);
    void become_competing();
    void become_leader(const HeaderPtr& h);
    bool try_follow(const Hash256& header_hash);
    void record_header(const HeaderPtr& h);
    void process_orphans(const Hash256& header_hash);
    void schedule(EventKind kind, SimTime at) { host_.schedule(cfg_.index, kind, at, gen_); }
    void add_to_leader_pool(const MicroPtr& m);

    NodeConfig cfg_;
    NodeHost& host_;
    const ProtocolParams& params_;
    RngStream mining_rng_;
    RngStream select_rng_;
    Mempool mempool_;
    const BlockEntry* tip_ = nullptr;
    NodeRole role_ = Competing{};
    std::uint64_t gen_ = 0;
    std::uint32_t round_tag_ = 0;
    bool crashed_ = false;

    struct HeaderRecord {
        HeaderPtr header;
        SimTime receipt = 0;
    };
    std::vector<std::uint8_t> known_;
    std::unordered_map<Hash256, HeaderRecord, Hash256Hasher> headers_;
    //! Header hashes grouped by the header hash they build on, in receipt order.
    std::unordered_map<Hash256, std::vector<Hash256>, Hash256Hasher> headers_by_parent_;
    std::unordered_map<Hash256, std::vector<MacroPtr>, Hash256Hasher> orphan_blocks_;
};

} // namespace bicomp
