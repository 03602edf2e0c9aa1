#pragma once

#include <bicomp/chain.hpp>
#include <bicomp/ledger.hpp>
#include <bicomp/types.hpp>

#include <boost/container/small_vector.hpp>

#include <memory>
#include <unordered_map>
#include <vector>

namespace bicomp {

/** One validated (or rejected) macroblock in the run-wide block tree. */
struct BlockEntry {
    std::uint32_t index = 0;
    Hash256 id;
    Hash256 header_hash;
    MacroPtr block;
    const BlockEntry* parent = nullptr;
    std::uint64_t height = 0;
    Reject status = Reject::Ok;

    ValidityReport report;
    std::uint64_t cumulative_valid = 0;
    StateRoot post_root;
    std::size_t bytes = 0;
    //! Simulated time the block was first inserted.
    SimTime first_seen = 0;
    //! path[h] is the ancestor at height h; path[height] == this.
    std::vector<const BlockEntry*> path;

    bool valid() const { return status == Reject::Ok; }
    ForkChoiceKey key() const
    {
        return ForkChoiceKey{height + 1, cumulative_valid, header_hash, block->body_root};
    }

private:
    friend class BlockTree;
    mutable std::shared_ptr<const LedgerState> post_state_;
};

/**
 * Append-only tree of every macroblock seen during a run. Validation results,
 * diversity totals and settlement roots are computed once per block id and
 * shared by all nodes; each node keeps only its own view of which entries it
 * knows. Post-settlement states are cached for recent heights and replayed on
 * demand for older ones.
 */
class BlockTree {
public:
    BlockTree(std::shared_ptr<const LedgerState> genesis_state, MacroPtr genesis, ChainRules rules,
              IncentiveParams params);

    const BlockEntry* genesis() const { return entries_.front().get(); }
    const BlockEntry* find(const Hash256& id) const;
    //! All bodies seen for one header hash.
    const std::vector<const BlockEntry*>& bodies_for(const Hash256& header_hash) const;

    /**
     * The valid block a header builds on: a body of prev_macroblock_hash whose
     * post-settlement root equals the header's state root; failing that any
     * body of that header. nullptr when no body is known.
     */
    const BlockEntry* resolve_parent(const MacroblockHeader& h) const;

    //! Validates and inserts. Returns nullptr when the parent is unknown; returns the memoized entry otherwise.
    const BlockEntry* insert(const MacroPtr& mb, SimTime now);

    static bool is_ancestor(const BlockEntry* a, const BlockEntry* b)
    {
        return a->height <= b->height && b->path[a->height] == a;
    }

    //! True when some block on the path genesis..tip contains the transaction (any verdict).
    bool included_on(const TxId& id, const BlockEntry* tip) const;
    //! The block on genesis..tip that contains the transaction with a valid verdict, if any.
    const BlockEntry* valid_inclusion_on(const TxId& id, const BlockEntry* tip) const;

    std::shared_ptr<const LedgerState> state_after(const BlockEntry* e) const;
    const LedgerState& genesis_state() const { return *genesis_state_; }

    Chain chain_to(const BlockEntry* tip) const;
    const std::vector<std::unique_ptr<BlockEntry>>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::uint64_t max_height() const { return max_height_; }

    const ChainRules& rules() const { return rules_; }
    const IncentiveParams& incentives() const { return params_; }

    //! Number of heights below the maximum whose states stay cached.
    void set_retention(std::uint64_t heights) { retention_ = heights; }

private:
    void evict_old_states();

    std::shared_ptr<const LedgerState> genesis_state_;
    ChainRules rules_;
    IncentiveParams params_;
    std::vector<std::unique_ptr<BlockEntry>> entries_;
    std::unordered_map<Hash256, BlockEntry*, Hash256Hasher> by_id_;
    std::unordered_map<Hash256, std::vector<const BlockEntry*>, Hash256Hasher> by_header_;
    std::unordered_map<TxId, boost::container::small_vector<const BlockEntry*, 2>, TxId::Hasher> tx_index_;
    std::vector<const BlockEntry*> cached_;
    std::uint64_t max_height_ = 0;
    std::uint64_t retention_ = 16;
};

} // namespace bicomp
