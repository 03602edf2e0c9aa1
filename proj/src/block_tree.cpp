#include <bicomp/block_tree.hpp>

#include <algorithm>
#include <stdexcept>

namespace bicomp {

namespace {
const std::vector<const BlockEntry*> kNoBodies;
}

BlockTree::BlockTree(std::shared_ptr<const LedgerState> genesis_state, MacroPtr genesis, ChainRules rules,
                     IncentiveParams params)
    : genesis_state_(std::move(genesis_state)), rules_(rules), params_(params)
{
    auto e = std::make_unique<BlockEntry>();
    e->index = 0;
    e->header_hash = genesis->header.hash();
    e->id = block_id(e->header_hash, genesis->body_root);
    e->block = std::move(genesis);
    e->height = 0;
    e->post_root = state_root(*genesis_state_);
    e->bytes = e->block->serialized_size();
    e->path.push_back(e.get());
    e->post_state_ = genesis_state_;
    by_id_.emplace(e->id, e.get());
    by_header_[e->header_hash].push_back(e.get());
    entries_.push_back(std::move(e));
}

const BlockEntry* BlockTree::find(const Hash256& id) const
{
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
}

const std::vector<const BlockEntry*>& BlockTree::bodies_for(const Hash256& header_hash) const
{
    auto it = by_header_.find(header_hash);
    return it == by_header_.end() ? kNoBodies : it->second;
}

const BlockEntry* BlockTree::resolve_parent(const MacroblockHeader& h) const
{
    const auto& bodies = bodies_for(h.prev_macroblock_hash);
    const BlockEntry* fallback = nullptr;
    for (const auto* b : bodies) {
        if (!b->valid()) continue;
        if (b->post_root.value == h.state_root) return b;
        if (fallback == nullptr) fallback = b;
    }
    if (fallback == nullptr && !bodies.empty()) fallback = bodies.front();
    return fallback;
}

const BlockEntry* BlockTree::insert(const MacroPtr& mb, SimTime now)
{
    const auto hh = mb->header.hash();
    const auto id = block_id(hh, mb->body_root);
    if (auto* existing = find(id)) return existing;
    const BlockEntry* parent = resolve_parent(mb->header);
    if (parent == nullptr) return nullptr;

    auto e = std::make_unique<BlockEntry>();
    e->index = static_cast<std::uint32_t>(entries_.size());
    e->id = id;
    e->header_hash = hh;
    e->block = mb;
    e->parent = parent;
    e->height = mb->header.height;
    e->bytes = mb->serialized_size();
    e->first_seen = now;

    if (!parent->valid()) {
        e->status = Reject::BadParent;
    } else {
        e->status = validate_header(mb->header, parent->block->header, parent->post_root, rules_);
        if (e->status == Reject::Ok) e->status = validate_body(*mb, rules_);
    }

    if (e->valid()) {
        const auto parent_state = state_after(parent);
        e->report = resolve_validity(*mb, *parent_state,
                                     [&](const TxId& tx) { return included_on(tx, parent); });
        auto post = std::make_shared<const LedgerState>(settle(*parent_state, *mb, e->report, params_));
        e->post_root = state_root(*post);
        e->post_state_ = std::move(post);
        e->cumulative_valid = parent->cumulative_valid + e->report.non_overlapping_valid_count;
        e->path = parent->path;
        e->path.push_back(e.get());
        for (const auto& m : mb->microblocks) {
            for (const auto& t : m->transactions) tx_index_[t->id()].push_back(e.get());
        }
        cached_.push_back(e.get());
        max_height_ = std::max(max_height_, e->height);
    }

    BlockEntry* raw = e.get();
    by_id_.emplace(id, raw);
    by_header_[hh].push_back(raw);
    entries_.push_back(std::move(e));
    evict_old_states();
    return raw;
}

bool BlockTree::included_on(const TxId& id, const BlockEntry* tip) const
{
    auto it = tx_index_.find(id);
    if (it == tx_index_.end()) return false;
    for (const auto* e : it->second) {
        if (is_ancestor(e, tip)) return true;
    }
    return false;
}

const BlockEntry* BlockTree::valid_inclusion_on(const TxId& id, const BlockEntry* tip) const
{
    auto it = tx_index_.find(id);
    if (it == tx_index_.end()) return nullptr;
    for (const auto* e : it->second) {
        if (!is_ancestor(e, tip)) continue;
        std::size_t k = 0;
        for (const auto& m : e->block->microblocks) {
            for (const auto& t : m->transactions) {
                if (t->id() == id && e->report.verdicts[k] == Verdict::Valid) return e;
                ++k;
            }
        }
    }
    return nullptr;
}

std::shared_ptr<const LedgerState> BlockTree::state_after(const BlockEntry* e) const
{
    if (!e->valid()) throw std::logic_error("state requested for an invalid block");
    if (e->post_state_) return e->post_state_;
    // Walk back to the nearest cached ancestor and replay forward.
    std::vector<const BlockEntry*> todo;
    const BlockEntry* cur = e;
    while (!cur->post_state_) {
        todo.push_back(cur);
        cur = cur->parent;
    }
    auto state = cur->post_state_;
    for (auto it = todo.rbegin(); it != todo.rend(); ++it) {
        state = std::make_shared<const LedgerState>(settle(*state, *(*it)->block, (*it)->report, params_));
    }
    e->post_state_ = state;
    const_cast<BlockTree*>(this)->cached_.push_back(e);
    return state;
}

void BlockTree::evict_old_states()
{
    if (max_height_ <= retention_) return;
    const std::uint64_t floor = max_height_ - retention_;
    auto keep = std::remove_if(cached_.begin(), cached_.end(), [&](const BlockEntry* e) {
        if (e->height >= floor || e->index == 0) return false;
        e->post_state_.reset();
        return true;
    });
    cached_.erase(keep, cached_.end());
}

Chain BlockTree::chain_to(const BlockEntry* tip) const
{
    Chain c;
    c.blocks.reserve(tip->path.size());
    for (const auto* e : tip->path) c.blocks.push_back(e->block);
    return c;
}

} // namespace bicomp
