#include <bicomp/chain.hpp>
#include <bicomp/ledger.hpp>

#include <stdexcept>

namespace bicomp {

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::DuplicateOverlap: return "duplicate-overlap";
    case Verdict::NonceConflict: return "nonce-conflict";
    case Verdict::InsufficientBalance: return "insufficient-balance";
    }
    return "unknown";
}

Account LedgerState::get(const AccountId& id) const
{
    auto it = accounts_.find(id);
    return it == accounts_.end() ? Account{} : it->second;
}

unsigned __int128 LedgerState::total_supply() const
{
    unsigned __int128 sum = 0;
    for (const auto& [id, a] : accounts_) sum += a.balance;
    return sum;
}

StateRoot state_root(const LedgerState& s)
{
    std::vector<Hash256> leaves;
    leaves.reserve(s.accounts().size());
    std::uint8_t buf[48];
    for (const auto& [id, a] : s.accounts()) {
        std::memcpy(buf, id.value.bytes.data(), 32);
        store_le(buf + 32, a.balance);
        store_le(buf + 40, a.next_nonce);
        leaves.push_back(sha256(ByteView{buf, sizeof(buf)}));
    }
    return StateRoot{merkle_root_of_leaves(std::move(leaves))};
}

LedgerState settle(const LedgerState& parent_state, const Macroblock& mb, const ValidityReport& report,
                   const IncentiveParams& params)
{
    LedgerState out = parent_state;
    out.pending.clear();
    const NodeId& leader = mb.header.miner;
    std::uint64_t leader_total = params.block_reward;
    std::size_t k = 0;
    for (const auto& micro : mb.microblocks) {
        std::uint64_t miner_total = 0;
        for (const auto& tx : micro->transactions) {
            if (k >= report.verdicts.size()) throw std::logic_error("validity report shorter than macroblock");
            if (report.verdicts[k++] != Verdict::Valid) continue;
            Account& s = out.at(tx->sender());
            s.balance -= tx->amount() + tx->fee();
            s.next_nonce += 1;
            out.credit(tx->recipient(), tx->amount());
            const auto cut = params.leader_cut(tx->fee());
            leader_total += cut;
            miner_total += tx->fee() - cut;
        }
        if (miner_total > 0) {
            out.credit(micro->header.miner, miner_total);
            out.pending.emplace_back(micro->header.miner, miner_total);
        }
    }
    if (k != report.verdicts.size()) throw std::logic_error("validity report longer than macroblock");
    out.credit(leader, leader_total);
    out.pending.emplace_back(leader, leader_total);
    return out;
}

StateRoot expected_settlement(const Chain& parent_chain, const LedgerState& genesis_state,
                              const IncentiveParams& params)
{
    LedgerState state = genesis_state;
    std::unordered_set<TxId, TxId::Hasher> seen;
    for (std::size_t i = 1; i < parent_chain.blocks.size(); ++i) {
        const auto& mb = *parent_chain.blocks[i];
        const auto report = resolve_validity(mb, state, seen);
        state = settle(state, mb, report, params);
        for (const auto& m : mb.microblocks) {
            for (const auto& t : m->transactions) seen.insert(t->id());
        }
    }
    return state_root(state);
}

} // namespace bicomp
