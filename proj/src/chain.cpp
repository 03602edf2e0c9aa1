#include <bicomp/chain.hpp>

#include <stdexcept>
#include <unordered_map>

namespace bicomp {

const char* to_string(Reject r)
{
    switch (r) {
    case Reject::Ok: return "ok";
    case Reject::BadPow: return "bad-pow";
    case Reject::BadParent: return "bad-parent";
    case Reject::BadHeight: return "bad-height";
    case Reject::BadTimestamp: return "bad-timestamp";
    case Reject::BadSettlement: return "bad-settlement";
    case Reject::BadRound: return "bad-round";
    case Reject::BadMerkle: return "bad-merkle";
    case Reject::Oversize: return "oversize";
    case Reject::BadSignature: return "bad-signature";
    case Reject::BadBodyRoot: return "bad-body-root";
    case Reject::TooManyMicroblocks: return "too-many-microblocks";
    case Reject::TxCapExceeded: return "tx-cap-exceeded";
    case Reject::SelfPackaging: return "self-packaging";
    case Reject::DuplicateMicroblock: return "duplicate-microblock";
    case Reject::UnknownParent: return "unknown-parent";
    }
    return "unknown";
}

bool timestamp_plausible(SimTime ts, SimTime local_now, const ChainRules& rules, bool allow_past)
{
    if (ts > local_now + rules.timestamp_window_ms) return false;
    if (!allow_past && ts < local_now - rules.timestamp_window_ms) return false;
    return true;
}

Reject validate_header(const MacroblockHeader& h, const MacroblockHeader& parent, const StateRoot& expected_state_root,
                       const ChainRules& rules, std::optional<SimTime> local_now)
{
    if (h.prev_macroblock_hash != parent.hash()) return Reject::BadParent;
    if (h.height != parent.height + 1) return Reject::BadHeight;
    if (h.difficulty_bits != rules.macro_difficulty.bits) return Reject::BadPow;
    const auto raw = serialize_header(h);
    if (!check_pow(ByteView{raw.data(), raw.size()}, rules.checked(rules.macro_difficulty))) return Reject::BadPow;
    if (h.timestamp < parent.timestamp) return Reject::BadTimestamp;
    if (local_now && !timestamp_plausible(h.timestamp, *local_now, rules, false)) return Reject::BadTimestamp;
    if (StateRoot{h.state_root} != expected_state_root) return Reject::BadSettlement;
    return Reject::Ok;
}

Reject validate_header(const MacroblockHeader& h, const Chain& parent_chain, const StateRoot& expected_state_root,
                       const ChainRules& rules, std::optional<SimTime> local_now)
{
    if (parent_chain.empty()) return Reject::BadParent;
    return validate_header(h, parent_chain.blocks.back()->header, expected_state_root, rules, local_now);
}

Reject validate_microblock(const Microblock& m, const MacroblockHeader& round_header, const ChainRules& rules)
{
    if (m.header.round_header_hash != round_header.hash()) return Reject::BadRound;
    if (m.transactions.size() > rules.micro_tx_cap) return Reject::Oversize;
    if (merkle_root(m.transactions) != m.header.merkle_root) return Reject::BadMerkle;
    if (m.header.difficulty_bits != rules.micro_difficulty.bits) return Reject::BadPow;
    if (!check_pow(m.header.serialize(), rules.checked(rules.micro_difficulty))) return Reject::BadPow;
    std::unordered_set<TxId, TxId::Hasher> ids;
    ids.reserve(m.transactions.size());
    for (const auto& t : m.transactions) {
        if (!ids.insert(t->id()).second) return Reject::BadMerkle;
    }
    return Reject::Ok;
}

Reject validate_body(const Macroblock& mb, const ChainRules& rules)
{
    const auto hh = mb.header.hash();
    if (!rules.signatures->verify(mb.header.miner, signing_message(hh, mb.body_root), mb.leader_signature)) {
        return Reject::BadSignature;
    }
    if (body_root(mb.microblocks) != mb.body_root) return Reject::BadBodyRoot;
    if (mb.microblocks.size() > rules.capacity) return Reject::TooManyMicroblocks;
    if (mb.transaction_count() > rules.macro_tx_cap) return Reject::TxCapExceeded;
    std::unordered_set<Hash256, Hash256Hasher> micro_ids;
    for (const auto& m : mb.microblocks) {
        if (m->header.miner == mb.header.miner) return Reject::SelfPackaging;
        if (!micro_ids.insert(m->hash()).second) return Reject::DuplicateMicroblock;
        const auto r = validate_microblock(*m, mb.header, rules);
        if (r != Reject::Ok) return r;
    }
    return Reject::Ok;
}

ValidityReport resolve_validity(const Macroblock& mb, const LedgerState& prefix_state, const SeenPredicate& seen)
{
    ValidityReport report;
    const std::size_t n = mb.transaction_count();
    report.verdicts.reserve(n);
    std::unordered_set<TxId, TxId::Hasher> scanned;
    scanned.reserve(n);
    std::unordered_map<AccountId, Account, AccountId::Hasher> overlay;
    overlay.reserve(n);
    auto account = [&](const AccountId& id) -> Account& {
        auto it = overlay.find(id);
        if (it != overlay.end()) return it->second;
        return overlay.emplace(id, prefix_state.get(id)).first->second;
    };
    for (const auto& micro : mb.microblocks) {
        for (const auto& tx : micro->transactions) {
            if (!scanned.insert(tx->id()).second || seen(tx->id())) {
                report.verdicts.push_back(Verdict::DuplicateOverlap);
                continue;
            }
            Account& s = account(tx->sender());
            if (tx->nonce() != s.next_nonce) {
                report.verdicts.push_back(Verdict::NonceConflict);
                continue;
            }
            if (s.balance < tx->amount() + tx->fee()) {
                report.verdicts.push_back(Verdict::InsufficientBalance);
                continue;
            }
            s.balance -= tx->amount() + tx->fee();
            s.next_nonce += 1;
            account(tx->recipient()).balance += tx->amount();
            report.verdicts.push_back(Verdict::Valid);
            ++report.non_overlapping_valid_count;
        }
    }
    return report;
}

ValidityReport resolve_validity(const Macroblock& mb, const LedgerState& prefix_state,
                                const std::unordered_set<TxId, TxId::Hasher>& seen_ids)
{
    return resolve_validity(mb, prefix_state, [&](const TxId& id) { return seen_ids.count(id) != 0; });
}

DiversityCounts count_non_overlapping(const Chain& c, const LedgerState& genesis_state, const IncentiveParams& params)
{
    DiversityCounts out;
    if (c.empty()) return out;
    out.per_block.push_back(0);
    LedgerState state = genesis_state;
    std::unordered_set<TxId, TxId::Hasher> seen;
    for (std::size_t i = 1; i < c.blocks.size(); ++i) {
        const auto& mb = *c.blocks[i];
        const auto report = resolve_validity(mb, state, seen);
        state = settle(state, mb, report, params);
        for (const auto& m : mb.microblocks) {
            for (const auto& t : m->transactions) seen.insert(t->id());
        }
        out.per_block.push_back(report.non_overlapping_valid_count);
        out.total += report.non_overlapping_valid_count;
    }
    return out;
}

int compare_preference(const ForkChoiceKey& a, const ForkChoiceKey& b)
{
    if (a.macroblock_count != b.macroblock_count) return a.macroblock_count > b.macroblock_count ? -1 : 1;
    if (a.total_non_overlapping_valid != b.total_non_overlapping_valid) {
        return a.total_non_overlapping_valid > b.total_non_overlapping_valid ? -1 : 1;
    }
    if (a.tiebreak_hash != b.tiebreak_hash) return a.tiebreak_hash < b.tiebreak_hash ? -1 : 1;
    if (a.body_root != b.body_root) return a.body_root < b.body_root ? -1 : 1;
    return 0;
}

ForkChoiceKey fork_choice_key(const Chain& c, const LedgerState& genesis_state, const IncentiveParams& params)
{
    ForkChoiceKey k;
    if (c.empty()) return k;
    k.macroblock_count = c.blocks.size();
    k.total_non_overlapping_valid = count_non_overlapping(c, genesis_state, params).total;
    k.tiebreak_hash = c.tip_hash();
    k.body_root = c.blocks.back()->body_root;
    return k;
}

std::size_t fork_choice(const std::vector<Chain>& candidates, const LedgerState& genesis_state,
                        const IncentiveParams& params)
{
    if (candidates.empty()) throw std::invalid_argument("fork_choice needs at least one candidate");
    std::size_t best = 0;
    auto best_key = fork_choice_key(candidates[0], genesis_state, params);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        auto k = fork_choice_key(candidates[i], genesis_state, params);
        if (preferred(k, best_key)) {
            best = i;
            best_key = std::move(k);
        }
    }
    return best;
}

} // namespace bicomp
