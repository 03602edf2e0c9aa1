#pragma once

#include <bicomp/ledger.hpp>
#include <bicomp/pow.hpp>
#include <bicomp/types.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_set>
#include <vector>

namespace bicomp {

enum class Reject : std::uint8_t {
    Ok = 0,
    BadPow,
    BadParent,
    BadHeight,
    BadTimestamp,
    BadSettlement,
    BadRound,
    BadMerkle,
    Oversize,
    BadSignature,
    BadBodyRoot,
    TooManyMicroblocks,
    TxCapExceeded,
    SelfPackaging,
    DuplicateMicroblock,
    UnknownParent,
};

const char* to_string(Reject r);

/** Consensus parameters shared by every validator in a run. */
struct ChainRules {
    Difficulty macro_difficulty{22};
    Difficulty micro_difficulty{16};
    //! Puzzles are solved and checked at min(bits, pow_check_cap); timing still follows the nominal bits.
    std::uint8_t pow_check_cap = 8;
    std::uint32_t capacity = 12;
    std::uint32_t micro_tx_cap = 1500;
    std::uint64_t macro_tx_cap = 12 * 1500;
    //! Half-width of the header timestamp acceptance window around local time.
    SimTime timestamp_window_ms = 120000;
    const SignatureScheme* signatures = &default_signature_scheme();

    Difficulty checked(Difficulty d) const { return Difficulty{d.bits < pow_check_cap ? d.bits : pow_check_cap}; }
};

/**
 * Header checks against its parent: linkage, height, PoW, parent-relative
 * timestamp order, settlement root. When local_now is given the timestamp must
 * also lie within the acceptance window around it.
 */
Reject validate_header(const MacroblockHeader& h, const MacroblockHeader& parent, const StateRoot& expected_state_root,
                       const ChainRules& rules, std::optional<SimTime> local_now = std::nullopt);
Reject validate_header(const MacroblockHeader& h, const Chain& parent_chain, const StateRoot& expected_state_root,
                       const ChainRules& rules, std::optional<SimTime> local_now = std::nullopt);

//! Future-only variant of the window check used for blocks arriving late on a fork.
bool timestamp_plausible(SimTime ts, SimTime local_now, const ChainRules& rules, bool allow_past);

Reject validate_microblock(const Microblock& m, const MacroblockHeader& round_header, const ChainRules& rules);

/** Signature, body root, capacity, per-microblock checks, and the no-self-packaging rule. */
Reject validate_body(const Macroblock& mb, const ChainRules& rules);

using SeenPredicate = std::function<bool(const TxId&)>;

ValidityReport resolve_validity(const Macroblock& mb, const LedgerState& prefix_state, const SeenPredicate& seen);
ValidityReport resolve_validity(const Macroblock& mb, const LedgerState& prefix_state,
                                const std::unordered_set<TxId, TxId::Hasher>& seen_ids);

struct DiversityCounts {
    std::vector<std::uint64_t> per_block;
    std::uint64_t total = 0;
};

//! Full re-scan from genesis. per_block[0] is the genesis block (always 0).
DiversityCounts count_non_overlapping(const Chain& c, const LedgerState& genesis_state,
                                      const IncentiveParams& params = {});

/**
 * Preference order: more macroblocks, then more non-overlapping valid
 * transactions, then the smaller tip header hash, then the smaller body root
 * (only reachable when two bodies share a header).
 */
struct ForkChoiceKey {
    std::uint64_t macroblock_count = 0;
    std::uint64_t total_non_overlapping_valid = 0;
    Hash256 tiebreak_hash;
    Hash256 body_root;

    friend bool operator==(const ForkChoiceKey&, const ForkChoiceKey&) = default;
};

//! Negative when a is preferred over b, zero when equal, positive otherwise.
int compare_preference(const ForkChoiceKey& a, const ForkChoiceKey& b);
inline bool preferred(const ForkChoiceKey& a, const ForkChoiceKey& b) { return compare_preference(a, b) < 0; }

ForkChoiceKey fork_choice_key(const Chain& c, const LedgerState& genesis_state, const IncentiveParams& params = {});

//! Index of the preferred candidate. Candidates must be non-empty.
std::size_t fork_choice(const std::vector<Chain>& candidates, const LedgerState& genesis_state,
                        const IncentiveParams& params = {});

} // namespace bicomp
