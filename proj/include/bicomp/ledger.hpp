#pragma once

#include <bicomp/hash.hpp>
#include <bicomp/types.hpp>

#include <boost/container/flat_map.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace bicomp {

enum class Verdict : std::uint8_t { Valid = 0, DuplicateOverlap = 1, NonceConflict = 2, InsufficientBalance = 3 };

const char* to_string(Verdict v);

/** Per-transaction verdicts in scan order (microblock order, then in-microblock order). */
struct ValidityReport {
    std::vector<Verdict> verdicts;
    std::uint64_t non_overlapping_valid_count = 0;

    friend bool operator==(const ValidityReport&, const ValidityReport&) = default;
};

struct Account {
    std::uint64_t balance = 0;
    std::uint64_t next_nonce = 0;

    friend bool operator==(const Account&, const Account&) = default;
};

struct IncentiveParams {
    std::uint64_t block_reward = 50;
    //! Leader share of each fee in parts per million, so the split is exact integer arithmetic.
    std::uint32_t leader_fee_share_ppm = 300000;

    std::uint64_t leader_cut(std::uint64_t fee) const
    {
        return static_cast<std::uint64_t>(static_cast<unsigned __int128>(fee) * leader_fee_share_ppm / 1000000u);
    }

    friend bool operator==(const IncentiveParams&, const IncentiveParams&) = default;
};

/** Account balances and nonces. Treated as an immutable snapshot once shared. */
class LedgerState {
public:
    using Map = boost::container::flat_map<AccountId, Account>;

    LedgerState() = default;
    explicit LedgerState(Map accounts) : accounts_(std::move(accounts)) {}

    const Map& accounts() const noexcept { return accounts_; }
    //! Missing accounts read as zero balance, nonce 0.
    Account get(const AccountId& id) const;
    Account& at(const AccountId& id) { return accounts_[id]; }
    void set(const AccountId& id, Account a) { accounts_[id] = a; }
    void credit(const AccountId& id, std::uint64_t amount) { accounts_[id].balance += amount; }
    void reserve(std::size_t n) { accounts_.reserve(n); }

    //! Sum of balances; wide enough that it cannot overflow for 64-bit balances.
    unsigned __int128 total_supply() const;

    //! Reward credits made by the most recent settle() call.
    std::vector<std::pair<AccountId, std::uint64_t>> pending;

    friend bool operator==(const LedgerState& a, const LedgerState& b) { return a.accounts_ == b.accounts_; }

private:
    Map accounts_;
};

/** Merkle root over (id || balance || nonce) entries in account id order. */
StateRoot state_root(const LedgerState& s);

/**
 * Applies the valid transactions of mb to parent_state and credits rewards:
 * sender pays amount + fee, recipient receives amount, the leader gets
 * floor(rho * fee) of each fee plus R, the microblock miner gets the rest.
 */
LedgerState settle(const LedgerState& parent_state, const Macroblock& mb, const ValidityReport& report,
                   const IncentiveParams& params);

struct Chain;

/**
 * State root a header extending parent_chain must carry: the root of the
 * state after settling every block of the chain, replayed from genesis.
 */
StateRoot expected_settlement(const Chain& parent_chain, const LedgerState& genesis_state,
                              const IncentiveParams& params);

} // namespace bicomp
