#pragma once

#include <bicomp/block_tree.hpp>
#include <bicomp/chain.hpp>
#include <bicomp/ledger.hpp>
#include <bicomp/node.hpp>
#include <bicomp/pow.hpp>
#include <bicomp/types.hpp>

#include <memory>
#include <string>
#include <vector>

namespace fx {

using namespace bicomp;

inline AccountId acct(std::uint64_t i)
{
    std::uint8_t b[9] = {'a'};
    store_le<std::uint64_t>(b + 1, i);
    return AccountId{sha256(ByteView{b, sizeof b})};
}

inline NodeId miner(std::uint32_t i)
{
    std::uint8_t b[5] = {'m'};
    store_le<std::uint32_t>(b + 1, i);
    return NodeId{sha256(ByteView{b, sizeof b})};
}

inline TxPtr tx(std::uint64_t from, std::uint64_t to, std::uint64_t amount, std::uint64_t fee, std::uint64_t nonce,
                std::uint8_t tag = 0)
{
    std::uint8_t p[1] = {tag};
    return std::make_shared<const Transaction>(acct(from), acct(to), amount, fee, nonce,
                                               tag != 0 ? ByteView{p, 1} : ByteView{});
}

inline std::shared_ptr<const LedgerState> funded(std::uint64_t accounts, std::uint64_t balance)
{
    LedgerState s;
    for (std::uint64_t i = 0; i < accounts; ++i) s.set(acct(i), Account{balance, 0});
    return std::make_shared<const LedgerState>(std::move(s));
}

inline ChainRules rules(std::uint32_t capacity = 12, std::uint32_t micro_cap = 1500)
{
    ChainRules r;
    r.capacity = capacity;
    r.micro_tx_cap = micro_cap;
    r.macro_tx_cap = static_cast<std::uint64_t>(capacity) * micro_cap;
    return r;
}

//! Header on top of parent, PoW solved at the checked difficulty.
inline MacroblockHeader header_on(const MacroblockHeader& parent, const StateRoot& root, const NodeId& who,
                                  SimTime ts, const ChainRules& r = rules())
{
    MacroblockHeader h;
    h.height = parent.height + 1;
    h.prev_macroblock_hash = parent.hash();
    h.state_root = root.value;
    h.timestamp = ts;
    h.difficulty_bits = r.macro_difficulty.bits;
    h.miner = who;
    const auto raw = serialize_header(h);
    h.nonce = *mine_real(Bytes(raw.begin(), raw.end()), kHeaderNonceOffset, r.checked(r.macro_difficulty), 0, 1ull << 32);
    return h;
}

inline MicroPtr micro(const MacroblockHeader& round, const NodeId& who, std::vector<TxPtr> txs, SimTime ts = 0,
                      const ChainRules& r = rules())
{
    auto m = std::make_shared<Microblock>();
    m->header.round_header_hash = round.hash();
    m->header.miner = who;
    m->header.merkle_root = merkle_root(txs);
    m->header.timestamp = ts;
    m->header.difficulty_bits = r.micro_difficulty.bits;
    m->transactions = std::move(txs);
    m->header.nonce =
        *mine_real(m->header.serialize(), kMicroNonceOffset, r.checked(r.micro_difficulty), 0, 1ull << 32);
    return m;
}

inline MacroPtr block(const MacroblockHeader& h, std::vector<MicroPtr> micros)
{
    return std::make_shared<const Macroblock>(seal_macroblock(h, std::move(micros), default_signature_scheme()));
}

/** A tree over a funded genesis plus helpers to extend it. */
struct TreeFixture {
    ChainRules r;
    IncentiveParams inc;
    std::shared_ptr<const LedgerState> g0;
    std::unique_ptr<BlockTree> tree;

    explicit TreeFixture(ChainRules rr = rules(), std::uint64_t accounts = 16, std::uint64_t balance = 1000000)
        : r(rr), g0(funded(accounts, balance))
    {
        tree = std::make_unique<BlockTree>(g0, std::make_shared<const Macroblock>(make_genesis(r.macro_difficulty.bits)),
                                           r, inc);
    }

    const BlockEntry* genesis() const { return tree->genesis(); }

    MacroblockHeader next_header(const BlockEntry* parent, std::uint32_t who, SimTime ts = 0) const
    {
        return header_on(parent->block->header, parent->post_root, miner(who), ts, r);
    }

    //! Extends parent with one block holding the given transaction groups, one microblock per group.
    const BlockEntry* extend(const BlockEntry* parent, std::uint32_t leader, const std::vector<std::vector<TxPtr>>& groups,
                             SimTime ts = 0)
    {
        const auto h = next_header(parent, leader, ts);
        std::vector<MicroPtr> ms;
        std::uint32_t k = 100;
        for (const auto& g : groups) ms.push_back(micro(h, miner(k++), g, ts, r));
        return tree->insert(block(h, ms), ts);
    }
};

} // namespace fx
