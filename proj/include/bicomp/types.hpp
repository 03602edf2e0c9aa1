#pragma once

#include <bicomp/hash.hpp>

#include <boost/container/small_vector.hpp>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bicomp {

//! Simulated time in milliseconds.
using SimTime = std::int64_t;

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr std::size_t kMaxPayload = 64;
constexpr std::size_t kHeaderSize = 200;
constexpr std::size_t kHeaderNonceOffset = 120;
constexpr std::size_t kMicroHeaderSize = 116;
constexpr std::size_t kMicroNonceOffset = 108;

/**
 * Account-model payment. Immutable; the identifier is computed once at
 * construction from the canonical serialization.
 */
class Transaction {
public:
    using Payload = boost::container::small_vector<std::uint8_t, 12>;

    Transaction(AccountId sender, AccountId recipient, std::uint64_t amount, std::uint64_t fee, std::uint64_t nonce,
                ByteView payload = {});

    const AccountId& sender() const noexcept { return sender_; }
    const AccountId& recipient() const noexcept { return recipient_; }
    std::uint64_t amount() const noexcept { return amount_; }
    std::uint64_t fee() const noexcept { return fee_; }
    std::uint64_t nonce() const noexcept { return nonce_; }
    ByteView payload() const noexcept { return {payload_.data(), payload_.size()}; }
    const TxId& id() const noexcept { return id_; }

    std::size_t serialized_size() const noexcept { return 32 + 32 + 8 + 8 + 8 + 1 + payload_.size(); }
    void serialize_into(Bytes& out) const;
    Bytes serialize() const;
    //! Reads one transaction starting at `offset` and advances it.
    static Transaction parse(ByteView data, std::size_t& offset);

    friend bool operator==(const Transaction& a, const Transaction& b) { return a.id_ == b.id_; }

private:
    AccountId sender_;
    AccountId recipient_;
    std::uint64_t amount_;
    std::uint64_t fee_;
    std::uint64_t nonce_;
    Payload payload_;
    TxId id_;
};

using TxPtr = std::shared_ptr<const Transaction>;

TxId tx_id(const Transaction& t);

/** Merkle tree over TxId leaves. Leaf = H(0x00 || id), node = H(0x01 || l || r). */
Hash256 merkle_root(const std::vector<TxPtr>& txs);
Hash256 merkle_root_of_leaves(std::vector<Hash256> leaf_values);

struct MicroblockHeader {
    Hash256 round_header_hash;
    NodeId miner;
    Hash256 merkle_root;
    SimTime timestamp = 0;
    std::uint32_t difficulty_bits = 0;
    std::uint64_t nonce = 0;

    friend bool operator==(const MicroblockHeader&, const MicroblockHeader&) = default;

    Bytes serialize() const;
    static MicroblockHeader parse(ByteView data);
    Hash256 hash() const;
};

struct Microblock {
    MicroblockHeader header;
    std::vector<TxPtr> transactions;

    Hash256 hash() const { return header.hash(); }
    std::size_t serialized_size() const;
    void serialize_into(Bytes& out) const;
    static Microblock parse(ByteView data, std::size_t& offset);
};

using MicroPtr = std::shared_ptr<const Microblock>;

struct MacroblockHeader {
    std::uint32_t version = 1;
    std::uint64_t height = 0;
    Hash256 prev_macroblock_hash;
    Hash256 state_root;
    SimTime timestamp = 0;
    std::uint32_t difficulty_bits = 0;
    NodeId miner;
    std::uint64_t nonce = 0;
    std::array<std::uint8_t, 72> reserved{};

    friend bool operator==(const MacroblockHeader&, const MacroblockHeader&) = default;

    Hash256 hash() const;
};

using HeaderPtr = std::shared_ptr<const MacroblockHeader>;

//! Always exactly kHeaderSize bytes.
std::array<std::uint8_t, kHeaderSize> serialize_header(const MacroblockHeader& h);
MacroblockHeader parse_header(ByteView data);

struct Macroblock {
    MacroblockHeader header;
    std::vector<MicroPtr> microblocks;
    Hash256 body_root;
    Bytes leader_signature;

    std::size_t transaction_count() const;
    std::size_t serialized_size() const;
    Bytes serialize() const;
    static Macroblock parse(ByteView data, std::size_t& offset);
};

using MacroPtr = std::shared_ptr<const Macroblock>;

//! Root over microblock header hashes, same tree shape as merkle_root.
Hash256 body_root(const std::vector<MicroPtr>& micros);
//! Identifies a (header, body) pair. Equivocating bodies share a header hash but not a block id.
Hash256 block_id(const Hash256& header_hash, const Hash256& body_root);
inline Hash256 block_id(const Macroblock& mb) { return block_id(mb.header.hash(), mb.body_root); }
//! Message covered by the leader signature: header hash || body root.
Bytes signing_message(const Hash256& header_hash, const Hash256& body_root);

/** Signature abstraction. The mock scheme is sig = H(signer || message). */
class SignatureScheme {
public:
    virtual ~SignatureScheme() = default;
    virtual Bytes sign(const NodeId& signer, ByteView message) const = 0;
    virtual bool verify(const NodeId& signer, ByteView message, ByteView signature) const = 0;
    virtual std::string name() const = 0;
};

class MockSignatureScheme final : public SignatureScheme {
public:
    Bytes sign(const NodeId& signer, ByteView message) const override;
    bool verify(const NodeId& signer, ByteView message, ByteView signature) const override;
    std::string name() const override { return "mock"; }
};

const SignatureScheme& default_signature_scheme();

struct Chain {
    std::vector<MacroPtr> blocks;

    bool empty() const noexcept { return blocks.empty(); }
    std::uint64_t height() const { return blocks.empty() ? 0 : blocks.back()->header.height; }
    Hash256 tip_hash() const { return blocks.empty() ? Hash256{} : blocks.back()->header.hash(); }
    //! Checks linkage and consecutive heights from 0.
    bool well_formed() const;
};

//! Height-0 block with an empty body. Its PoW is never checked.
Macroblock make_genesis(std::uint32_t difficulty_bits);

/** Binary chain dump: "BCMP" magic, u32 version, u64 count, then length-prefixed blocks. */
Bytes serialize_chain(const Chain& c);
Chain parse_chain(ByteView data);

} // namespace bicomp
