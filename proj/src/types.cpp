#include <bicomp/types.hpp>

#include <algorithm>
#include <limits>

namespace bicomp {

namespace {

constexpr std::uint8_t kLeafPrefix = 0x00;
constexpr std::uint8_t kNodePrefix = 0x01;
constexpr std::array<std::uint8_t, 4> kChainMagic{'B', 'C', 'M', 'P'};
constexpr std::uint32_t kChainVersion = 1;

void need(ByteView data, std::size_t offset, std::size_t n, const char* what)
{
    if (offset > data.size() || data.size() - offset < n) {
        throw DecodeError(std::string("truncated input while reading ") + what);
    }
}

Hash256 read_hash(ByteView data, std::size_t& offset)
{
    need(data, offset, 32, "hash");
    Hash256 h;
    std::memcpy(h.bytes.data(), data.data() + offset, 32);
    offset += 32;
    return h;
}

template <class UInt>
UInt read_le(ByteView data, std::size_t& offset, const char* what)
{
    need(data, offset, sizeof(UInt), what);
    const UInt v = load_le<UInt>(data.data() + offset);
    offset += sizeof(UInt);
    return v;
}

Hash256 hash_leaf(const Hash256& v)
{
    std::uint8_t buf[33];
    buf[0] = kLeafPrefix;
    std::memcpy(buf + 1, v.bytes.data(), 32);
    return sha256(ByteView{buf, sizeof(buf)});
}

Hash256 hash_node(const Hash256& l, const Hash256& r)
{
    std::uint8_t buf[65];
    buf[0] = kNodePrefix;
    std::memcpy(buf + 1, l.bytes.data(), 32);
    std::memcpy(buf + 33, r.bytes.data(), 32);
    return sha256(ByteView{buf, sizeof(buf)});
}

} // namespace

Transaction::Transaction(AccountId sender, AccountId recipient, std::uint64_t amount, std::uint64_t fee,
                         std::uint64_t nonce, ByteView payload)
    : sender_(sender), recipient_(recipient), amount_(amount), fee_(fee), nonce_(nonce),
      payload_(payload.begin(), payload.end())
{
    if (payload.size() > kMaxPayload) throw std::invalid_argument("transaction payload exceeds 64 bytes");
    if (amount > std::numeric_limits<std::uint64_t>::max() - fee) {
        throw std::invalid_argument("transaction amount + fee overflows");
    }
    Bytes buf;
    buf.reserve(serialized_size());
    serialize_into(buf);
    id_ = TxId{sha256(buf)};
}

void Transaction::serialize_into(Bytes& out) const
{
    put_hash(out, sender_.value);
    put_hash(out, recipient_.value);
    put_le(out, amount_);
    put_le(out, fee_);
    put_le(out, nonce_);
    put_u8(out, static_cast<std::uint8_t>(payload_.size()));
    out.insert(out.end(), payload_.begin(), payload_.end());
}

Bytes Transaction::serialize() const
{
    Bytes out;
    out.reserve(serialized_size());
    serialize_into(out);
    return out;
}

Transaction Transaction::parse(ByteView data, std::size_t& offset)
{
    const AccountId sender{read_hash(data, offset)};
    const AccountId recipient{read_hash(data, offset)};
    const auto amount = read_le<std::uint64_t>(data, offset, "amount");
    const auto fee = read_le<std::uint64_t>(data, offset, "fee");
    const auto nonce = read_le<std::uint64_t>(data, offset, "nonce");
    const auto len = read_le<std::uint8_t>(data, offset, "payload length");
    if (len > kMaxPayload) throw DecodeError("payload length exceeds 64");
    need(data, offset, len, "payload");
    ByteView payload{data.data() + offset, len};
    offset += len;
    try {
        return Transaction(sender, recipient, amount, fee, nonce, payload);
    } catch (const std::invalid_argument& e) {
        throw DecodeError(e.what());
    }
}

TxId tx_id(const Transaction& t) { return t.id(); }

Hash256 merkle_root_of_leaves(std::vector<Hash256> level)
{
    if (level.empty()) return Hash256{};
    for (auto& v : level) v = hash_leaf(v);
    while (level.size() > 1) {
        if (level.size() % 2 == 1) level.push_back(level.back());
        const std::size_t half = level.size() / 2;
        for (std::size_t i = 0; i < half; ++i) level[i] = hash_node(level[2 * i], level[2 * i + 1]);
        level.resize(half);
    }
    return level.front();
}

Hash256 merkle_root(const std::vector<TxPtr>& txs)
{
    std::vector<Hash256> leaves;
    leaves.reserve(txs.size());
    for (const auto& t : txs) leaves.push_back(t->id().value);
    return merkle_root_of_leaves(std::move(leaves));
}

Bytes MicroblockHeader::serialize() const
{
    Bytes out;
    out.reserve(kMicroHeaderSize);
    put_hash(out, round_header_hash);
    put_hash(out, miner.value);
    put_hash(out, merkle_root);
    put_le(out, static_cast<std::uint64_t>(timestamp));
    put_le(out, difficulty_bits);
    put_le(out, nonce);
    return out;
}

MicroblockHeader MicroblockHeader::parse(ByteView data)
{
    if (data.size() != kMicroHeaderSize) throw DecodeError("microblock header must be 116 bytes");
    std::size_t off = 0;
    MicroblockHeader h;
    h.round_header_hash = read_hash(data, off);
    h.miner = NodeId{read_hash(data, off)};
    h.merkle_root = read_hash(data, off);
    h.timestamp = static_cast<SimTime>(read_le<std::uint64_t>(data, off, "timestamp"));
    h.difficulty_bits = read_le<std::uint32_t>(data, off, "difficulty");
    h.nonce = read_le<std::uint64_t>(data, off, "nonce");
    return h;
}

Hash256 MicroblockHeader::hash() const { return sha256(serialize()); }

std::size_t Microblock::serialized_size() const
{
    std::size_t n = kMicroHeaderSize + 4;
    for (const auto& t : transactions) n += t->serialized_size();
    return n;
}

void Microblock::serialize_into(Bytes& out) const
{
    const auto h = header.serialize();
    out.insert(out.end(), h.begin(), h.end());
    put_le(out, static_cast<std::uint32_t>(transactions.size()));
    for (const auto& t : transactions) t->serialize_into(out);
}

Microblock Microblock::parse(ByteView data, std::size_t& offset)
{
    need(data, offset, kMicroHeaderSize, "microblock header");
    Microblock m;
    m.header = MicroblockHeader::parse(data.subspan(offset, kMicroHeaderSize));
    offset += kMicroHeaderSize;
    const auto count = read_le<std::uint32_t>(data, offset, "transaction count");
    // Every transaction takes at least 89 bytes; reject absurd counts before allocating.
    if (count > (data.size() - offset) / 89 + 1) throw DecodeError("transaction count exceeds input size");
    m.transactions.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        m.transactions.push_back(std::make_shared<const Transaction>(Transaction::parse(data, offset)));
    }
    return m;
}

std::array<std::uint8_t, kHeaderSize> serialize_header(const MacroblockHeader& h)
{
    std::array<std::uint8_t, kHeaderSize> out{};
    std::uint8_t* p = out.data();
    store_le(p, h.version);
    p += 4;
    store_le(p, h.height);
    p += 8;
    std::memcpy(p, h.prev_macroblock_hash.bytes.data(), 32);
    p += 32;
    std::memcpy(p, h.state_root.bytes.data(), 32);
    p += 32;
    store_le(p, static_cast<std::uint64_t>(h.timestamp));
    p += 8;
    store_le(p, h.difficulty_bits);
    p += 4;
    std::memcpy(p, h.miner.value.bytes.data(), 32);
    p += 32;
    store_le(p, h.nonce);
    p += 8;
    std::memcpy(p, h.reserved.data(), h.reserved.size());
    return out;
}

MacroblockHeader parse_header(ByteView data)
{
    if (data.size() != kHeaderSize) throw DecodeError("macroblock header must be 200 bytes");
    std::size_t off = 0;
    MacroblockHeader h;
    h.version = read_le<std::uint32_t>(data, off, "version");
    h.height = read_le<std::uint64_t>(data, off, "height");
    h.prev_macroblock_hash = read_hash(data, off);
    h.state_root = read_hash(data, off);
    h.timestamp = static_cast<SimTime>(read_le<std::uint64_t>(data, off, "timestamp"));
    h.difficulty_bits = read_le<std::uint32_t>(data, off, "difficulty");
    h.miner = NodeId{read_hash(data, off)};
    h.nonce = read_le<std::uint64_t>(data, off, "nonce");
    std::memcpy(h.reserved.data(), data.data() + off, h.reserved.size());
    return h;
}

Hash256 MacroblockHeader::hash() const
{
    const auto raw = serialize_header(*this);
    return sha256(ByteView{raw.data(), raw.size()});
}

std::size_t Macroblock::transaction_count() const
{
    std::size_t n = 0;
    for (const auto& m : microblocks) n += m->transactions.size();
    return n;
}

std::size_t Macroblock::serialized_size() const
{
    std::size_t n = kHeaderSize + 32 + 2 + leader_signature.size() + 4;
    for (const auto& m : microblocks) n += m->serialized_size();
    return n;
}

Bytes Macroblock::serialize() const
{
    Bytes out;
    out.reserve(serialized_size());
    const auto h = serialize_header(header);
    out.insert(out.end(), h.begin(), h.end());
    put_hash(out, body_root);
    put_le(out, static_cast<std::uint16_t>(leader_signature.size()));
    out.insert(out.end(), leader_signature.begin(), leader_signature.end());
    put_le(out, static_cast<std::uint32_t>(microblocks.size()));
    for (const auto& m : microblocks) m->serialize_into(out);
    return out;
}

Macroblock Macroblock::parse(ByteView data, std::size_t& offset)
{
    need(data, offset, kHeaderSize, "macroblock header");
    Macroblock mb;
    mb.header = parse_header(data.subspan(offset, kHeaderSize));
    offset += kHeaderSize;
    mb.body_root = read_hash(data, offset);
    const auto sig_len = read_le<std::uint16_t>(data, offset, "signature length");
    need(data, offset, sig_len, "signature");
    mb.leader_signature.assign(data.begin() + static_cast<std::ptrdiff_t>(offset),
                               data.begin() + static_cast<std::ptrdiff_t>(offset + sig_len));
    offset += sig_len;
    const auto count = read_le<std::uint32_t>(data, offset, "microblock count");
    if (count > (data.size() - offset) / (kMicroHeaderSize + 4) + 1) {
        throw DecodeError("microblock count exceeds input size");
    }
    mb.microblocks.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        mb.microblocks.push_back(std::make_shared<const Microblock>(Microblock::parse(data, offset)));
    }
    return mb;
}

Hash256 body_root(const std::vector<MicroPtr>& micros)
{
    std::vector<Hash256> leaves;
    leaves.reserve(micros.size());
    for (const auto& m : micros) leaves.push_back(m->hash());
    return merkle_root_of_leaves(std::move(leaves));
}

Hash256 block_id(const Hash256& header_hash, const Hash256& body_root)
{
    return sha256(header_hash.view(), body_root.view());
}

Bytes signing_message(const Hash256& header_hash, const Hash256& body_root)
{
    Bytes msg;
    msg.reserve(64);
    put_hash(msg, header_hash);
    put_hash(msg, body_root);
    return msg;
}

Bytes MockSignatureScheme::sign(const NodeId& signer, ByteView message) const
{
    const auto h = sha256(signer.value.view(), message);
    return Bytes(h.bytes.begin(), h.bytes.end());
}

bool MockSignatureScheme::verify(const NodeId& signer, ByteView message, ByteView signature) const
{
    const auto h = sha256(signer.value.view(), message);
    return signature.size() == 32 && std::memcmp(signature.data(), h.bytes.data(), 32) == 0;
}

const SignatureScheme& default_signature_scheme()
{
    static const MockSignatureScheme scheme;
    return scheme;
}

bool Chain::well_formed() const
{
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i]->header.height != i) return false;
        if (i > 0 && blocks[i]->header.prev_macroblock_hash != blocks[i - 1]->header.hash()) return false;
    }
    return true;
}

Macroblock make_genesis(std::uint32_t difficulty_bits)
{
    Macroblock g;
    g.header.version = 1;
    g.header.height = 0;
    g.header.difficulty_bits = difficulty_bits;
    g.body_root = Hash256{};
    return g;
}

Bytes serialize_chain(const Chain& c)
{
    Bytes out(kChainMagic.begin(), kChainMagic.end());
    put_le(out, kChainVersion);
    put_le(out, static_cast<std::uint64_t>(c.blocks.size()));
    for (const auto& b : c.blocks) {
        const auto raw = b->serialize();
        put_le(out, static_cast<std::uint64_t>(raw.size()));
        out.insert(out.end(), raw.begin(), raw.end());
    }
    return out;
}

Chain parse_chain(ByteView data)
{
    std::size_t off = 0;
    need(data, off, 4, "magic");
    if (!std::equal(kChainMagic.begin(), kChainMagic.end(), data.begin())) throw DecodeError("bad chain magic");
    off += 4;
    if (read_le<std::uint32_t>(data, off, "version") != kChainVersion) throw DecodeError("unsupported chain version");
    const auto count = read_le<std::uint64_t>(data, off, "block count");
    Chain c;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto len = read_le<std::uint64_t>(data, off, "block length");
        need(data, off, len, "block");
        std::size_t inner = 0;
        auto view = data.subspan(off, len);
        c.blocks.push_back(std::make_shared<const Macroblock>(Macroblock::parse(view, inner)));
        if (inner != len) throw DecodeError("trailing bytes in block record");
        off += len;
    }
    if (off != data.size()) throw DecodeError("trailing bytes after chain");
    return c;
}

} // namespace bicomp
