#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_set>

using namespace bicomp;

namespace {

std::map<std::string, std::string> read_golden(const std::string& name)
{
    std::ifstream f(std::string(BICOMP_TEST_DATA) + "/" + name);
    REQUIRE(f);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string k, v;
        ss >> k >> v;
        kv[k] = v;
    }
    return kv;
}

MacroblockHeader golden_header()
{
    MacroblockHeader h;
    h.version = 1;
    h.height = 0x0102030405060708ull;
    h.prev_macroblock_hash.bytes.fill(0x11);
    h.state_root.bytes.fill(0x22);
    h.timestamp = 1700000000000;
    h.difficulty_bits = 22;
    h.miner.value.bytes.fill(0x33);
    h.nonce = 0xa1b2c3d4e5f60718ull;
    return h;
}

MacroblockHeader random_header(std::mt19937_64& rng)
{
    MacroblockHeader h;
    h.version = static_cast<std::uint32_t>(rng());
    h.height = rng();
    for (auto& b : h.prev_macroblock_hash.bytes) b = static_cast<std::uint8_t>(rng());
    for (auto& b : h.state_root.bytes) b = static_cast<std::uint8_t>(rng());
    h.timestamp = static_cast<SimTime>(rng() >> 1);
    h.difficulty_bits = static_cast<std::uint32_t>(rng() % 64);
    for (auto& b : h.miner.value.bytes) b = static_cast<std::uint8_t>(rng());
    h.nonce = rng();
    for (auto& b : h.reserved) b = static_cast<std::uint8_t>(rng());
    return h;
}

} // namespace

TEST_CASE("sha256 matches published vectors")
{
    const std::string abc = "abc";
    CHECK(sha256(ByteView{reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()}).hex() ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256(ByteView{}).hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    Sha256Stream s;
    s.update(ByteView{reinterpret_cast<const std::uint8_t*>(abc.data()), 1});
    s.update(ByteView{reinterpret_cast<const std::uint8_t*>(abc.data()) + 1, 2});
    CHECK(s.digest().hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hex helpers")
{
    CHECK(to_hex(from_hex("00ff10")) == "00ff10");
    CHECK_THROWS_AS(from_hex("abc"), std::invalid_argument);
    CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);
    CHECK_THROWS_AS(Hash256::from_hex("00"), std::invalid_argument);
}

TEST_CASE("header golden vector")
{
    const auto kv = read_golden("header_golden.txt");
    const auto raw = serialize_header(golden_header());
    REQUIRE(raw.size() == 200);
    CHECK(to_hex(ByteView{raw.data(), raw.size()}) == kv.at("bytes"));
    CHECK(golden_header().hash().hex() == kv.at("sha256"));
    CHECK(parse_header(from_hex(kv.at("bytes"))) == golden_header());
}

TEST_CASE("header layout against the offset oracle")
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const auto h = random_header(rng);
        const auto raw = serialize_header(h);
        CHECK(raw.size() == kHeaderSize);
        REQUIRE(raw == oracle::header_bytes(h));
        CHECK(parse_header(ByteView{raw.data(), raw.size()}) == h);
    }
}

TEST_CASE("headers differing only in nonce differ in exactly the nonce bytes")
{
    std::mt19937_64 rng(11);
    auto a = random_header(rng);
    auto b = a;
    b.nonce = ~a.nonce;
    const auto ra = serialize_header(a);
    const auto rb = serialize_header(b);
    for (std::size_t i = 0; i < kHeaderSize; ++i) {
        const bool in_nonce = i >= kHeaderNonceOffset && i < kHeaderNonceOffset + 8;
        CHECK((ra[i] != rb[i]) == in_nonce);
    }
}

TEST_CASE("parse_header rejects wrong sizes")
{
    Bytes short_buf(199);
    CHECK_THROWS_AS(parse_header(short_buf), DecodeError);
    Bytes long_buf(201);
    CHECK_THROWS_AS(parse_header(long_buf), DecodeError);
}

TEST_CASE("transaction ids")
{
    const auto t = fx::tx(1, 2, 10, 3, 0);
    const Transaction copy(t->sender(), t->recipient(), t->amount(), t->fee(), t->nonce());
    CHECK(copy.id() == t->id());
    CHECK(fx::tx(1, 2, 10, 3, 1)->id() != t->id());
    CHECK(fx::tx(1, 2, 10, 3, 0, 9)->id() != t->id());
    CHECK(tx_id(*t) == t->id());

    std::size_t off = 0;
    const auto raw = t->serialize();
    CHECK(raw.size() == t->serialized_size());
    const auto back = Transaction::parse(raw, off);
    CHECK(off == raw.size());
    CHECK(back.id() == t->id());
}

TEST_CASE("payload over 64 bytes is rejected")
{
    Bytes p(65, 1);
    CHECK_THROWS(Transaction(fx::acct(0), fx::acct(1), 1, 1, 0, p));
    Bytes ok(64, 1);
    CHECK_NOTHROW(Transaction(fx::acct(0), fx::acct(1), 1, 1, 0, ok));
}

TEST_CASE("no id collisions over 1e5 random transactions")
{
    std::mt19937_64 rng(3);
    std::unordered_set<TxId, TxId::Hasher> ids;
    std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>> fields;
    for (int i = 0; i < 100000; ++i) {
        const auto a = rng() % 1000, b = rng() % 1000, amt = rng() % 100, fee = rng() % 10, n = rng() % 50;
        const bool fresh = fields.emplace(a, b, amt, fee, n).second;
        const bool new_id = ids.insert(fx::tx(a, b, amt, fee, n)->id()).second;
        REQUIRE(fresh == new_id);
    }
}

TEST_CASE("merkle root")
{
    CHECK(merkle_root({}).is_zero());
    const auto t1 = fx::tx(1, 2, 1, 1, 0);
    const auto t2 = fx::tx(2, 3, 1, 1, 0);
    const auto t3 = fx::tx(3, 4, 1, 1, 0);
    CHECK(merkle_root({t1}) == oracle::h_leaf(t1->id().value));
    const auto l1 = oracle::h_leaf(t1->id().value), l2 = oracle::h_leaf(t2->id().value),
               l3 = oracle::h_leaf(t3->id().value);
    CHECK(merkle_root({t1, t2, t3}) == oracle::h_node(oracle::h_node(l1, l2), oracle::h_node(l3, l3)));
    CHECK(merkle_root({t1, t2}) != merkle_root({t2, t1}));
}

TEST_CASE("merkle root matches the level oracle on random sizes")
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        std::vector<Hash256> ids(rng() % 40);
        for (auto& h : ids) {
            for (auto& b : h.bytes) b = static_cast<std::uint8_t>(rng());
        }
        REQUIRE(merkle_root_of_leaves(ids) == oracle::merkle(ids));
    }
}

TEST_CASE("microblock and macroblock round trip")
{
    fx::TreeFixture f;
    const auto h = f.next_header(f.genesis(), 1, 1000);
    const auto m1 = fx::micro(h, fx::miner(2), {fx::tx(1, 2, 5, 1, 0), fx::tx(3, 4, 5, 1, 0, 7)}, 1500);
    const auto m2 = fx::micro(h, fx::miner(3), {fx::tx(5, 6, 5, 1, 0)}, 1600);
    const auto mb = fx::block(h, {m1, m2});

    const auto mh = m1->header.serialize();
    CHECK(mh.size() == kMicroHeaderSize);
    CHECK(load_le<std::uint64_t>(mh.data() + kMicroNonceOffset) == m1->header.nonce);
    CHECK(MicroblockHeader::parse(mh) == m1->header);

    const auto raw = mb->serialize();
    CHECK(raw.size() == mb->serialized_size());
    std::size_t off = 0;
    const auto back = Macroblock::parse(raw, off);
    CHECK(off == raw.size());
    CHECK(back.header == mb->header);
    CHECK(back.body_root == mb->body_root);
    CHECK(back.leader_signature == mb->leader_signature);
    REQUIRE(back.microblocks.size() == 2);
    CHECK(back.microblocks[0]->hash() == m1->hash());
    CHECK(back.microblocks[0]->transactions[1]->id() == m1->transactions[1]->id());
    CHECK(block_id(back) == block_id(*mb));
}

TEST_CASE("chain dump round trip and corruption")
{
    fx::TreeFixture f;
    const auto* b1 = f.extend(f.genesis(), 1, {{fx::tx(1, 2, 5, 1, 0)}});
    const auto* b2 = f.extend(b1, 2, {{fx::tx(2, 3, 5, 1, 0)}});
    const auto c = f.tree->chain_to(b2);
    CHECK(c.well_formed());
    const auto raw = serialize_chain(c);
    const auto back = parse_chain(raw);
    REQUIRE(back.blocks.size() == 3);
    CHECK(block_id(*back.blocks[2]) == b2->id);

    Bytes bad = raw;
    bad[0] ^= 1;
    CHECK_THROWS_AS(parse_chain(bad), DecodeError);
    Bytes truncated(raw.begin(), raw.end() - 5);
    CHECK_THROWS_AS(parse_chain(truncated), DecodeError);
}

TEST_CASE("mock signatures")
{
    const auto& s = default_signature_scheme();
    const Bytes msg{1, 2, 3};
    const auto sig = s.sign(fx::miner(1), msg);
    CHECK(s.verify(fx::miner(1), msg, sig));
    CHECK_FALSE(s.verify(fx::miner(2), msg, sig));
    CHECK_FALSE(s.verify(fx::miner(1), Bytes{1, 2, 4}, sig));
}
