#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bicomp {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/** A 256-bit digest. Ordering is lexicographic over the raw bytes. */
struct Hash256 {
    std::array<std::uint8_t, 32> bytes{};

    friend auto operator<=>(const Hash256&, const Hash256&) = default;

    bool is_zero() const noexcept;
    std::string hex() const;
    //! Throws std::invalid_argument on malformed input.
    static Hash256 from_hex(std::string_view hex);

    //! First eight bytes as a little-endian integer. Used for hashing into tables.
    std::uint64_t low64() const noexcept
    {
        std::uint64_t v;
        std::memcpy(&v, bytes.data(), sizeof(v));
        return v;
    }

    ByteView view() const noexcept { return {bytes.data(), bytes.size()}; }
};

struct Hash256Hasher {
    std::size_t operator()(const Hash256& h) const noexcept { return static_cast<std::size_t>(h.low64()); }
};

/** Strongly typed 256-bit identifiers sharing one representation. */
template <class Tag>
struct Tagged256 {
    Hash256 value;

    friend auto operator<=>(const Tagged256&, const Tagged256&) = default;
    std::string hex() const { return value.hex(); }

    struct Hasher {
        std::size_t operator()(const Tagged256& t) const noexcept { return static_cast<std::size_t>(t.value.low64()); }
    };
};

using TxId = Tagged256<struct TxIdTag>;
using AccountId = Tagged256<struct AccountIdTag>;
//! Nodes receive rewards on the account that shares their identifier.
using NodeId = AccountId;
using StateRoot = Tagged256<struct StateRootTag>;

Hash256 sha256(ByteView data);
Hash256 sha256(ByteView a, ByteView b);

/** Incremental SHA-256, used where the input is produced piecewise (trace hashing). */
class Sha256Stream {
public:
    Sha256Stream();
    ~Sha256Stream();
    Sha256Stream(const Sha256Stream&) = delete;
    Sha256Stream& operator=(const Sha256Stream&) = delete;
    Sha256Stream(Sha256Stream&&) noexcept;
    Sha256Stream& operator=(Sha256Stream&&) noexcept;

    void update(ByteView data);
    //! Returns the digest of everything fed so far; the stream remains usable.
    Hash256 digest() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/** Little-endian append helpers shared by the serializers. */
inline void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

template <class UInt>
inline void put_le(Bytes& out, UInt v)
{
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

template <class UInt>
inline void store_le(std::uint8_t* dst, UInt v)
{
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
}

template <class UInt>
inline UInt load_le(const std::uint8_t* src)
{
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        v |= static_cast<UInt>(src[i]) << (8 * i);
    }
    return v;
}

inline void put_hash(Bytes& out, const Hash256& h) { out.insert(out.end(), h.bytes.begin(), h.bytes.end()); }

std::string to_hex(ByteView data);
//! Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

} // namespace bicomp
