#include <bicomp/hash.hpp>

#include <openssl/evp.h>

#include <stdexcept>

namespace bicomp {

namespace {

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string to_hex(ByteView data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex character");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

bool Hash256::is_zero() const noexcept
{
    for (auto b : bytes) {
        if (b != 0) return false;
    }
    return true;
}

std::string Hash256::hex() const { return to_hex(view()); }

Hash256 Hash256::from_hex(std::string_view hex)
{
    if (hex.size() != 64) throw std::invalid_argument("expected 64 hex characters for a 256-bit digest");
    const auto raw = bicomp::from_hex(hex);
    Hash256 h;
    std::copy(raw.begin(), raw.end(), h.bytes.begin());
    return h;
}

namespace {

struct DigestContext {
    EVP_MD* md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~DigestContext()
    {
        EVP_MD_CTX_free(ctx);
        EVP_MD_free(md);
    }
};

} // namespace

Hash256 sha256(ByteView data)
{
    thread_local DigestContext dc;
    Hash256 h;
    unsigned int len = 0;
    if (dc.md == nullptr || dc.ctx == nullptr || EVP_DigestInit_ex2(dc.ctx, dc.md, nullptr) != 1 ||
        EVP_DigestUpdate(dc.ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(dc.ctx, h.bytes.data(), &len) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    return h;
}

Hash256 sha256(ByteView a, ByteView b)
{
    // Most callers hash two short fields; avoid a heap allocation for those.
    std::uint8_t stack_buf[160];
    const std::size_t total = a.size() + b.size();
    if (total <= sizeof(stack_buf)) {
        if (!a.empty()) std::memcpy(stack_buf, a.data(), a.size());
        if (!b.empty()) std::memcpy(stack_buf + a.size(), b.data(), b.size());
        return sha256(ByteView{stack_buf, total});
    }
    Bytes buf;
    buf.reserve(total);
    buf.insert(buf.end(), a.begin(), a.end());
    buf.insert(buf.end(), b.begin(), b.end());
    return sha256(buf);
}

struct Sha256Stream::Impl {
    EVP_MD_CTX* ctx = nullptr;
    ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256Stream::Sha256Stream() : impl_(std::make_unique<Impl>())
{
    impl_->ctx = EVP_MD_CTX_new();
    if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("failed to initialise SHA-256 context");
    }
}

Sha256Stream::~Sha256Stream() = default;
Sha256Stream::Sha256Stream(Sha256Stream&&) noexcept = default;
Sha256Stream& Sha256Stream::operator=(Sha256Stream&&) noexcept = default;

void Sha256Stream::update(ByteView data)
{
    if (data.empty()) return;
    EVP_DigestUpdate(impl_->ctx, data.data(), data.size());
}

Hash256 Sha256Stream::digest() const
{
    EVP_MD_CTX* copy = EVP_MD_CTX_new();
    EVP_MD_CTX_copy_ex(copy, impl_->ctx);
    Hash256 h;
    unsigned int len = 0;
    EVP_DigestFinal_ex(copy, h.bytes.data(), &len);
    EVP_MD_CTX_free(copy);
    return h;
}

} // namespace bicomp
