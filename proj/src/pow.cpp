#include <bicomp/pow.hpp>

#include <bit>
#include <cmath>
#include <stdexcept>

namespace bicomp {

double Difficulty::expected_trials() const { return std::ldexp(1.0, bits); }

unsigned leading_zero_bits(const Hash256& h)
{
    unsigned n = 0;
    for (auto b : h.bytes) {
        if (b == 0) {
            n += 8;
            continue;
        }
        return n + static_cast<unsigned>(std::countl_zero(b));
    }
    return n;
}

bool check_pow(ByteView serialized, Difficulty d)
{
    if (d.bits == 0) return true;
    return leading_zero_bits(sha256(serialized)) >= d.bits;
}

std::optional<std::uint64_t> mine_real(Bytes tmpl, std::size_t nonce_offset, Difficulty d, std::uint64_t start_nonce,
                                       std::uint64_t max_trials)
{
    if (nonce_offset + 8 > tmpl.size()) throw std::invalid_argument("nonce slot outside template");
    std::uint64_t nonce = start_nonce;
    for (std::uint64_t i = 0; i < max_trials; ++i, ++nonce) {
        store_le(tmpl.data() + nonce_offset, nonce);
        if (check_pow(tmpl, d)) return nonce;
    }
    return std::nullopt;
}

RngStream::RngStream(std::uint64_t seed, std::string_view name)
{
    Bytes material;
    put_le(material, seed);
    material.insert(material.end(), name.begin(), name.end());
    const auto h = sha256(material);
    std::seed_seq seq{load_le<std::uint32_t>(h.bytes.data()), load_le<std::uint32_t>(h.bytes.data() + 4),
                      load_le<std::uint32_t>(h.bytes.data() + 8), load_le<std::uint32_t>(h.bytes.data() + 12),
                      load_le<std::uint32_t>(h.bytes.data() + 16), load_le<std::uint32_t>(h.bytes.data() + 20),
                      load_le<std::uint32_t>(h.bytes.data() + 24), load_le<std::uint32_t>(h.bytes.data() + 28)};
    engine_.seed(seq);
}

double RngStream::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::below(std::uint64_t n)
{
    if (n == 0) throw std::invalid_argument("RngStream::below(0)");
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = engine_();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = engine_();
            m = static_cast<unsigned __int128>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::exponential(double mean)
{
    // 1 - u lies in (0, 1], so the log is finite.
    return -mean * std::log(1.0 - uniform01());
}

double mean_mining_time_ms(Difficulty d, HashPower p)
{
    if (!(p.rate > 0)) throw std::invalid_argument("hash power must be positive");
    return d.expected_trials() / p.rate * 1000.0;
}

SimTime sample_mining_time(Difficulty d, HashPower p, RngStream& rng)
{
    const double ms = rng.exponential(mean_mining_time_ms(d, p));
    const auto t = static_cast<SimTime>(std::llround(ms));
    return t < 1 ? 1 : t;
}

} // namespace bicomp
