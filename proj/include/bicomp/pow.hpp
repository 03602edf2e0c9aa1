#pragma once

#include <bicomp/hash.hpp>
#include <bicomp/types.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace bicomp {

struct Difficulty {
    std::uint8_t bits = 0;
    //! Expected number of trials, 2^bits.
    double expected_trials() const;
};

struct HashPower {
    //! Puzzle attempts per simulated second. Must be positive.
    double rate = 1.0;
};

unsigned leading_zero_bits(const Hash256& h);
bool check_pow(ByteView serialized, Difficulty d);

/**
 * Scans nonces starting at start_nonce, writing each little-endian into the
 * 8 bytes at nonce_offset of the template. Returns the first nonce whose hash
 * meets the difficulty, or nullopt after max_trials attempts.
 */
std::optional<std::uint64_t> mine_real(Bytes tmpl, std::size_t nonce_offset, Difficulty d, std::uint64_t start_nonce,
                                       std::uint64_t max_trials);

/**
 * Named deterministic random stream. The engine is seeded from
 * SHA-256(seed || name) so streams are independent of creation order.
 * Distributions are implemented here rather than taken from <random> so the
 * draw sequence is identical across standard libraries.
 */
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view name);

    std::uint64_t next() { return engine_(); }
    //! Uniform in [0, 1) with 53 bits of precision.
    double uniform01();
    //! Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    //! Uniform integer in [lo, hi].
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
    double exponential(double mean);
    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

/** Exponential mining duration with mean 2^bits / rate seconds, returned in milliseconds (at least 1). */
SimTime sample_mining_time(Difficulty d, HashPower p, RngStream& rng);

//! Mean of sample_mining_time in milliseconds.
double mean_mining_time_ms(Difficulty d, HashPower p);

} // namespace bicomp
