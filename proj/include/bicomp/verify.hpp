#pragma once

#include <bicomp/scenario.hpp>
#include <bicomp/types.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bicomp {

struct VerifyReport {
    std::vector<std::string> problems;
    std::uint64_t height = 0;
    Hash256 tip_id;
    std::uint64_t blocks_checked = 0;
    std::uint64_t valid_txs = 0;
    //! Set when a replay was requested: whether the re-run reproduced the recorded trace hash.
    std::optional<bool> replay_match;

    bool ok() const { return problems.empty() && replay_match.value_or(true); }
};

/**
 * Re-validates a chain from genesis: linkage, header PoW and settlement roots,
 * bodies and signatures, transaction verdicts, and supply conservation.
 */
VerifyReport verify_chain(const Scenario& s, const Chain& c);

class VerifyInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Reads a trace log plus the chain.bin next to it and re-validates the
 * chain, cross-checking the tip and height recorded in the trace's end line.
 * With replay the scenario embedded in the trace is re-run and its trace hash
 * compared. Throws VerifyInputError when the inputs cannot be read.
 */
VerifyReport verify_trace(const std::filesystem::path& trace, bool replay = false);

} // namespace bicomp
