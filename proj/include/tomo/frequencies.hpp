#pragma once

#include "tomo/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tomo {

using ProbVector = Eigen::VectorXd;

/// Sparse relative-frequency record. Entries are sorted by outcome index,
/// strictly positive, and sum to one. total_copies is empty in exact-frequency
/// mode (f_k set directly to Born probabilities).
struct Frequencies {
    std::optional<std::int64_t> total_copies;
    std::vector<Index> index;
    std::vector<double> freq;
    std::vector<std::int64_t> counts;   // populated iff total_copies is set

    Index support_size() const { return static_cast<Index>(index.size()); }

    /// Checks the type invariants; throws std::invalid_argument on violation.
    /// num_outcomes < 0 skips the index-range check.
    void validate(Index num_outcomes = -1) const;

    static Frequencies from_counts(std::vector<Index> index,
                                   std::vector<std::int64_t> counts);
    static Frequencies exact(std::vector<Index> index, std::vector<double> freq);
};

} // namespace tomo
