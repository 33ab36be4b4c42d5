#pragma once

#include "tomo/frequencies.hpp"
#include "tomo/pom.hpp"
#include "tomo/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tomo {

enum class SamplingMode { exact, per_setting, global };

struct SamplingPlan {
    SamplingMode mode = SamplingMode::exact;
    std::int64_t shots_per_setting = 100;
    std::int64_t total_shots = 0;       // global mode
    std::uint64_t seed = 0;
};

/// Decomposition of a register POM into projective settings: consecutive
/// element groups that each sum to weight * identity, with every element
/// weight * (rank-compatible projector) and the groups' weights all equal.
struct ProjectiveSettings {
    std::vector<std::vector<Index>> groups;   // element indices per setting
    double weight;                            // each group sums to weight * 1
};

/// Empty when the POM is not a uniform union of projective measurements.
std::optional<ProjectiveSettings> projective_settings(const Pom& reg,
                                                      double tol = 1e-9);

/// Exact-frequency record f_k = p_k over the strictly positive entries,
/// renormalized to unit sum.
Frequencies simulate_exact(const ProbVector& probs);

/// One multinomial draw of shots_per_setting copies for every product
/// setting, mapped into flattened outcome indices. N = shots * #settings.
Frequencies simulate_per_setting(const ProbVector& probs, const ProductPom& pom,
                                 std::int64_t shots_per_setting,
                                 std::uint64_t seed);

/// One multinomial draw of total_shots copies over all K outcomes.
Frequencies simulate_global(const ProbVector& probs, std::int64_t total_shots,
                            std::uint64_t seed);

/// total_shots categorical draws from an unnormalized weight vector,
/// accumulated into counts. Deterministic for a fixed seed.
std::vector<std::int64_t> multinomial_sample(const std::vector<double>& weights,
                                             std::int64_t draws,
                                             std::uint64_t seed);

} // namespace tomo
