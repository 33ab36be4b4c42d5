#include "tomo/sampling.hpp"

#include "tomo/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tomo {

std::optional<ProjectiveSettings> projective_settings(const Pom& reg, double tol) {
    ProjectiveSettings out;
    out.weight = 0.0;

    Matrix acc = Matrix::Zero(reg.dim, reg.dim);
    std::vector<Index> group;
    for (Index k = 0; k < reg.size(); ++k) {
        acc += reg.elements[static_cast<size_t>(k)];
        group.push_back(k);
        // a closed group sums to a positive multiple of the identity
        const double lead = acc(0, 0).real();
        if (lead <= tol) continue;
        if ((acc - lead * Matrix::Identity(reg.dim, reg.dim)).cwiseAbs().maxCoeff() >
            tol) {
            continue;
        }
        if (out.groups.empty()) {
            out.weight = lead;
        } else if (std::abs(lead - out.weight) > tol) {
            return std::nullopt;   // unequal setting weights
        }
        out.groups.push_back(group);
        group.clear();
        acc.setZero();
    }
    if (!group.empty() || out.groups.empty()) {
        return std::nullopt;   // leftover elements never completed a group
    }
    // total must be the identity: m groups of weight 1/m
    if (std::abs(out.weight * static_cast<double>(out.groups.size()) - 1.0) > tol) {
        return std::nullopt;
    }
    // every element must be weight * projector, i.e. (e/weight)^2 = e/weight
    for (const auto& g : out.groups) {
        for (Index k : g) {
            const Matrix& e = reg.elements[static_cast<size_t>(k)];
            const Matrix scaled = e / out.weight;
            if ((scaled * scaled - scaled).cwiseAbs().maxCoeff() > 1e-8) {
                return std::nullopt;
            }
        }
    }
    return out;
}

std::vector<std::int64_t> multinomial_sample(const std::vector<double>& weights,
                                             std::int64_t draws,
                                             std::uint64_t seed) {
    const size_t cells = weights.size();
    if (cells == 0) {
        throw std::invalid_argument("multinomial_sample: empty weight vector");
    }
    std::vector<double> cdf(cells);
    double acc = 0.0;
    for (size_t i = 0; i < cells; ++i) {
        if (weights[i] < 0.0 || !std::isfinite(weights[i])) {
            throw std::invalid_argument("multinomial_sample: bad weight");
        }
        acc += weights[i];
        cdf[i] = acc;
    }
    if (!(acc > 0.0)) {
        throw std::invalid_argument("multinomial_sample: zero total weight");
    }

    Rng rng(seed);
    std::vector<std::int64_t> counts(cells, 0);
    for (std::int64_t n = 0; n < draws; ++n) {
        const double u = rng.uniform() * acc;
        const size_t cell = static_cast<size_t>(
            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        ++counts[std::min(cell, cells - 1)];
    }
    return counts;
}

Frequencies simulate_exact(const ProbVector& probs) {
    std::vector<Index> index;
    std::vector<double> values;
    double sum = 0.0, comp = 0.0;
    for (Index k = 0; k < probs.size(); ++k) {
        const double p = probs(k);
        if (p > 0.0) {
            index.push_back(k);
            values.push_back(p);
            double y = p - comp;
            double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    if (index.empty()) {
        throw std::invalid_argument("simulate_exact: no positive probabilities");
    }
    for (double& v : values) v /= sum;
    Frequencies freq = Frequencies::exact(std::move(index), std::move(values));
    freq.validate();
    return freq;
}

Frequencies simulate_per_setting(const ProbVector& probs, const ProductPom& pom,
                                 std::int64_t shots_per_setting,
                                 std::uint64_t seed) {
    if (shots_per_setting < 1) {
        throw std::invalid_argument("simulate_per_setting: shots must be >= 1");
    }
    if (probs.size() != pom.num_outcomes()) {
        throw std::invalid_argument("simulate_per_setting: probability length mismatch");
    }
    const int n = pom.n();
    std::vector<ProjectiveSettings> reg_settings;
    reg_settings.reserve(static_cast<size_t>(n));
    for (const Pom& reg : pom.registers) {
        auto s = projective_settings(reg);
        if (!s) {
            throw std::invalid_argument(
                "simulate_per_setting: register POM is not a union of projective settings");
        }
        reg_settings.push_back(std::move(*s));
    }

    const std::vector<Index> strides = pom.strides();
    std::int64_t num_settings = 1;
    for (const auto& s : reg_settings) {
        num_settings *= static_cast<std::int64_t>(s.groups.size());
    }

    std::vector<Index> collected_index;
    std::vector<std::int64_t> collected_counts;

    // mixed-radix iteration over the product settings, register 1 most
    // significant to match the outcome flattening
    std::vector<size_t> setting(static_cast<size_t>(n), 0);
    for (std::int64_t sidx = 0;; ++sidx) {
        // enumerate this setting's outcome tuples
        std::vector<Index> flat;
        std::vector<size_t> pos(static_cast<size_t>(n), 0);
        for (;;) {
            Index k = 0;
            for (int a = 0; a < n; ++a) {
                const auto& grp =
                    reg_settings[static_cast<size_t>(a)].groups[setting[static_cast<size_t>(a)]];
                k += grp[pos[static_cast<size_t>(a)]] * strides[static_cast<size_t>(a)];
            }
            flat.push_back(k);
            int a = n - 1;
            for (; a >= 0; --a) {
                const auto& grp =
                    reg_settings[static_cast<size_t>(a)].groups[setting[static_cast<size_t>(a)]];
                if (++pos[static_cast<size_t>(a)] < grp.size()) break;
                pos[static_cast<size_t>(a)] = 0;
            }
            if (a < 0) break;
        }

        std::vector<double> weights(flat.size());
        for (size_t i = 0; i < flat.size(); ++i) {
            weights[i] = std::max(0.0, probs(flat[i]));
        }
        const std::uint64_t setting_seed =
            mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(sidx) + 1));
        const std::vector<std::int64_t> counts =
            multinomial_sample(weights, shots_per_setting, setting_seed);
        for (size_t i = 0; i < flat.size(); ++i) {
            if (counts[i] > 0) {
                collected_index.push_back(flat[i]);
                collected_counts.push_back(counts[i]);
            }
        }

        int a = n - 1;
        for (; a >= 0; --a) {
            if (++setting[static_cast<size_t>(a)] <
                reg_settings[static_cast<size_t>(a)].groups.size()) {
                break;
            }
            setting[static_cast<size_t>(a)] = 0;
        }
        if (a < 0) break;
    }

    Frequencies freq = Frequencies::from_counts(std::move(collected_index),
                                                std::move(collected_counts));
    freq.validate(pom.num_outcomes());
    return freq;
}

Frequencies simulate_global(const ProbVector& probs, std::int64_t total_shots,
                            std::uint64_t seed) {
    if (total_shots < 1) {
        throw std::invalid_argument("simulate_global: total shots must be >= 1");
    }
    std::vector<double> weights(static_cast<size_t>(probs.size()));
    for (Index k = 0; k < probs.size(); ++k) {
        weights[static_cast<size_t>(k)] = std::max(0.0, probs(k));
    }
    const std::vector<std::int64_t> counts =
        multinomial_sample(weights, total_shots, mix_seed(seed));
    std::vector<Index> index;
    std::vector<std::int64_t> kept;
    for (size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] > 0) {
            index.push_back(static_cast<Index>(k));
            kept.push_back(counts[k]);
        }
    }
    Frequencies freq = Frequencies::from_counts(std::move(index), std::move(kept));
    freq.validate(probs.size());
    return freq;
}

} // namespace tomo
