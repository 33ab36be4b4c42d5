#include "tomo/frequencies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tomo {

void Frequencies::validate(Index num_outcomes) const {
    if (index.size() != freq.size()) {
        throw std::invalid_argument("Frequencies: index/value length mismatch");
    }
    if (total_copies && counts.size() != index.size()) {
        throw std::invalid_argument("Frequencies: counts length mismatch");
    }
    if (total_copies && *total_copies <= 0) {
        throw std::invalid_argument("Frequencies: total copies must be positive");
    }
    // compensated summation; supports can reach millions of entries and the
    // unit-sum tolerance is 1e-12
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < index.size(); ++i) {
        if (freq[i] <= 0.0) {
            throw std::invalid_argument("Frequencies: frequencies must be > 0");
        }
        if (index[i] < 0 || (num_outcomes >= 0 && index[i] >= num_outcomes)) {
            throw std::invalid_argument("Frequencies: outcome index out of range");
        }
        if (i > 0 && index[i] <= index[i - 1]) {
            throw std::invalid_argument("Frequencies: indices must be distinct and sorted");
        }
        double y = freq[i] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("Frequencies: relative frequencies must sum to 1");
    }
}

namespace {

template <typename V>
void sort_by_index(std::vector<Index>& index, V& payload) {
    std::vector<size_t> order(index.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return index[a] < index[b]; });
    std::vector<Index> idx2(index.size());
    V pay2(payload.size());
    for (size_t i = 0; i < order.size(); ++i) {
        idx2[i] = index[order[i]];
        pay2[i] = payload[order[i]];
    }
    index.swap(idx2);
    payload.swap(pay2);
}

} // namespace

Frequencies Frequencies::from_counts(std::vector<Index> index,
                                     std::vector<std::int64_t> counts) {
    if (index.size() != counts.size()) {
        throw std::invalid_argument("Frequencies::from_counts: length mismatch");
    }
    sort_by_index(index, counts);
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
        if (c < 0) {
            throw std::invalid_argument("Frequencies::from_counts: negative count");
        }
        total += c;
    }
    if (total <= 0) {
        throw std::invalid_argument("Frequencies::from_counts: no counts");
    }
    Frequencies out;
    out.total_copies = total;
    for (size_t i = 0; i < index.size(); ++i) {
        if (counts[i] == 0) continue;   // zero-count outcomes are dropped
        out.index.push_back(index[i]);
        out.counts.push_back(counts[i]);
        out.freq.push_back(static_cast<double>(counts[i]) /
                           static_cast<double>(total));
    }
    return out;
}

Frequencies Frequencies::exact(std::vector<Index> index, std::vector<double> freq) {
    sort_by_index(index, freq);
    Frequencies out;
    out.index = std::move(index);
    out.freq = std::move(freq);
    return out;
}

} // namespace tomo
