#include "locpar/interval_grid.hpp"

#include <cmath>
#include <string>

#include "locpar/error.hpp"

namespace locpar {

std::vector<std::size_t> grid_lengths(std::size_t n0, double ratio, std::size_t k_max) {
    if (!(ratio > 1.0 && ratio <= 3.0)) {
        throw Error(Errc::BadRatio, "grid ratio must lie in (1, 3], got " + std::to_string(ratio));
    }
    if (n0 < 2) throw Error(Errc::InvalidArgument, "base length n0 must be at least 2");
    if (k_max < 1) throw Error(Errc::InvalidArgument, "grid needs at least one interval");
    std::vector<std::size_t> lengths;
    lengths.reserve(k_max);
    lengths.push_back(n0);
    for (std::size_t k = 1; k < k_max; ++k) {
        const auto geometric = static_cast<std::size_t>(
            std::floor(static_cast<double>(n0) * std::pow(ratio, static_cast<double>(k))));
        lengths.push_back(std::max(lengths.back() + 1, geometric));
    }
    return lengths;
}

IntervalGrid::IntervalGrid(std::size_t right_edge, std::size_t n0, double ratio, std::size_t k_max)
    : right_edge_(right_edge), n0_(n0), ratio_(ratio), lengths_(grid_lengths(n0, ratio, k_max)) {
    if (lengths_.back() > right_edge_) {
        throw Error(Errc::GridTooLong, "largest interval has length " +
                                           std::to_string(lengths_.back()) + " but only " +
                                           std::to_string(right_edge_) + " observations precede t");
    }
}

std::size_t IntervalGrid::length(std::size_t k) const {
    if (k < 1 || k > lengths_.size()) {
        throw Error(Errc::IndexOutOfRange, "interval index " + std::to_string(k) +
                                               " outside 1.." + std::to_string(lengths_.size()));
    }
    return lengths_[k - 1];
}

Interval IntervalGrid::interval(std::size_t k) const {
    return {right_edge_ - length(k) + 1, right_edge_};
}

TestedSet IntervalGrid::tested_set(std::size_t k) const {
    if (k < 1 || k + 1 > lengths_.size()) {
        throw Error(Errc::IndexOutOfRange, "tested set index " + std::to_string(k) +
                                               " outside 1.." + std::to_string(lengths_.size() - 1));
    }
    return {right_edge_ - lengths_[k] + 1, right_edge_ - lengths_[k - 1]};
}

IntervalGrid IntervalGrid::moved_to(std::size_t right_edge) const {
    return IntervalGrid(right_edge, n0_, ratio_, lengths_.size());
}

IntervalGrid build_grid(std::size_t t, std::size_t n0, double ratio, std::size_t k_max) {
    return IntervalGrid(t, n0, ratio, k_max);
}

std::size_t max_levels(std::size_t history, std::size_t n0, double ratio) {
    if (history < n0) return 0;
    std::size_t k = 1;
    // lengths grow by at least one per level, so k never exceeds history
    while (grid_lengths(n0, ratio, k + 1).back() <= history) ++k;
    return k;
}

}  // namespace locpar
