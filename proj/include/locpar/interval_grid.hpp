#pragma once

#include <cstddef>
#include <vector>

namespace locpar {

/// Closed range of 1-based time indices [start, end].
struct Interval {
    std::size_t start = 1;
    std::size_t end = 1;

    [[nodiscard]] std::size_t length() const noexcept { return end - start + 1; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Split points tau of the testing interval I_{k+1}: every tau in [first, last]
/// cuts it into [I_{k+1}.start, tau] and [tau + 1, t].
struct TestedSet {
    std::size_t first = 0;
    std::size_t last = 0;

    [[nodiscard]] std::size_t size() const noexcept { return last - first + 1; }
};

/**
 * @brief Nested right-anchored intervals I_1 ⊂ ... ⊂ I_K ending at `right_edge`.
 *
 * lengths[0] = n0 and lengths[k] = max(lengths[k-1] + 1, floor(n0 * ratio^k)).
 * Indices in the public API (interval, tested_set) are 1-based to match the
 * step numbering used by the procedures.
 */
class IntervalGrid {
public:
    IntervalGrid(std::size_t right_edge, std::size_t n0, double ratio, std::size_t k_max);

    [[nodiscard]] std::size_t right_edge() const noexcept { return right_edge_; }
    [[nodiscard]] std::size_t n0() const noexcept { return n0_; }
    [[nodiscard]] double ratio() const noexcept { return ratio_; }
    [[nodiscard]] std::size_t k_max() const noexcept { return lengths_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& lengths() const noexcept { return lengths_; }
    [[nodiscard]] std::size_t length(std::size_t k) const;

    [[nodiscard]] Interval interval(std::size_t k) const;
    [[nodiscard]] TestedSet tested_set(std::size_t k) const;

    /// Same ladder re-anchored at another right edge.
    [[nodiscard]] IntervalGrid moved_to(std::size_t right_edge) const;

private:
    std::size_t right_edge_;
    std::size_t n0_;
    double ratio_;
    std::vector<std::size_t> lengths_;
};

/// Length ladder alone; validates n0 >= 2, ratio in (1, 3], k_max >= 1.
[[nodiscard]] std::vector<std::size_t> grid_lengths(std::size_t n0, double ratio, std::size_t k_max);

[[nodiscard]] IntervalGrid build_grid(std::size_t t, std::size_t n0, double ratio, std::size_t k_max);

/// Largest K whose ladder still fits into `history` observations (0 if even n0 does not).
[[nodiscard]] std::size_t max_levels(std::size_t history, std::size_t n0, double ratio);

inline constexpr std::size_t kDefaultN0 = 10;
inline constexpr double kDefaultRatio = 1.25;

/// Ladder parameters without a right edge.
struct GridSpec {
    std::size_t n0 = kDefaultN0;
    double ratio = kDefaultRatio;
    std::size_t k_max = 6;

    [[nodiscard]] std::vector<std::size_t> lengths() const { return grid_lengths(n0, ratio, k_max); }
    [[nodiscard]] std::size_t largest() const { return lengths().back(); }
    [[nodiscard]] IntervalGrid at(std::size_t t) const { return IntervalGrid(t, n0, ratio, k_max); }
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace locpar
