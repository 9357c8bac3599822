#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace utr {

/// Dense row-major cost matrix.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    CostMatrix(std::initializer_list<std::initializer_list<double>> init);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Assignment {
    /// (row, col) pairs in ascending row order.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    /// Sum of the matched costs, accumulated in ascending row order.
    double total = 0.0;
};

/// Optimal assignment over allowed pairs.
///
/// Entries strictly above `forbid_above` are never paired. Among allowed
/// pairs the result first maximizes the number of matches, then minimizes
/// their total cost. Solved with the shortest-augmenting-path Hungarian method
/// on the square-padded matrix; ties resolve toward the lowest row index, then
/// the lowest column index, so results are platform independent.
Assignment assign(const CostMatrix& cost, std::optional<double> forbid_above = std::nullopt);

}  // namespace utr
