#include "utr/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace utr {

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> init)
    : rows_(init.size()), cols_(init.size() ? init.begin()->size() : 0) {
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
        if (row.size() != cols_) throw std::invalid_argument("ragged cost matrix");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Assignment assign(const CostMatrix& cost, std::optional<double> forbid_above) {
    Assignment result;
    if (cost.empty()) return result;

    const std::size_t n = cost.rows();
    const std::size_t m = cost.cols();
    auto allowed = [&](std::size_t r, std::size_t c) {
        return !forbid_above || !(cost(r, c) > *forbid_above);
    };

    // Dummy and forbidden cells cost more than every allowed matching put
    // together, so the optimum maximizes cardinality before minimizing cost.
    double big = 1.0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c)
            if (allowed(r, c)) big += std::abs(cost(r, c));

    const std::size_t dim = std::max(n, m);
    auto padded = [&](std::size_t r, std::size_t c) {
        if (r >= n || c >= m || !allowed(r, c)) return big;
        return cost(r, c);
    };

    // Shortest augmenting path with potentials; 1-based, column 0 is the root.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(dim + 1, 0.0), v(dim + 1, 0.0);
    std::vector<std::size_t> match_of_col(dim + 1, 0), way(dim + 1, 0);
    for (std::size_t i = 1; i <= dim; ++i) {
        match_of_col[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(dim + 1, inf);
        std::vector<char> used(dim + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match_of_col[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= dim; ++j) {
                if (used[j]) continue;
                const double cur = padded(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= dim; ++j) {
                if (used[j]) {
                    u[match_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match_of_col[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match_of_col[j0] = match_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> col_of_row(n, dim);
    for (std::size_t j = 1; j <= dim; ++j) {
        const std::size_t r = match_of_col[j] - 1;
        if (r < n && j - 1 < m) col_of_row[r] = j - 1;
    }
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t c = col_of_row[r];
        if (c < m && allowed(r, c)) {
            result.pairs.emplace_back(r, c);
            result.total += cost(r, c);
        }
    }
    return result;
}

}  // namespace utr
