#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "utr/assignment.hpp"
#include "utr/rng.hpp"

using namespace utr;

namespace {

struct BruteForce {
    std::size_t matched = 0;
    double total = 0;
};

// Tries every injective map from the smaller side into the larger one.
BruteForce brute_force(const CostMatrix& c, std::optional<double> forbid_above) {
    const bool transpose = c.rows() > c.cols();
    const std::size_t small = transpose ? c.cols() : c.rows();
    const std::size_t large = transpose ? c.rows() : c.cols();
    auto at = [&](std::size_t s, std::size_t l) { return transpose ? c(l, s) : c(s, l); };

    std::vector<std::size_t> perm(large);
    std::iota(perm.begin(), perm.end(), 0);
    BruteForce best{0, std::numeric_limits<double>::infinity()};
    do {
        std::size_t matched = 0;
        double total = 0;
        for (std::size_t s = 0; s < small; ++s) {
            const double v = at(s, perm[s]);
            if (forbid_above && v > *forbid_above) continue;
            ++matched;
            total += v;
        }
        if (matched > best.matched || (matched == best.matched && total < best.total)) best = {matched, total};
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (best.matched == 0) best.total = 0;
    return best;
}

}  // namespace

TEST_CASE("small examples") {
    auto a = assign(CostMatrix{{1, 2}, {2, 1}});
    CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}});
    CHECK(a.total == 2);

    a = assign(CostMatrix{{5}});
    CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}});
    CHECK(a.total == 5);

    a = assign(CostMatrix{{0, 9, 9}, {9, 0, 9}, {9, 9, 0}});
    CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}, {2, 2}});
    CHECK(a.total == 0);
}

TEST_CASE("empty and rectangular matrices") {
    CHECK(assign(CostMatrix(0, 3)).pairs.empty());
    CHECK(assign(CostMatrix(2, 0)).pairs.empty());

    const auto wide = assign(CostMatrix{{3, 1, 2}});
    CHECK(wide.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
    const auto tall = assign(CostMatrix{{3}, {1}, {2}});
    CHECK(tall.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{1, 0}});
}

TEST_CASE("forbidden pairs are never matched") {
    const CostMatrix c{{0.2, 0.9}, {0.95, 0.99}};
    const auto a = assign(c, 0.5);
    CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}});
    CHECK(a.total == doctest::Approx(0.2));

    // Cardinality wins over a cheaper single match.
    const CostMatrix d{{0.1, 0.4}, {0.45, 2.0}};
    const auto b = assign(d, 0.5);
    CHECK(b.pairs.size() == 2);
    CHECK(b.total == doctest::Approx(0.85));
}

TEST_CASE("ties resolve to the same answer every time") {
    const CostMatrix c(3, 3, 1.0);
    const auto a = assign(c);
    CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}, {2, 2}});
    CHECK(assign(c).pairs == a.pairs);
}

TEST_CASE("agrees with brute force on random matrices") {
    Rng rng(20240611);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 5));
        const auto m = static_cast<std::size_t>(rng.uniform_int(1, 5));
        CostMatrix c(n, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) c(i, j) = static_cast<double>(rng.uniform_int(0, 20)) / 4.0;
        const std::optional<double> forbid =
            trial % 2 ? std::optional<double>(static_cast<double>(rng.uniform_int(0, 20)) / 4.0) : std::nullopt;
        const auto got = assign(c, forbid);
        const auto want = brute_force(c, forbid);
        CHECK(got.pairs.size() == want.matched);
        CHECK(got.total == want.total);
        for (const auto& [r, col] : got.pairs) {
            if (forbid) CHECK(c(r, col) <= *forbid);
        }
    }
}
