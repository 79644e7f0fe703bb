#include <doctest.h>

#include <algorithm>
#include <set>

#include "lsv/error.hpp"
#include "lsv/expansion.hpp"

using namespace lsv;

namespace {

using Seq = std::vector<Insertion>;

// Every j-tuple of pairs with entries in [0,n] x [0,k], filtered.
std::set<Seq> brute_force(int n, int k, int j) {
    std::set<Seq> out;
    const int base_n = n + 1, base_k = k + 1;
    long total = 1;
    for (int q = 0; q < j; ++q) total *= base_n * base_k;
    for (long code = 0; code < total; ++code) {
        Seq s;
        long c = code;
        int sn = 0, sk = 0;
        bool ok = true;
        for (int q = 0; q < j; ++q) {
            const int a = static_cast<int>(c % base_n);
            c /= base_n;
            const int b = static_cast<int>(c % base_k);
            c /= base_k;
            if (a + b == 0) ok = false;
            sn += a;
            sk += b;
            s.push_back({a, b});
        }
        if (ok && sn == n && sk == k) out.insert(s);
    }
    return out;
}

long binom(int n, int k) {
    long b = 1;
    for (int q = 1; q <= k; ++q) b = b * (n - k + q) / q;
    return b;
}

std::set<Seq> as_set(const std::vector<DysonTerm>& terms) {
    std::set<Seq> s;
    for (const auto& t : terms) s.insert(t.insertions);
    return s;
}

}  // namespace

TEST_CASE("small index sets") {
    const auto s = index_sets(1, 1, 2);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == Seq{{0, 1}, {1, 0}});
    CHECK(s[1] == Seq{{1, 0}, {0, 1}});
    CHECK(index_sets(2, 0, 1) == std::vector<Seq>{{{2, 0}}});
    CHECK(index_sets(2, 0, 2) == std::vector<Seq>{{{1, 0}, {1, 0}}});
    CHECK_THROWS_AS(index_sets(2, 0, 3), InvalidArgument);
    CHECK_THROWS_AS(index_sets(2, 0, 0), InvalidArgument);
}

TEST_CASE("index set sizes are compositions") {
    for (int n = 1; n <= 6; ++n)
        for (int j = 1; j <= n; ++j) {
            const auto s = index_sets(n, 0, j);
            CHECK(static_cast<long>(s.size()) == binom(n - 1, j - 1));
            CHECK(std::set<Seq>(s.begin(), s.end()) == brute_force(n, 0, j));
        }
}

TEST_CASE("index sets match brute force with correlation columns") {
    for (int n = 0; n <= 3; ++n)
        for (int k = 0; k <= 3; ++k) {
            if (n + k < 1) continue;
            for (int j = 1; j <= n + k; ++j) {
                const auto s = index_sets(n, k, j);
                CHECK(std::is_sorted(s.begin(), s.end()));
                CHECK(std::set<Seq>(s.begin(), s.end()) == brute_force(n, k, j));
                CHECK(std::set<Seq>(s.begin(), s.end()).size() == s.size());
            }
        }
}

TEST_CASE("term trees of the low orders") {
    const auto t11 = term_trees(1, 1);
    REQUIRE(t11.size() == 3);
    CHECK(t11[0].insertions == Seq{{1, 1}});
    CHECK(t11[1].insertions == Seq{{0, 1}, {1, 0}});
    CHECK(t11[2].insertions == Seq{{1, 0}, {0, 1}});
    const auto t01 = term_trees(0, 1);
    REQUIRE(t01.size() == 1);
    CHECK(t01[0].insertions == Seq{{0, 1}});
    const auto t30 = term_trees(3, 0);
    REQUIRE(t30.size() == 4);
    CHECK(t30[0].insertions == Seq{{3, 0}});
    CHECK(t30[1].insertions == Seq{{1, 0}, {2, 0}});
    CHECK(t30[2].insertions == Seq{{2, 0}, {1, 0}});
    CHECK(t30[3].insertions == Seq{{1, 0}, {1, 0}, {1, 0}});
}

TEST_CASE("term trees satisfy the Duhamel recursion") {
    // u_{n,k} = P A_{n,k} P phi + sum over first insertions (i,j) of A_{i,j} applied to u_{n-i,k-j}.
    for (int n = 0; n <= 5; ++n)
        for (int k = 0; k <= 5 - n; ++k) {
            if (n + k < 1) continue;
            std::set<Seq> expect{Seq{{n, k}}};
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= k; ++j) {
                    if (i + j == 0 || (i == n && j == k)) continue;
                    for (const auto& t : term_trees(n - i, k - j)) {
                        Seq s{{i, j}};
                        s.insert(s.end(), t.insertions.begin(), t.insertions.end());
                        expect.insert(s);
                    }
                }
            CHECK(as_set(term_trees(n, k)) == expect);
        }
}

TEST_CASE("correlation columns beyond one are flagged") {
    for (int N = 1; N <= 4; ++N)
        for (int k = 0; k <= N; ++k) {
            const int n = N - k;
            if (n + k < 1) continue;
            for (const auto& t : term_trees(n, k)) {
                const bool has_big = std::any_of(t.insertions.begin(), t.insertions.end(),
                                                 [](const Insertion& x) { return x.k >= 2; });
                CHECK(t.zero_operator == has_big);
            }
            for (const auto& t : live_terms(n, k))
                for (const auto& x : t.insertions) CHECK(x.k <= 1);
        }
}

TEST_CASE("order plans") {
    CHECK(order_plan(0).pairs == std::vector<std::pair<int, int>>{{0, 0}});
    const auto p2 = order_plan(2);
    CHECK(p2.pairs == std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}});
    for (int N = 0; N <= 6; ++N) CHECK(order_plan(N).pairs.size() == static_cast<std::size_t>((N + 1) * (N + 2) / 2));
    CHECK_THROWS_AS(order_plan(-1), InvalidArgument);
}
