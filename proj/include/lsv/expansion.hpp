#pragma once

#include <utility>
#include <vector>

namespace lsv {

/// One operator insertion A_{n,k} in a Duhamel term.
struct Insertion {
    int n = 0;
    int k = 0;
    bool operator==(const Insertion&) const = default;
    auto operator<=>(const Insertion&) const = default;
};

/// Ordered insertions ((n_1,k_1),...,(n_j,k_j)); insertion 1 sits next to the
/// evaluation time t, insertion j next to maturity.
struct DysonTerm {
    std::vector<Insertion> insertions;
    /// Set when some column has k_i >= 2; such terms vanish identically.
    bool zero_operator = false;

    int depth() const noexcept { return static_cast<int>(insertions.size()); }
    bool operator==(const DysonTerm&) const = default;
};

/// All length-j sequences of pairs with column sums (n, k) and n_i + k_i >= 1,
/// in lexicographic order of the flattened pairs.
std::vector<std::vector<Insertion>> index_sets(int n, int k, int j);

/// Union of index_sets over j = 1..n+k, ordered by depth then lexicographically.
/// Terms with a k_i >= 2 column are kept but flagged zero_operator.
std::vector<DysonTerm> term_trees(int n, int k);

/// Terms of term_trees(n, k) that actually need evaluation.
std::vector<DysonTerm> live_terms(int n, int k);

struct OrderPlan {
    int order = 0;
    /// (n, k) pairs; the rho power of each entry equals k.
    std::vector<std::pair<int, int>> pairs;
};

/// Pairs (j, i - j) for i = 0..N, j = 0..i.
OrderPlan order_plan(int N);

}  // namespace lsv
