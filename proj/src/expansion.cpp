#include "lsv/expansion.hpp"

#include "lsv/error.hpp"

namespace lsv {

namespace {

// Depth-first enumeration keeps the output lexicographic without sorting.
void enumerate(int n, int k, int slots, std::vector<Insertion>& prefix,
               std::vector<std::vector<Insertion>>& out) {
    if (slots == 0) {
        if (n == 0 && k == 0) out.push_back(prefix);
        return;
    }
    // Every remaining column needs n_i + k_i >= 1.
    if (n + k < slots) return;
    for (int a = 0; a <= n; ++a) {
        for (int b = 0; b <= k; ++b) {
            if (a + b == 0) continue;
            prefix.push_back({a, b});
            enumerate(n - a, k - b, slots - 1, prefix, out);
            prefix.pop_back();
        }
    }
}

}  // namespace

std::vector<std::vector<Insertion>> index_sets(int n, int k, int j) {
    if (n < 0 || k < 0 || n + k < 1) throw InvalidArgument("index_sets requires n, k >= 0 and n + k >= 1");
    if (j < 1 || j > n + k) throw InvalidArgument("index_sets requires 1 <= j <= n + k");
    std::vector<std::vector<Insertion>> out;
    std::vector<Insertion> prefix;
    prefix.reserve(static_cast<std::size_t>(j));
    enumerate(n, k, j, prefix, out);
    return out;
}

std::vector<DysonTerm> term_trees(int n, int k) {
    if (n < 0 || k < 0 || n + k < 1) throw InvalidArgument("term_trees requires n, k >= 0 and n + k >= 1");
    std::vector<DysonTerm> out;
    for (int j = 1; j <= n + k; ++j) {
        for (auto& seq : index_sets(n, k, j)) {
            DysonTerm term{std::move(seq), false};
            for (const auto& ins : term.insertions)
                if (ins.k >= 2) term.zero_operator = true;
            out.push_back(std::move(term));
        }
    }
    return out;
}

std::vector<DysonTerm> live_terms(int n, int k) {
    std::vector<DysonTerm> out;
    for (auto& term : term_trees(n, k))
        if (!term.zero_operator) out.push_back(std::move(term));
    return out;
}

OrderPlan order_plan(int N) {
    if (N < 0) throw InvalidArgument("order must be non-negative");
    OrderPlan plan;
    plan.order = N;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= i; ++j) plan.pairs.emplace_back(j, i - j);
    return plan;
}

}  // namespace lsv
