#pragma once

#include <utility>
#include <vector>

#include "knapcount/knap01.hpp"
#include "knapcount/monotone.hpp"
#include "knapcount/robp.hpp"

namespace knapcount {

struct MultiKnapsackInstance {
    std::vector<Knapsack01Instance> rows;

    int size() const { return rows.empty() ? 0 : rows.front().size(); }
    int constraints() const { return static_cast<int>(rows.size()); }

    void validate() const {
        if (rows.empty()) throw input_error("multiknapsack: need at least one constraint row");
        for (const Knapsack01Instance& row : rows) {
            row.validate();
            if (row.size() != size())
                throw input_error("multiknapsack: rows must share the variable count");
        }
    }
};

struct DyerRoundedInstance {
    MultiKnapsackInstance original;
    MultiKnapsackInstance rounded;

    std::vector<Int> rounded_row_weights() const {
        std::vector<Int> w;
        w.reserve(rounded.rows.size());
        for (const Knapsack01Instance& row : rounded.rows) w.push_back(row.total_weight());
        return w;
    }
};

// Dyer rounding: row weights scale to a'_ij = floor(n^2 a_ij / b_i) with
// b'_i = n^2. Items the original row already excludes on their own
// (a_ij > b_i, which covers every positive item of a b_i = 0 row) are pinned
// at n^2 + 1 so they stay excluded and the row weight stays bounded by
// n^3 + n^2 + n. Each rounded row contains the original solution set.
inline DyerRoundedInstance dyer_round(const MultiKnapsackInstance& inst) {
    inst.validate();
    const Int n2 = Int(inst.size()) * Int(inst.size());
    MultiKnapsackInstance rounded;
    rounded.rows.reserve(inst.rows.size());
    for (const Knapsack01Instance& row : inst.rows) {
        Knapsack01Instance out;
        out.b = n2;
        out.a.reserve(row.a.size());
        for (const Int& aij : row.a) {
            if (aij > row.b)
                out.a.push_back(n2 + 1);
            else if (aij == 0)
                out.a.push_back(Int(0));
            else
                out.a.push_back(floor_div(n2 * aij, row.b));
        }
        rounded.rows.push_back(std::move(out));
    }
    return DyerRoundedInstance{inst, std::move(rounded)};
}

// Explicit product program for the intersection of the rows' solution sets;
// states are reachable tuples of clamped partial sums.
inline Robp product_program(const MultiKnapsackInstance& inst) {
    inst.validate();
    std::vector<Robp> per_row;
    per_row.reserve(inst.rows.size());
    for (const Knapsack01Instance& row : inst.rows) per_row.push_back(exact_program(row));
    return intersect(per_row);
}

// Exact |intersection of the rows' solution sets| via the reachable product
// program; test/oracle use, budget-guarded by the product construction.
inline Int exact_count_multi(const MultiKnapsackInstance& inst) {
    return accept_count(product_program(inst));
}

struct MultiCountResult {
    Rational count;        // |U| * Pr_D[M=1]
    Int rounded_set_size;  // |U|
    Rational delta;        // per-row rounding accuracy actually used
    std::size_t max_width = 0; // widest layer of the intersected upper program
};

// Full pipeline: dyer-round, count the rounded intersection exactly, re-weigh the
// original constraints under the uniform-over-rounded-solutions source, and
// intersect the per-row upper approximators. true <= count <= (1+eps) * true.
inline MultiCountResult count_multi_detailed(const MultiKnapsackInstance& inst, const Rational& eps) {
    inst.validate();
    if (eps <= 0 || eps > 1) throw input_error("count_multi: eps must lie in (0,1]");
    const int n = inst.size();
    const int k = inst.constraints();
    if (n == 0) return {Rational(1), Int(1), eps};

    const Int scale = Int(2) * k * pow_int(Int(n) + 1, static_cast<unsigned long>(k));
    if (scale > (Int(1) << 60))
        throw capacity_error("count_multi: k(n+1)^k too large; constraint count beyond desk scale");
    const Rational delta = eps / Rational(scale);

    const DyerRoundedInstance dyer = dyer_round(inst);
    const Robp u_prog = product_program(dyer.rounded);
    const Int u_size = accept_count(u_prog); // >= 1, zero vector always feasible
    const SmallSpaceSource d = uniform_accept_source(u_prog);

    std::vector<Robp> upper;
    upper.reserve(inst.rows.size());
    for (const Knapsack01Instance& row : inst.rows) {
        Knapsack01Space space(row);
        upper.push_back(round_under_source(space, d, delta).to_robp());
    }
    const Robp joint = intersect(upper);
    return {Rational(u_size) * eval_prob(joint, d), u_size, delta, joint.max_width()};
}

inline Rational count_multi(const MultiKnapsackInstance& inst, const Rational& eps) {
    return count_multi_detailed(inst, eps).count;
}

} // namespace knapcount
