#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "knapcount/knap01.hpp"
#include "knapcount/numeric.hpp"

namespace knapcount {

struct IntKnapsackInstance {
    std::vector<Int> a;
    std::vector<Int> u; // x_i ranges over {0..u_i}
    Int b = 0;

    int size() const { return static_cast<int>(a.size()); }

    // W = sum(a_i u_i) + b
    Int total_weight() const {
        Int w = b;
        for (std::size_t i = 0; i < a.size(); ++i) w += a[i] * u[i];
        return w;
    }

    Int box_size() const {
        Int prod = 1;
        for (const Int& ui : u) prod *= ui + 1;
        return prod;
    }

    void validate() const {
        if (a.size() != u.size()) throw input_error("integer knapsack: |a| and |u| differ");
        if (b < 0) throw input_error("integer knapsack: negative capacity");
        for (const Int& ai : a)
            if (ai < 0) throw input_error("integer knapsack: negative weight");
        for (const Int& ui : u)
            if (ui < 0) throw input_error("integer knapsack: negative range");
    }
};

// Interval ROBP approximating the integer knapsack. Layer i keeps breakpoint
// partial sums (ascending) with exact accepting counts over the suffix box
// (implicit denominator prod_{j>i}(u_j+1)); edges out of a kept state are
// stored succinctly as label intervals [lo..hi] per kept target, with the
// rejecting sentinel as target -1.
class IntervalRoundedProgram {
public:
    struct Layer {
        std::vector<Int> sums;
        std::vector<Int> counts;
    };
    struct EdgeInterval {
        std::int32_t target; // index into the next layer's kept list, -1 = reject
        Int lo, hi;          // inclusive label range
    };

    IntervalRoundedProgram(IntKnapsackInstance inst, Rational eta, std::vector<Layer> layers,
                           std::vector<std::vector<std::vector<EdgeInterval>>> edges)
        : inst_(std::move(inst)), eta_(std::move(eta)), layers_(std::move(layers)),
          edges_(std::move(edges)) {}

    const IntKnapsackInstance& instance() const { return inst_; }
    const Rational& eta() const { return eta_; }
    int length() const { return inst_.size(); }
    const Layer& layer(int i) const { return layers_[i]; }
    Int root_count() const { return layers_[0].counts[0]; }
    std::size_t width(int i) const { return layers_[i].sums.size(); }

    std::size_t max_width() const {
        std::size_t w = 0;
        for (const Layer& l : layers_) w = std::max(w, l.sums.size());
        return w;
    }

    // Stored succinct edges of state `s` in layer i (labels read x_{i+1}).
    const std::vector<EdgeInterval>& edges(int i, std::size_t s) const { return edges_[i][s]; }

    bool accepts(const std::vector<Int>& x) const {
        const int n = inst_.size();
        if (x.size() != static_cast<std::size_t>(n))
            throw input_error("IntervalRoundedProgram::accepts: input length mismatch");
        std::int32_t state = 0;
        for (int i = 0; i < n; ++i) {
            if (x[i] < 0 || x[i] > inst_.u[i])
                throw input_error("IntervalRoundedProgram::accepts: label out of range");
            const auto& ivs = edges_[i][state];
            state = -1;
            for (const EdgeInterval& iv : ivs)
                if (iv.lo <= x[i] && x[i] <= iv.hi) {
                    state = iv.target;
                    break;
                }
            if (state < 0) return false;
        }
        return true;
    }

private:
    IntKnapsackInstance inst_;
    Rational eta_;
    std::vector<Layer> layers_;
    std::vector<std::vector<std::vector<EdgeInterval>>> edges_;
};

namespace detail {

template <class S, class C>
struct IntKnapBuilder {
    struct Layer {
        std::vector<S> sums;
        std::vector<C> counts;
    };

    const std::vector<S>& a;
    const std::vector<S>& u;
    S b;
    C thr_num, thr_den; // eta = p/q: thr_num = q+p, thr_den = q

    static bool mul_lt(const C& lhs, const C& lf, const C& rhs, const C& rf) {
        if constexpr (std::is_same_v<C, std::uint64_t>) {
            return static_cast<unsigned __int128>(lhs) * lf < static_cast<unsigned __int128>(rhs) * rf;
        } else {
            return lhs * lf < rhs * rf;
        }
    }

    // Count at partial sum v of layer i via the succinct-edge recursion:
    // sum over kept pieces of layer i+1 of |E(v,w)| * C(w). The kept list
    // partitions [w_t, e_t] with e_t the next breakpoint minus one (b for the
    // last); labels k with v + a k > b fall into the rejecting sentinel.
    C count_at(const Layer& next, const S& v, const S& weight, const S& range) const {
        if (v > b) return C(0);
        if (weight == S(0)) {
            auto it = std::upper_bound(next.sums.begin(), next.sums.end(), v);
            return next.counts[static_cast<std::size_t>(it - next.sums.begin()) - 1] * (C)(range + S(1));
        }
        // first piece: the one containing v itself
        auto it = std::upper_bound(next.sums.begin(), next.sums.end(), v);
        std::size_t t = static_cast<std::size_t>(it - next.sums.begin()) - 1;
        C acc = 0;
        for (; t < next.sums.size(); ++t) {
            const S start = next.sums[t];
            const S end = t + 1 < next.sums.size() ? next.sums[t + 1] - 1 : b;
            // k-range with v + weight*k in [start, end]
            S lo = start <= v ? S(0) : (start - v + weight - 1) / weight;
            S hi = (end - v) / weight;
            if (hi > range) hi = range;
            if (lo > hi) {
                if (lo > range) break;
                continue;
            }
            acc += next.counts[t] * (C)(hi - lo + S(1));
            if (hi == range) break;
        }
        return acc;
    }

    // Breakpoint selection (strict drop rule): keep v1 = 0, then binary search
    // (v_j, b+1] for the smallest v with 0 < C(v)*(q+p) < C(v_j)*q.
    Layer round_layer(const Layer& next, const S& weight, const S& range) const {
        Layer out;
        S v = 0;
        C c = count_at(next, v, weight, range);
        out.sums.push_back(v);
        out.counts.push_back(c);
        for (;;) {
            S lo = v, hi = b + 1;
            if (!mul_lt(count_at(next, hi, weight, range), thr_num, c, thr_den)) break;
            while (hi - lo > S(1)) {
                S mid = lo + (hi - lo) / 2;
                if (mul_lt(count_at(next, mid, weight, range), thr_num, c, thr_den))
                    hi = mid;
                else
                    lo = mid;
            }
            C ch = count_at(next, hi, weight, range);
            if (ch == C(0)) break;
            v = hi;
            c = ch;
            out.sums.push_back(v);
            out.counts.push_back(c);
        }
        return out;
    }

    std::vector<Layer> build() const {
        const int n = static_cast<int>(a.size());
        std::vector<Layer> layers(n + 1);
        layers[n].sums.push_back(S(0));
        layers[n].counts.push_back(C(1));
        for (int j = n - 1; j >= 1; --j)
            layers[j] = round_layer(layers[j + 1], a[j], u[j]);
        layers[0].sums.push_back(S(0));
        layers[0].counts.push_back(n == 0 ? C(1) : count_at(layers[1], S(0), a[0], u[0]));
        return layers;
    }

    // Succinct edges of kept state v in layer i: label intervals per kept
    // target of layer i+1, endpoints by integer division, rejecting tail last.
    std::vector<IntervalRoundedProgram::EdgeInterval>
    edge_intervals(const Layer& next, const S& v, const S& weight, const S& range) const {
        std::vector<IntervalRoundedProgram::EdgeInterval> out;
        if (weight == S(0)) {
            if (v > b) {
                out.push_back({-1, Int(0), Int(range)});
            } else {
                auto it = std::upper_bound(next.sums.begin(), next.sums.end(), v);
                out.push_back({static_cast<std::int32_t>(it - next.sums.begin()) - 1, Int(0), Int(range)});
            }
            return out;
        }
        S covered = 0; // next unassigned label
        auto it = std::upper_bound(next.sums.begin(), next.sums.end(), v);
        if (v <= b) {
            std::size_t t = static_cast<std::size_t>(it - next.sums.begin()) - 1;
            for (; t < next.sums.size() && covered <= range; ++t) {
                const S end = t + 1 < next.sums.size() ? next.sums[t + 1] - 1 : b;
                if (end < v) continue;
                S hi = (end - v) / weight;
                if (hi > range) hi = range;
                if (hi < covered) continue;
                out.push_back({static_cast<std::int32_t>(t), Int(covered), Int(hi)});
                covered = hi + 1;
            }
        }
        if (covered <= range) out.push_back({-1, Int(covered), Int(range)});
        return out;
    }
};

template <class S, class C>
IntervalRoundedProgram build_interval_impl(const IntKnapsackInstance& inst, const Rational& eta) {
    const int n = inst.size();
    std::vector<S> a(n), u(n);
    for (int i = 0; i < n; ++i) {
        a[i] = static_cast<S>(inst.a[i]);
        u[i] = static_cast<S>(inst.u[i]);
    }
    const Int q = denominator(eta), p = numerator(eta);
    IntKnapBuilder<S, C> builder{a, u, static_cast<S>(inst.b), static_cast<C>(q + p),
                                 static_cast<C>(q)};
    auto raw = builder.build();

    std::vector<IntervalRoundedProgram::Layer> layers(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (const S& s : raw[i].sums) layers[i].sums.emplace_back(s);
        for (const C& c : raw[i].counts) layers[i].counts.emplace_back(c);
    }
    std::vector<std::vector<std::vector<IntervalRoundedProgram::EdgeInterval>>> edges(n);
    Int stored = 0;
    for (int i = 0; i < n; ++i) {
        edges[i].resize(raw[i].sums.size());
        for (std::size_t s = 0; s < raw[i].sums.size(); ++s) {
            edges[i][s] = builder.edge_intervals(raw[i + 1], raw[i].sums[s], a[i], u[i]);
            stored += Int(edges[i][s].size());
        }
        check_budget(stored, 96, "build_interval_approx");
    }
    return IntervalRoundedProgram(inst, eta, std::move(layers), std::move(edges));
}

} // namespace detail

// Backward rounding: M^0 with per-layer tolerance eta and succinct
// interval edges; memory scales with the breakpoint counts, never with max u_i.
inline IntervalRoundedProgram build_interval_approx(const IntKnapsackInstance& inst,
                                                    const Rational& eta) {
    inst.validate();
    if (eta <= 0) throw input_error("build_interval_approx: eta must be positive");
    const Int box = inst.box_size();
    const bool sum64 = inst.total_weight() + 2 < (Int(1) << 62);
    const bool count128 = box < (Int(1) << 94) && denominator(eta) + numerator(eta) < (Int(1) << 28);
    const bool count64 = box < (Int(1) << 40) && denominator(eta) + numerator(eta) < (Int(1) << 20);
    if (sum64 && count64)
        return detail::build_interval_impl<std::uint64_t, std::uint64_t>(inst, eta);
    if (sum64 && count128)
        return detail::build_interval_impl<std::uint64_t, unsigned __int128>(inst, eta);
    if (sum64) return detail::build_interval_impl<std::uint64_t, Int>(inst, eta);
    return detail::build_interval_impl<Int, Int>(inst, eta);
}

// Returns N = P_{M^0}(s) * prod(u_i + 1) as an exact integer with
// |KNAP(a,b,u)| <= N <= (1+delta) |KNAP(a,b,u)|.
inline Int approx_count_int(const IntKnapsackInstance& inst, const Rational& delta) {
    inst.validate();
    if (delta <= 0 || delta > 1) throw input_error("approx_count_int: delta must lie in (0,1]");
    const int n = inst.size();
    if (n == 0) return 1;
    return build_interval_approx(inst, layer_epsilon(delta, n)).root_count();
}

// Exact |KNAP(a,b,u)| by sparse DP over distinct reachable clamped partial
// sums; test oracle with a work budget.
inline Int exact_count_int(const IntKnapsackInstance& inst) {
    inst.validate();
    const Int clamp = inst.b + 1;
    std::map<Int, Int> cur{{Int(0), Int(1)}};
    Int work = 0;
    for (int i = 0; i < inst.size(); ++i) {
        std::map<Int, Int> next;
        for (const auto& [s, cnt] : cur) {
            if (s == clamp) { // stays clamped whatever k is chosen
                next[clamp] += cnt * (inst.u[i] + 1);
                continue;
            }
            if (inst.a[i] == 0) {
                next[s] += cnt * (inst.u[i] + 1);
                continue;
            }
            // k with s + a k <= b contribute distinct sums, the rest clamp
            Int k_max = floor_div(inst.b - s, inst.a[i]);
            if (k_max > inst.u[i]) k_max = inst.u[i];
            for (Int k = 0; k <= k_max; ++k) next[s + inst.a[i] * k] += cnt;
            if (k_max < inst.u[i]) next[clamp] += cnt * (inst.u[i] - k_max);
            work += k_max + 2;
            if (work > 100000000)
                throw capacity_error("exact_count_int: instance too large for the exact oracle");
        }
        cur = std::move(next);
        check_budget(Int(cur.size()), 128, "exact_count_int");
    }
    Int total = 0;
    for (const auto& [s, cnt] : cur)
        if (s <= inst.b) total += cnt;
    return total;
}

// Width bound for interval layers: live breakpoints <= 2 + ln(box)/ln(1+eta).
inline bool interval_width_within_bound(std::size_t width, const Rational& eta, const Int& box) {
    if (width <= 2) return true;
    const Int q = denominator(eta), p = numerator(eta);
    return pow_int(q + p, width - 2) <= pow_int(q, width - 2) * box;
}

} // namespace knapcount
