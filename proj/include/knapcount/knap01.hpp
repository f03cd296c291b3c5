#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "knapcount/numeric.hpp"
#include "knapcount/rng.hpp"
#include "knapcount/robp.hpp"

namespace knapcount {

struct Knapsack01Instance {
    std::vector<Int> a;
    Int b = 0;

    int size() const { return static_cast<int>(a.size()); }

    // W = sum(a) + b
    Int total_weight() const {
        Int w = b;
        for (const Int& ai : a) w += ai;
        return w;
    }

    void validate() const {
        if (b < 0) throw input_error("knapsack: negative capacity");
        for (const Int& ai : a)
            if (ai < 0) throw input_error("knapsack: negative weight");
    }
};

// Rounded approximating program M^0. Layer i holds the kept breakpoints as
// ascending partial sums with their accepting-suffix counts (implicit
// denominator 2^(n-i)); counts are strictly decreasing within a layer. The
// rejecting sentinel (all sums > b) is implicit: lookups past b report count 0.
class RoundedProgram {
public:
    struct Layer {
        std::vector<Int> sums;
        std::vector<Int> counts;
    };

    RoundedProgram(Knapsack01Instance inst, Rational eps, std::vector<Layer> layers)
        : inst_(std::move(inst)), eps_(std::move(eps)), layers_(std::move(layers)) {}

    int length() const { return inst_.size(); }
    const Knapsack01Instance& instance() const { return inst_; }
    const Rational& layer_epsilon() const { return eps_; }
    const Layer& layer(int i) const { return layers_[i]; }

    Int root_count() const { return layers_[0].counts[0]; }

    std::size_t width(int i) const { return layers_[i].sums.size(); }

    std::size_t max_width() const {
        std::size_t w = 0;
        for (const Layer& l : layers_) w = std::max(w, l.sums.size());
        return w;
    }

    // Count at an arbitrary partial sum of layer i, after rounding down to the
    // kept breakpoint representing it. Sums past b land on the sentinel.
    Int count_at(int i, const Int& sum) const {
        if (sum > inst_.b) return 0;
        const auto& s = layers_[i].sums;
        auto it = std::upper_bound(s.begin(), s.end(), sum);
        return layers_[i].counts[static_cast<std::size_t>(it - s.begin()) - 1];
    }

    // Membership in A_{M^0}: walk the rounded program.
    bool accepts(const std::vector<bool>& x) const {
        if (x.size() != static_cast<std::size_t>(inst_.size()))
            throw input_error("RoundedProgram::accepts: input length mismatch");
        Int v = 0;
        for (int i = 0; i < inst_.size(); ++i) {
            Int s = v;
            if (x[i]) s += inst_.a[i];
            if (s > inst_.b) return false;
            const auto& sums = layers_[i + 1].sums;
            auto it = std::upper_bound(sums.begin(), sums.end(), s);
            v = sums[static_cast<std::size_t>(it - sums.begin()) - 1];
        }
        return true;
    }

private:
    Knapsack01Instance inst_;
    Rational eps_;
    std::vector<Layer> layers_;
};

namespace detail {

// Backward rounding pass, parameterized on the partial-sum and count types so
// that desk-size instances run on machine words. All arithmetic is exact in
// every instantiation; the kept breakpoints are identical across types.
template <class S, class C>
struct Knap01Builder {
    struct Layer {
        std::vector<S> sums;   // ascending, all counts > 0
        std::vector<C> counts; // strictly decreasing
    };

    const std::vector<S>& a;
    S b;
    C thr_num; // eps = p/q: new breakpoint when count*(q+p) <= prev*q
    C thr_den;

    C lookup(const Layer& l, const S& sum) const {
        if (sum > b) return C(0);
        auto it = std::upper_bound(l.sums.begin(), l.sums.end(), sum);
        return l.counts[static_cast<std::size_t>(it - l.sums.begin()) - 1];
    }

    C count_at(const Layer& next, const S& v, const S& weight) const {
        return lookup(next, v) + lookup(next, v + weight);
    }

    static bool mul_leq(const C& lhs, const C& lf, const C& rhs, const C& rf) {
        if constexpr (std::is_same_v<C, std::uint64_t>) {
            return static_cast<unsigned __int128>(lhs) * lf <= static_cast<unsigned __int128>(rhs) * rf;
        } else {
            return lhs * lf <= rhs * rf;
        }
    }

    // Breakpoint selection for one layer: keep v1 = 0, then repeatedly binary
    // search (v_j, b+1] for the smallest v with 0 < C(v) <= C(v_j)*q/(q+p).
    Layer round_layer(const Layer& next, const S& weight) const {
        Layer out;
        S v = 0;
        C c = count_at(next, v, weight);
        out.sums.push_back(v);
        out.counts.push_back(c);
        for (;;) {
            // pred(x) = C(x)*(q+p) <= C(v_j)*q, monotone in x
            S lo = v, hi = b + 1;
            if (!mul_leq(count_at(next, hi, weight), thr_num, c, thr_den)) break;
            while (hi - lo > 1) {
                S mid = lo + (hi - lo) / 2;
                if (mul_leq(count_at(next, mid, weight), thr_num, c, thr_den))
                    hi = mid;
                else
                    lo = mid;
            }
            C ch = count_at(next, hi, weight);
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
            layers[j] = round_layer(layers[j + 1], a[j]);
        layers[0].sums.push_back(S(0));
        layers[0].counts.push_back(n == 0 ? C(1) : count_at(layers[1], S(0), a[0]));
        return layers;
    }
};

template <class S, class C>
std::vector<RoundedProgram::Layer> build_layers(const Knapsack01Instance& inst, const Rational& eps) {
    std::vector<S> a(inst.a.size());
    for (std::size_t i = 0; i < inst.a.size(); ++i) a[i] = static_cast<S>(inst.a[i]);
    const Int q = denominator(eps), p = numerator(eps);
    Knap01Builder<S, C> builder{a, static_cast<S>(inst.b), static_cast<C>(q + p), static_cast<C>(q)};
    auto raw = builder.build();
    std::vector<RoundedProgram::Layer> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i].sums.reserve(raw[i].sums.size());
        out[i].counts.reserve(raw[i].counts.size());
        for (const S& s : raw[i].sums) out[i].sums.emplace_back(s);
        for (const C& c : raw[i].counts) out[i].counts.emplace_back(c);
    }
    return out;
}

} // namespace detail

// The rounded approximating program M^0 with per-layer tolerance eps = p/q > 0.
inline RoundedProgram build_approx(const Knapsack01Instance& inst, const Rational& eps) {
    inst.validate();
    if (eps <= 0) throw input_error("build_approx: eps must be positive");
    const int n = inst.size();
    const Int w_cap = inst.total_weight() + 2;
    const bool sum64 = w_cap < (Int(1) << 62);
    const bool count64 = n <= 62 && denominator(eps) + numerator(eps) < (Int(1) << 63);
    std::vector<RoundedProgram::Layer> layers;
    if (sum64 && count64)
        layers = detail::build_layers<std::uint64_t, std::uint64_t>(inst, eps);
    else if (sum64)
        layers = detail::build_layers<std::uint64_t, Int>(inst, eps);
    else
        layers = detail::build_layers<Int, Int>(inst, eps);
    return RoundedProgram(inst, eps, std::move(layers));
}

// Estimate N with |KNAP| <= N <= (1+delta)|KNAP|, as the exact
// integer 2^n * P_{M^0}(v0).
inline Int approx_count(const Knapsack01Instance& inst, const Rational& delta) {
    inst.validate();
    if (delta <= 0 || delta > 1) throw input_error("approx_count: delta must lie in (0,1]");
    const int n = inst.size();
    if (n == 0) return 1;
    return build_approx(inst, layer_epsilon(delta, n)).root_count();
}

// Exact |KNAP(a,b)| by DP over distinct reachable partial sums, clamped at
// b+1. Intended as a test oracle; fails with a capacity error when the
// reachable sum set outgrows the memory budget.
inline Int exact_count(const Knapsack01Instance& inst) {
    inst.validate();
    const Int clamp = inst.b + 1;
    std::vector<std::pair<Int, Int>> cur{{Int(0), Int(1)}}; // (sum, multiplicity), ascending
    for (const Int& ai : inst.a) {
        std::vector<std::pair<Int, Int>> merged;
        merged.reserve(cur.size() * 2);
        std::size_t i = 0, j = 0; // j walks the shifted copy
        while (i < cur.size() || j < cur.size()) {
            Int s_i = i < cur.size() ? cur[i].first : Int(-1);
            Int s_j;
            if (j < cur.size()) {
                s_j = cur[j].first + ai;
                if (s_j > clamp) s_j = clamp;
            }
            bool take_i = j >= cur.size() || (i < cur.size() && s_i <= s_j);
            Int s = take_i ? s_i : s_j;
            Int cnt = 0;
            if (i < cur.size() && cur[i].first == s) cnt += cur[i++].second;
            while (j < cur.size()) {
                Int shifted = cur[j].first + ai;
                if (shifted > clamp) shifted = clamp;
                if (shifted != s) break;
                cnt += cur[j++].second;
            }
            if (!merged.empty() && merged.back().first == s)
                merged.back().second += cnt;
            else
                merged.emplace_back(std::move(s), std::move(cnt));
        }
        cur = std::move(merged);
        check_budget(Int(cur.size()), 96, "exact_count");
    }
    Int total = 0;
    for (const auto& [s, cnt] : cur)
        if (s <= inst.b) total += cnt;
    return total;
}

// Explicit exact program over reachable clamped partial sums (the width-W
// program over partial sums, restricted to states the start can reach).
inline Robp exact_program(const Knapsack01Instance& inst) {
    inst.validate();
    const int n = inst.size();
    const Int clamp = inst.b + 1;
    std::vector<Int> layer{Int(0)};
    std::vector<std::vector<Robp::Transition>> trans(n);
    Int touched = 0;
    for (int i = 0; i < n; ++i) {
        std::map<Int, std::uint32_t> index;
        std::vector<Int> next_layer;
        trans[i].resize(layer.size());
        for (std::size_t s = 0; s < layer.size(); ++s) {
            for (int bit = 0; bit < 2; ++bit) {
                Int v = layer[s];
                if (bit) v += inst.a[i];
                if (v > clamp) v = clamp;
                auto [it, inserted] = index.emplace(std::move(v), static_cast<std::uint32_t>(next_layer.size()));
                if (inserted) next_layer.push_back(it->first);
                trans[i][s].next[bit] = it->second;
            }
        }
        touched += Int(next_layer.size());
        check_budget(touched, 64, "exact_program");
        layer = std::move(next_layer);
    }
    std::vector<std::uint8_t> accept(layer.size());
    for (std::size_t s = 0; s < layer.size(); ++s) accept[s] = layer[s] <= inst.b ? 1 : 0;
    return Robp(n, std::move(trans), std::move(accept));
}

namespace detail {

inline unsigned long ceil_log10(const Rational& inv) {
    // smallest t with 10^t >= inv
    unsigned long t = 0;
    Int power = 1;
    while (power * denominator(inv) < numerator(inv)) {
        power *= 10;
        ++t;
    }
    return t;
}

} // namespace detail

struct SampleStats {
    std::vector<std::vector<bool>> samples;
    std::uint64_t rejected_walks = 0;
};

// Rejection sampler: walk M^0 (built at delta = 1/10) by suffix counts, reject
// walks violating the constraint, retry up to ceil(log10(1/eta)) + 1 times per
// draw. Emitted strings are exactly uniform on KNAP(a,b); an exhausted draw
// raises sampling_failure instead of emitting anything.
inline SampleStats sample(const Knapsack01Instance& inst, std::uint64_t seed, std::size_t m,
                          const Rational& eta) {
    inst.validate();
    if (eta <= 0 || eta > 1) throw input_error("sample: eta must lie in (0,1]");
    const int n = inst.size();
    const RoundedProgram prog = build_approx(inst, layer_epsilon(Rational(1, 10), n == 0 ? 1 : n));
    const unsigned long retries = detail::ceil_log10(1 / eta) + 1;

    SampleStats out;
    out.samples.reserve(m);
    for (std::size_t draw = 0; draw < m; ++draw) {
        CounterRng rng{seed, 0x73616d706c653031ULL, draw};
        bool emitted = false;
        for (unsigned long attempt = 0; attempt < retries && !emitted; ++attempt) {
            std::vector<bool> x(n);
            Int v = 0;
            for (int i = 0; i < n; ++i) {
                Int s0 = v;
                Int s1 = v + inst.a[i];
                Int c0 = prog.count_at(i + 1, s0);
                Int c1 = prog.count_at(i + 1, s1);
                bool bit = rng.uniform_below(c0 + c1) >= c0;
                x[i] = bit;
                Int s = bit ? s1 : s0;
                const auto& sums = prog.layer(i + 1).sums;
                auto it = std::upper_bound(sums.begin(), sums.end(), s);
                v = sums[static_cast<std::size_t>(it - sums.begin()) - 1];
            }
            Int weight = 0;
            for (int i = 0; i < n; ++i)
                if (x[i]) weight += inst.a[i];
            if (weight <= inst.b) {
                out.samples.push_back(std::move(x));
                emitted = true;
            } else {
                ++out.rejected_walks;
            }
        }
        if (!emitted)
            throw sampling_failure(draw, "sample: draw " + std::to_string(draw) +
                                             " exhausted its rejection budget");
    }
    return out;
}

// Width-bound check for the constructed layers: live breakpoints never exceed
// 2 + n*ln2/ln(1+eps), asserted exactly as (1+eps)^(w-2) <= 2^n.
inline bool width_within_bound(std::size_t width, const Rational& eps, int n) {
    if (width <= 2) return true;
    const Int q = denominator(eps), p = numerator(eps);
    return pow_int(q + p, width - 2) <= pow_int(q, width - 2) * pow2(static_cast<unsigned long>(n));
}

} // namespace knapcount
