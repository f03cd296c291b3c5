#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "knapcount/knap01.hpp"
#include "knapcount/robp.hpp"

namespace knapcount {

// Implicitly described monotone ROBP. States are opaque Int
// encodings owned by the space. Per layer there is a strict total order with
// u before v implying A(u) is contained in A(v); the engine only touches the
// space through these calls, so the (possibly exponential) width is never
// materialized. Ordering and midpoint queries are treated as unit cost.
class MonotoneStateSpace {
public:
    using State = Int;

    virtual ~MonotoneStateSpace() = default;

    virtual int length() const = 0;
    virtual State start() const = 0;
    // State in layer `layer` reading bit -> state in layer+1.
    virtual State step(const State& s, int layer, bool bit) const = 0;
    // Accept label of a layer-n state.
    virtual bool accepting(const State& s) const = 0;
    // Negative iff u comes strictly before v in the layer's order.
    virtual int order_cmp(const State& u, const State& v, int layer) const = 0;
    // A state roughly half-way strictly between u and v, or nullopt when the
    // two are adjacent. Balance is within one element.
    virtual std::optional<State> midpoint(const State& u, const State& v, int layer) const = 0;
    virtual State order_least(int layer) const = 0;
    virtual State order_greatest(int layer) const = 0;
};

// The 0/1 knapsack constraint sum(a_i x_i) <= b as a monotone space: states
// are partial sums clamped at b+1, and larger sums come earlier in the order
// (they accept fewer suffixes).
class Knapsack01Space final : public MonotoneStateSpace {
public:
    explicit Knapsack01Space(Knapsack01Instance inst) : inst_(std::move(inst)) {
        inst_.validate();
        clamp_ = inst_.b + 1;
    }

    const Knapsack01Instance& instance() const { return inst_; }

    int length() const override { return inst_.size(); }
    State start() const override { return 0; }

    State step(const State& s, int layer, bool bit) const override {
        if (!bit) return s;
        State v = s + inst_.a[layer];
        return v > clamp_ ? clamp_ : v;
    }

    bool accepting(const State& s) const override { return s <= inst_.b; }

    int order_cmp(const State& u, const State& v, int) const override {
        if (u > v) return -1;
        if (u < v) return 1;
        return 0;
    }

    std::optional<State> midpoint(const State& u, const State& v, int) const override {
        const State& lo = u < v ? u : v;
        const State& hi = u < v ? v : u;
        if (hi - lo <= 1) return std::nullopt;
        return (lo + hi) / 2;
    }

    State order_least(int) const override { return clamp_; }
    State order_greatest(int) const override { return 0; }

private:
    Knapsack01Instance inst_;
    Int clamp_;
};

// The small explicit program M^0 produced by rounding an implicit monotone
// space under a source D. Layer i keeps the breakpoint union over source
// states (plus per-source zero-boundary markers) in order-descending
// position, with the exact acceptance value P_{M^0,u}(b) for every kept b and
// every source state u of that layer.
class SourcedRoundedProgram {
public:
    struct Layer {
        std::vector<Int> states;                 // order-descending
        std::vector<std::vector<Rational>> prob; // [state][source state]
        std::vector<std::size_t> per_source_kept;
    };

    SourcedRoundedProgram(const MonotoneStateSpace& space, SmallSpaceSource source, Rational eps,
                          Rational root, std::vector<Layer> layers)
        : space_(&space), source_(std::move(source)), eps_(std::move(eps)),
          root_(std::move(root)), layers_(std::move(layers)) {}

    const MonotoneStateSpace& space() const { return *space_; }
    const SmallSpaceSource& source() const { return source_; }
    const Rational& layer_epsilon() const { return eps_; }
    int length() const { return space_->length(); }

    const Layer& layer(int i) const { return layers_[i]; }

    // Pr_{x<-D}[M^0(x)=1]
    const Rational& root_probability() const { return root_; }

    std::size_t width(int i) const { return i == 0 ? 1 : layers_[i].states.size(); }

    std::size_t max_width() const {
        std::size_t w = 1;
        for (int i = 1; i <= length(); ++i) w = std::max(w, width(i));
        return w;
    }

    // Index of the order-least kept state at or above w (upward edge rounding).
    std::size_t round_up_index(int layer, const Int& w) const {
        const auto& kept = layers_[layer].states;
        // kept is descending: predicate "kept[t] at or above w" holds for a prefix
        std::size_t lo = 0, hi = kept.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (space_->order_cmp(w, kept[mid], layer) <= 0)
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

    bool accepts(const std::vector<bool>& x) const {
        const int n = length();
        if (x.size() != static_cast<std::size_t>(n))
            throw input_error("SourcedRoundedProgram::accepts: input length mismatch");
        Int v = space_->start();
        for (int i = 0; i < n; ++i) {
            Int w = space_->step(v, i, x[i]);
            v = layers_[i + 1].states[round_up_index(i + 1, w)];
        }
        return space_->accepting(v);
    }

    // Materialize the explicit program (states = kept breakpoints).
    Robp to_robp() const {
        const int n = length();
        std::vector<std::vector<Robp::Transition>> trans(n);
        std::vector<Int> cur{space_->start()};
        for (int i = 0; i < n; ++i) {
            trans[i].resize(cur.size());
            
            for (std::size_t s = 0; s < cur.size(); ++s)
                for (int b = 0; b < 2; ++b)
                    trans[i][s].next[b] = static_cast<std::uint32_t>(
                        round_up_index(i + 1, space_->step(cur[s], i, b != 0)));
            cur = layers_[i + 1].states;
        }
        std::vector<std::uint8_t> accept(cur.size());
        for (std::size_t s = 0; s < cur.size(); ++s) accept[s] = space_->accepting(cur[s]) ? 1 : 0;
        return Robp(n, std::move(trans), std::move(accept));
    }

private:
    const MonotoneStateSpace* space_;
    SmallSpaceSource source_;
    Rational eps_;
    Rational root_;
    std::vector<Layer> layers_;
};

namespace detail {

class SourcedRounder {
public:
    SourcedRounder(const MonotoneStateSpace& space, const SmallSpaceSource& d, const Rational& eps)
        : space_(space), d_(d), eps_(eps), thr_num_(denominator(eps) + numerator(eps)),
          thr_den_(denominator(eps)) {}

    SourcedRoundedProgram run() {
        const int n = space_.length();
        layers_.resize(n + 1);
        for (int j = n; j >= 1; --j) round_layer(j);
        Rational root = prob_at(0, space_.start(), 0);
        return SourcedRoundedProgram(space_, d_, eps_, std::move(root), std::move(layers_));
    }

private:
    using Layer = SourcedRoundedProgram::Layer;

    const MonotoneStateSpace& space_;
    const SmallSpaceSource& d_;
    Rational eps_;
    Int thr_num_, thr_den_;
    std::vector<Layer> layers_;
    std::map<std::pair<Int, std::size_t>, Rational> memo_; // per layer being rounded

    // P_{M^{j+1},u}(v) for v in layer j: exact recursion over the already
    // rounded layer j+1.
    Rational prob_at(int j, const Int& v, std::size_t u) {
        if (j == space_.length()) return space_.accepting(v) ? 1 : 0;
        Rational acc = 0;
        for (int z = 0; z < 2; ++z) {
            const auto& e = d_.edges(j, u)[z];
            if (e.prob == 0) continue;
            Int w = space_.step(v, j, z != 0);
            std::size_t t = round_up(j + 1, w);
            acc += e.prob * layers_[j + 1].prob[t][static_cast<std::size_t>(e.target)];
        }
        return acc;
    }

    Rational memo_prob(int j, const Int& v, std::size_t u) {
        auto key = std::make_pair(v, u);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        Rational r = prob_at(j, v, u);
        memo_.emplace(std::move(key), r);
        return r;
    }

    std::size_t round_up(int layer, const Int& w) const {
        const auto& kept = layers_[layer].states;
        std::size_t lo = 0, hi = kept.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (space_.order_cmp(w, kept[mid], layer) <= 0)
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

    Int checked_midpoint_probe(const Int& lo, const Int& hi, int layer,
                               std::optional<Int>&& mid) const {
        if (!mid) throw oracle_contract_error("midpoint returned adjacent for a non-adjacent pair");
        if (!(space_.order_cmp(lo, *mid, layer) < 0 && space_.order_cmp(*mid, hi, layer) < 0))
            throw oracle_contract_error("midpoint not strictly between its arguments");
        return std::move(*mid);
    }

    // Largest (order-wise) state strictly before `hi` satisfying the monotone
    // downward-closed predicate; `lo` is known to satisfy it.
    template <class Pred>
    Int bisect_max(Int lo, Int hi, int layer, Pred pred) {
        for (;;) {
            std::optional<Int> mid = space_.midpoint(lo, hi, layer);
            if (!mid) return lo;
            Int m = checked_midpoint_probe(lo, hi, layer, std::move(mid));
            if (pred(m))
                lo = std::move(m);
            else
                hi = std::move(m);
        }
    }

    void round_layer(int j) {
        memo_.clear();
        const std::size_t n_sources = d_.width(j);
        const Int least = space_.order_least(j);
        const Int greatest = space_.order_greatest(j);
        const bool degenerate = space_.order_cmp(least, greatest, j) == 0; // width-1 layer

        auto desc = [&](const Int& x, const Int& y) { return space_.order_cmp(y, x, j) < 0; };
        std::set<Int, decltype(desc)> kept(desc);
        std::vector<std::size_t> per_source(n_sources, 0);

        for (std::size_t u = 0; u < n_sources; ++u) {
            Int cur = greatest;
            Rational p_cur = memo_prob(j, cur, u);
            kept.insert(cur);
            ++per_source[u];

            if (!degenerate && p_cur > 0) {
                // breakpoint scan with the knap01 tie rule: next breakpoint is the
                // order-max v before cur with 0 < P(v)*(q+p) <= P(cur)*q.
                for (;;) {
                    auto pred = [&](const Int& v) {
                        const Rational p = memo_prob(j, v, u);
                        return numerator(p) * denominator(p_cur) * thr_num_ <=
                               numerator(p_cur) * denominator(p) * thr_den_;
                    };
                    if (space_.order_cmp(least, cur, j) >= 0) break;
                    if (!pred(least)) break; // nothing drops below the threshold
                    Int v = bisect_max(least, cur, j, pred);
                    Rational p_v = memo_prob(j, v, u);
                    if (p_v == 0) break; // zero region reached
                    kept.insert(v);
                    ++per_source[u];
                    cur = std::move(v);
                    p_cur = std::move(p_v);
                }
            }

            // Zero-boundary marker: the order-max state with P_u = 0, so that
            // upward rounding never lifts a zero-probability edge target into
            // the positive region under u.
            if (!degenerate && p_cur > 0 && memo_prob(j, least, u) == 0) {
                Int z = bisect_max(least, cur, j,
                                   [&](const Int& v) { return memo_prob(j, v, u) == 0; });
                if (kept.insert(z).second) ++per_source[u];
            }
        }

        Layer layer;
        layer.states.assign(kept.begin(), kept.end());
        layer.per_source_kept = std::move(per_source);
        layer.prob.resize(layer.states.size());
        for (std::size_t t = 0; t < layer.states.size(); ++t) {
            layer.prob[t].resize(n_sources);
            for (std::size_t u = 0; u < n_sources; ++u)
                layer.prob[t][u] = memo_prob(j, layer.states[t], u);
        }
        layers_[j] = std::move(layer);
    }
};

} // namespace detail

// Rounds the implicit space into an explicit program with pointwise
// M(z) <= M^0(z) and Pr_D[M^0=1] <= (1+delta) Pr_D[M=1].
inline SourcedRoundedProgram round_under_source(const MonotoneStateSpace& space,
                                                const SmallSpaceSource& d, const Rational& delta) {
    if (space.length() != d.length())
        throw input_error("round_under_source: space and source layer counts differ");
    if (delta <= 0 || delta > 1) throw input_error("round_under_source: delta must lie in (0,1]");
    const int n = space.length();
    const Rational eps = n == 0 ? delta : layer_epsilon(delta, n);
    return detail::SourcedRounder(space, d, eps).run();
}

// mu(A) <= result <= (1+delta) mu(A) for A the accept set.
inline Rational count_under_source(const MonotoneStateSpace& space, const SmallSpaceSource& d,
                                   const Rational& delta) {
    return round_under_source(space, d, delta).root_probability();
}

// Per-source breakpoint budget: 2 + log_{1+eps}(1/q) where q is a lower bound
// on the minimum positive path probability of D, asserted exactly.
inline bool per_source_width_within_bound(std::size_t kept, const Rational& eps,
                                          const SmallSpaceSource& d) {
    if (kept <= 2) return true;
    Rational q_min = 1;
    for (int i = 0; i < d.length(); ++i) {
        Rational layer_min = 1;
        bool seen = false;
        for (std::size_t s = 0; s < d.width(i); ++s)
            for (int z = 0; z < 2; ++z) {
                const auto& e = d.edges(i, s)[z];
                if (e.prob > 0 && (!seen || e.prob < layer_min)) {
                    layer_min = e.prob;
                    seen = true;
                }
            }
        if (seen) q_min *= layer_min;
    }
    // (1+eps)^(kept-2) <= 1/q_min
    const Int p = numerator(eps), q = denominator(eps);
    return pow_int(q + p, kept - 2) * numerator(q_min) <= pow_int(q, kept - 2) * denominator(q_min);
}

} // namespace knapcount
