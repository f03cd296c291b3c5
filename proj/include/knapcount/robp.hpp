#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "knapcount/error.hpp"
#include "knapcount/numeric.hpp"
#include "knapcount/rng.hpp"

namespace knapcount {

// Explicit layered read-once branching program. Layer 0 holds the single
// start state; every state in layers 0..n-1 has a 0-edge and a 1-edge into
// the next layer; layer-n states carry accept labels. States are identified
// by (layer, index) with indices in insertion order.
class Robp {
public:
    struct Transition {
        std::uint32_t next[2];
    };

    Robp(int n, std::vector<std::vector<Transition>> transitions, std::vector<std::uint8_t> accept)
        : n_(n), trans_(std::move(transitions)), accept_(std::move(accept)) {
        if (n_ < 0) throw input_error("Robp: negative length");
        if (trans_.size() != static_cast<std::size_t>(n_))
            throw input_error("Robp: transition table must cover layers 0..n-1");
        if (n_ > 0 && trans_[0].size() != 1)
            throw input_error("Robp: layer 0 must contain exactly one state");
        if (n_ == 0 && accept_.size() != 1)
            throw input_error("Robp: layer 0 must contain exactly one state");
        for (int i = 0; i < n_; ++i) {
            const std::size_t next_width = i + 1 < n_ ? trans_[i + 1].size() : accept_.size();
            if (trans_[i].empty()) throw input_error("Robp: empty layer");
            for (const Transition& t : trans_[i])
                for (int b = 0; b < 2; ++b)
                    if (t.next[b] >= next_width)
                        throw input_error("Robp: transition leaves the next layer");
        }
    }

    static Robp constant(int n, bool value) {
        std::vector<std::vector<Transition>> trans(n, {Transition{{0, 0}}});
        return Robp(n, std::move(trans), {static_cast<std::uint8_t>(value ? 1 : 0)});
    }

    int length() const { return n_; }

    std::size_t width(int layer) const {
        return layer == n_ ? accept_.size() : trans_[layer].size();
    }

    std::size_t max_width() const {
        std::size_t w = accept_.size();
        for (const auto& layer : trans_)
            if (layer.size() > w) w = layer.size();
        return w;
    }

    const std::vector<Transition>& transitions(int layer) const { return trans_[layer]; }
    const std::vector<std::uint8_t>& accept_labels() const { return accept_; }
    bool accepting(std::uint32_t final_state) const { return accept_[final_state] != 0; }

    std::uint32_t next(int layer, std::uint32_t state, bool bit) const {
        return trans_[layer][state].next[bit ? 1 : 0];
    }

    bool eval(const std::vector<bool>& x) const {
        if (x.size() != static_cast<std::size_t>(n_))
            throw input_error("Robp::eval: input length does not match program length");
        std::uint32_t s = 0;
        for (int i = 0; i < n_; ++i) s = next(i, s, x[i]);
        return accepting(s);
    }

private:
    int n_;
    std::vector<std::vector<Transition>> trans_;
    std::vector<std::uint8_t> accept_;
};

// |A_M(v)| for every state, layer-major. Entry [i][s] counts accepting
// suffixes from state s of layer i; the root count over 2^n is P_M(v0).
using AcceptCounts = std::vector<std::vector<Int>>;

inline AcceptCounts accept_counts(const Robp& m) {
    const int n = m.length();
    AcceptCounts counts(n + 1);
    counts[n].reserve(m.width(n));
    for (std::size_t s = 0; s < m.width(n); ++s)
        counts[n].push_back(m.accepting(static_cast<std::uint32_t>(s)) ? 1 : 0);
    for (int i = n - 1; i >= 0; --i) {
        counts[i].resize(m.width(i));
        for (std::size_t s = 0; s < m.width(i); ++s) {
            const auto& t = m.transitions(i)[s];
            counts[i][s] = counts[i + 1][t.next[0]] + counts[i + 1][t.next[1]];
        }
    }
    return counts;
}

inline Int accept_count(const Robp& m) { return accept_counts(m)[0][0]; }

// Product program accepting the intersection of the inputs' accept sets.
// Only tuple states reachable from the joint start are materialized.
inline Robp intersect(const std::vector<const Robp*>& programs) {
    if (programs.empty()) throw input_error("intersect: need at least one program");
    const int n = programs.front()->length();
    for (const Robp* m : programs)
        if (m->length() != n) throw input_error("intersect: programs must share the layer count");
    const std::size_t k = programs.size();

    std::vector<std::vector<Robp::Transition>> trans(n);
    std::vector<std::vector<std::uint32_t>> layer{{std::vector<std::uint32_t>(k, 0)}};
    Int touched = 0;
    for (int i = 0; i < n; ++i) {
        std::map<std::vector<std::uint32_t>, std::uint32_t> index;
        std::vector<std::vector<std::uint32_t>> next_layer;
        trans[i].resize(layer.size());
        for (std::size_t s = 0; s < layer.size(); ++s) {
            for (int b = 0; b < 2; ++b) {
                std::vector<std::uint32_t> tuple(k);
                for (std::size_t j = 0; j < k; ++j)
                    tuple[j] = programs[j]->next(i, layer[s][j], b != 0);
                auto [it, inserted] = index.emplace(std::move(tuple), static_cast<std::uint32_t>(next_layer.size()));
                if (inserted) next_layer.push_back(it->first);
                trans[i][s].next[b] = it->second;
            }
        }
        touched += Int(next_layer.size());
        check_budget(touched, 64, "intersect");
        layer = std::move(next_layer);
    }
    std::vector<std::uint8_t> accept(layer.size());
    for (std::size_t s = 0; s < layer.size(); ++s) {
        bool all = true;
        for (std::size_t j = 0; j < k; ++j)
            all = all && programs[j]->accepting(layer[s][j]);
        accept[s] = all ? 1 : 0;
    }
    return Robp(n, std::move(trans), std::move(accept));
}

inline Robp intersect(const std::vector<Robp>& programs) {
    std::vector<const Robp*> ptrs;
    ptrs.reserve(programs.size());
    for (const Robp& m : programs) ptrs.push_back(&m);
    return intersect(ptrs);
}

// Layered graph generating a distribution over {0,1}^n by a random walk.
// Each state of layers 0..n-1 has two outgoing edges whose exact rational
// probabilities sum to 1; zero-probability edges may be absent (target -1).
class SmallSpaceSource {
public:
    struct Edge {
        std::int32_t target = -1;
        Rational prob{};
    };
    using StateEdges = std::array<Edge, 2>;

    SmallSpaceSource(int n, std::vector<std::vector<StateEdges>> edges, std::size_t final_width)
        : n_(n), edges_(std::move(edges)), final_width_(final_width) {
        if (n_ < 0) throw input_error("SmallSpaceSource: negative length");
        if (edges_.size() != static_cast<std::size_t>(n_))
            throw input_error("SmallSpaceSource: edge table must cover layers 0..n-1");
        if (n_ > 0 && edges_[0].size() != 1)
            throw input_error("SmallSpaceSource: layer 0 must contain exactly one state");
        if (n_ == 0 && final_width_ != 1)
            throw input_error("SmallSpaceSource: layer 0 must contain exactly one state");
        for (int i = 0; i < n_; ++i) {
            const std::size_t next_width = i + 1 < n_ ? edges_[i + 1].size() : final_width_;
            for (const StateEdges& se : edges_[i]) {
                Rational total = 0;
                for (const Edge& e : se) {
                    if (e.prob < 0 || e.prob > 1)
                        throw input_error("SmallSpaceSource: edge probability outside [0,1]");
                    if (e.prob > 0 && (e.target < 0 || static_cast<std::size_t>(e.target) >= next_width))
                        throw input_error("SmallSpaceSource: live edge leaves the next layer");
                    total += e.prob;
                }
                if (total != 1)
                    throw input_error("SmallSpaceSource: state probabilities must sum to exactly 1");
            }
        }
    }

    int length() const { return n_; }

    std::size_t width(int layer) const {
        return layer == n_ ? final_width_ : edges_[layer].size();
    }

    std::size_t max_width() const {
        std::size_t w = final_width_;
        for (const auto& layer : edges_)
            if (layer.size() > w) w = layer.size();
        return w;
    }

    const StateEdges& edges(int layer, std::size_t state) const { return edges_[layer][state]; }

    std::vector<bool> sample(CounterRng& rng) const {
        std::vector<bool> out(n_);
        std::uint32_t s = 0;
        for (int i = 0; i < n_; ++i) {
            const StateEdges& se = edges_[i][s];
            bool bit;
            if (se[1].prob == 0) {
                bit = false;
            } else if (se[0].prob == 0) {
                bit = true;
            } else {
                // exact Bernoulli(p1): draw uniform below the denominator
                const Int den = denominator(se[1].prob);
                bit = rng.uniform_below(den) < numerator(se[1].prob);
            }
            out[i] = bit;
            s = static_cast<std::uint32_t>(se[bit ? 1 : 0].target);
        }
        return out;
    }

    Rational probability_of(const std::vector<bool>& x) const {
        if (x.size() != static_cast<std::size_t>(n_))
            throw input_error("SmallSpaceSource: string length does not match source length");
        Rational p = 1;
        std::uint32_t s = 0;
        for (int i = 0; i < n_; ++i) {
            const Edge& e = edges_[i][s][x[i] ? 1 : 0];
            if (e.prob == 0) return 0;
            p *= e.prob;
            s = static_cast<std::uint32_t>(e.target);
        }
        return p;
    }

private:
    int n_;
    std::vector<std::vector<StateEdges>> edges_;
    std::size_t final_width_;
};

// Pr_{x<-D}[M(x)=1], exactly, by joint backward DP over (program state,
// source state) pairs; O(n*S*W) pair visits.
inline Rational eval_prob(const Robp& m, const SmallSpaceSource& d) {
    if (m.length() != d.length())
        throw input_error("eval_prob: program and source layer counts differ");
    const int n = m.length();
    std::vector<std::vector<Rational>> cur(m.width(n), std::vector<Rational>(d.width(n)));
    for (std::size_t s = 0; s < m.width(n); ++s)
        if (m.accepting(static_cast<std::uint32_t>(s)))
            for (auto& v : cur[s]) v = 1;
    for (int i = n - 1; i >= 0; --i) {
        std::vector<std::vector<Rational>> prev(m.width(i), std::vector<Rational>(d.width(i)));
        for (std::size_t sm = 0; sm < m.width(i); ++sm) {
            for (std::size_t sd = 0; sd < d.width(i); ++sd) {
                Rational acc = 0;
                for (int b = 0; b < 2; ++b) {
                    const auto& e = d.edges(i, sd)[b];
                    if (e.prob == 0) continue;
                    acc += e.prob * cur[m.next(i, static_cast<std::uint32_t>(sm), b != 0)][e.target];
                }
                prev[sm][sd] = std::move(acc);
            }
        }
        cur = std::move(prev);
    }
    return cur[0][0];
}

// The uniform distribution over M's accepting inputs as a small-space source
// (edge probabilities |A(child)|/|A(v)|). Dead states are pruned.
inline SmallSpaceSource uniform_accept_source(const Robp& m) {
    const AcceptCounts counts = accept_counts(m);
    if (counts[0][0] == 0) throw input_error("uniform_accept_source: empty accept set");
    const int n = m.length();

    // index map: per layer, surviving states -> dense index
    std::vector<std::vector<std::int32_t>> live(n + 1);
    std::vector<std::size_t> live_count(n + 1, 0);
    for (int i = 0; i <= n; ++i) {
        live[i].assign(m.width(i), -1);
        for (std::size_t s = 0; s < m.width(i); ++s)
            if (counts[i][s] > 0) live[i][s] = static_cast<std::int32_t>(live_count[i]++);
    }

    std::vector<std::vector<SmallSpaceSource::StateEdges>> edges(n);
    for (int i = 0; i < n; ++i) {
        edges[i].resize(live_count[i]);
        for (std::size_t s = 0; s < m.width(i); ++s) {
            if (live[i][s] < 0) continue;
            SmallSpaceSource::StateEdges se;
            for (int b = 0; b < 2; ++b) {
                const std::uint32_t child = m.next(i, static_cast<std::uint32_t>(s), b != 0);
                if (counts[i + 1][child] > 0) {
                    se[b].target = live[i + 1][child];
                    se[b].prob = Rational(counts[i + 1][child], counts[i][s]);
                }
            }
            edges[i][live[i][s]] = std::move(se);
        }
    }
    return SmallSpaceSource(n, std::move(edges), live_count[n]);
}

} // namespace knapcount
