#pragma once

#include <vector>

#include "knapcount/robp.hpp"

namespace knapcount {

// Width-1 product source: bit i is 1 with probability p[i], independently.
inline SmallSpaceSource product_source(const std::vector<Rational>& p) {
    const int n = static_cast<int>(p.size());
    std::vector<std::vector<SmallSpaceSource::StateEdges>> edges(n);
    for (int i = 0; i < n; ++i) {
        if (p[i] < 0 || p[i] > 1) throw input_error("product_source: probability outside [0,1]");
        SmallSpaceSource::StateEdges se;
        if (p[i] < 1) se[0] = {0, 1 - p[i]};
        if (p[i] > 0) se[1] = {0, p[i]};
        edges[i] = {se};
    }
    return SmallSpaceSource(n, std::move(edges), 1);
}

inline SmallSpaceSource uniform_source(int n) {
    return product_source(std::vector<Rational>(n, Rational(1, 2)));
}

inline SmallSpaceSource point_source(const std::vector<bool>& z) {
    std::vector<Rational> p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) p[i] = z[i] ? 1 : 0;
    return product_source(p);
}

// Mixture of Hamming-weight classes: Pr[x] = w[|x|] / sum_k w[k]*C(n,k).
// States track the number of ones emitted so far; width <= n+2.
inline SmallSpaceSource symmetric_source(const std::vector<Rational>& w) {
    if (w.empty()) throw input_error("symmetric_source: need n+1 class weights");
    const int n = static_cast<int>(w.size()) - 1;
    for (const Rational& wk : w)
        if (wk < 0) throw input_error("symmetric_source: negative class weight");

    // g[i][ones] = sum_k w[k] * C(n-i, k-ones): unnormalized suffix mass
    std::vector<std::vector<Rational>> g(n + 1);
    for (int i = 0; i <= n; ++i) {
        g[i].resize(i + 1);
        for (int ones = 0; ones <= i; ++ones) {
            Rational acc = 0;
            for (int k = ones; k <= n; ++k) acc += w[k] * Rational(binomial(n - i, k - ones));
            g[i][ones] = std::move(acc);
        }
    }
    if (g[0][0] == 0) throw input_error("symmetric_source: all class weights are zero");

    std::vector<std::vector<std::int32_t>> live(n + 1);
    std::vector<std::size_t> live_count(n + 1, 0);
    for (int i = 0; i <= n; ++i) {
        live[i].assign(i + 1, -1);
        for (int ones = 0; ones <= i; ++ones)
            if (g[i][ones] > 0) live[i][ones] = static_cast<std::int32_t>(live_count[i]++);
    }

    std::vector<std::vector<SmallSpaceSource::StateEdges>> edges(n);
    for (int i = 0; i < n; ++i) {
        edges[i].resize(live_count[i]);
        for (int ones = 0; ones <= i; ++ones) {
            if (live[i][ones] < 0) continue;
            SmallSpaceSource::StateEdges se;
            if (g[i + 1][ones] > 0)
                se[0] = {live[i + 1][ones], g[i + 1][ones] / g[i][ones]};
            if (ones + 1 <= i + 1 && g[i + 1][ones + 1] > 0)
                se[1] = {live[i + 1][ones + 1], g[i + 1][ones + 1] / g[i][ones]};
            edges[i][live[i][ones]] = std::move(se);
        }
    }
    return SmallSpaceSource(n, std::move(edges), live_count[n]);
}

// Uniform over strings of Hamming weight exactly r; width <= r+2.
// From state (i, ones) the 1-edge has probability C(n-i-1, r-ones-1)/C(n-i, r-ones).
inline SmallSpaceSource hamming_slice_source(int n, int r) {
    if (r < 0 || r > n) throw input_error("hamming_slice_source: weight out of range");

    // (i, ones) is live iff it can still finish at weight r
    auto paths = [&](int i, int ones) { return binomial(n - i, r - ones); };
    std::vector<std::vector<std::int32_t>> live(n + 1);
    std::vector<std::size_t> live_count(n + 1, 0);
    for (int i = 0; i <= n; ++i) {
        live[i].assign(i + 1, -1);
        for (int ones = 0; ones <= i; ++ones)
            if (ones <= r && paths(i, ones) > 0)
                live[i][ones] = static_cast<std::int32_t>(live_count[i]++);
    }

    std::vector<std::vector<SmallSpaceSource::StateEdges>> edges(n);
    for (int i = 0; i < n; ++i) {
        edges[i].resize(live_count[i]);
        for (int ones = 0; ones <= i; ++ones) {
            if (live[i][ones] < 0) continue;
            const Int total = paths(i, ones);
            SmallSpaceSource::StateEdges se;
            const Int stay = binomial(n - i - 1, r - ones);
            const Int take = binomial(n - i - 1, r - ones - 1);
            if (stay > 0) se[0] = {live[i + 1][ones], Rational(stay, total)};
            if (take > 0) se[1] = {live[i + 1][ones + 1], Rational(take, total)};
            edges[i][live[i][ones]] = std::move(se);
        }
    }
    return SmallSpaceSource(n, std::move(edges), live_count[n]);
}

} // namespace knapcount
