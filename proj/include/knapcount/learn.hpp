#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "knapcount/numeric.hpp"
#include "knapcount/rng.hpp"
#include "knapcount/robp.hpp"

namespace knapcount {

// Query access to an unknown deterministic boolean function on {0,1}^n.
// Copies share the query counter.
class MembershipOracle {
public:
    using Fn = std::function<bool(const std::vector<bool>&)>;

    MembershipOracle(int n, Fn fn)
        : n_(n), fn_(std::move(fn)), queries_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

    int length() const { return n_; }

    bool query(const std::vector<bool>& x) const {
        if (x.size() != static_cast<std::size_t>(n_))
            throw input_error("MembershipOracle: query length mismatch");
        queries_->fetch_add(1, std::memory_order_relaxed);
        return fn_(x);
    }

    std::uint64_t queries() const { return queries_->load(std::memory_order_relaxed); }
    void reset_queries() const { queries_->store(0, std::memory_order_relaxed); }

private:
    int n_;
    Fn fn_;
    std::shared_ptr<std::atomic<std::uint64_t>> queries_;
};

struct Halfspace {
    std::vector<Int> a;
    Int b = 0;

    bool eval(const std::vector<bool>& x) const {
        Int sum = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (x[i]) sum += a[i];
        return sum <= b;
    }
};

// f(x) = 1{sum a_i x_i <= b}
inline MembershipOracle halfspace_oracle(std::vector<Int> a, Int b) {
    const int n = static_cast<int>(a.size());
    Halfspace h{std::move(a), std::move(b)};
    return MembershipOracle(n, [h = std::move(h)](const std::vector<bool>& x) { return h.eval(x); });
}

// f(x) = g(h_1(x), ..., h_k(x)) with the truth table indexed by
// sum_j h_j(x) * 2^j (h_1 is the low bit).
inline MembershipOracle k_function_oracle(std::vector<Halfspace> halfspaces,
                                          std::vector<bool> truth_table) {
    if (halfspaces.empty()) throw input_error("k_function_oracle: need at least one halfspace");
    const int n = static_cast<int>(halfspaces.front().a.size());
    for (const Halfspace& h : halfspaces)
        if (static_cast<int>(h.a.size()) != n)
            throw input_error("k_function_oracle: halfspaces must share the dimension");
    if (truth_table.size() != (std::size_t(1) << halfspaces.size()))
        throw input_error("k_function_oracle: truth table must have 2^k entries");
    return MembershipOracle(n, [hs = std::move(halfspaces),
                                tt = std::move(truth_table)](const std::vector<bool>& x) {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < hs.size(); ++j)
            if (hs[j].eval(x)) idx |= std::size_t(1) << j;
        return tt[idx];
    });
}

struct AlmostRobpParams {
    Rational eps;          // merge tolerance (candidates join a rep within 3*eps)
    std::size_t width_cap; // W
    Rational delta;        // confidence
    std::uint64_t samples; // L, suffixes per distance estimate

    // L = ceil(ln(4 n W^2 / delta) / (2 eps^2))
    static AlmostRobpParams derive(Rational eps, std::size_t width_cap, Rational delta, int n) {
        if (eps <= 0 || eps > 1) throw input_error("AlmostRobpParams: eps must lie in (0,1]");
        if (delta <= 0 || delta > 1) throw input_error("AlmostRobpParams: delta must lie in (0,1]");
        if (width_cap == 0) throw input_error("AlmostRobpParams: zero width cap");
        const long double e = static_cast<long double>(numerator(eps).convert_to<double>()) /
                              static_cast<long double>(denominator(eps).convert_to<double>());
        const long double d = static_cast<long double>(numerator(delta).convert_to<double>()) /
                              static_cast<long double>(denominator(delta).convert_to<double>());
        const long double logs = std::log(4.0L * n) + 2.0L * std::log((long double)width_cap) - std::log(d);
        const long double l = std::ceil(logs / (2.0L * e * e));
        AlmostRobpParams p{std::move(eps), width_cap, std::move(delta),
                           static_cast<std::uint64_t>(l < 1 ? 1 : l)};
        return p;
    }
};

// Parameter wiring for functions of k halfspaces learned to accuracy eps_final:
// the target is an (eps_final/4n, (8nk/eps_final)^k, n)-almost ROBP, so the
// learner runs at eps = eps_final/4n with that width cap.
inline AlmostRobpParams halfspace_learning_params(int n, int k, const Rational& eps_final,
                                                  const Rational& delta) {
    if (eps_final <= 0 || eps_final > 1)
        throw input_error("halfspace_learning_params: eps_final must lie in (0,1]");
    const Rational eps = eps_final / Rational(4 * n);
    const Rational base = Rational(8 * n * k) / eps_final;
    Rational w = 1;
    for (int j = 0; j < k; ++j) w *= base;
    const Int cap = ceil_div(numerator(w), denominator(w));
    return AlmostRobpParams::derive(eps, cap.convert_to<std::size_t>(), delta, n);
}

namespace detail {

// One prefix's suffix-response table: entry idx holds f(prefix . bits(idx)),
// bit t of idx being suffix position t. Filled through the counting oracle.
inline std::vector<std::uint8_t> suffix_table(const MembershipOracle& f,
                                              const std::vector<bool>& prefix) {
    const int len = f.length() - static_cast<int>(prefix.size());
    std::vector<std::uint8_t> table(std::size_t(1) << len);
    std::vector<bool> x(prefix);
    x.resize(f.length());
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
        for (int t = 0; t < len; ++t) x[prefix.size() + t] = (idx >> t) & 1;
        table[idx] = f.query(x) ? 1 : 0;
    }
    return table;
}

constexpr int kMaxCachedSuffix = 20;

inline std::uint64_t count_diff_chunk(const std::uint8_t* tx, const std::uint8_t* ty,
                                      std::uint64_t key, std::uint64_t mask, std::uint64_t from,
                                      std::uint64_t to) {
    std::uint64_t k = 0;
    for (std::uint64_t j = from; j < to; ++j) {
        const std::uint64_t w = splitmix64(key + j * CounterRng::kPhi);
        k += tx[w & mask] ^ ty[w & mask];
    }
    return k;
}

// Disagreement count over the first L samples of the stream, with optional
// certainty exits on the merge decision K <= 3*eps*L. Sample j always uses
// word j of the stream, so thread count never changes the result.
struct DistanceKernel {
    const MembershipOracle& f;
    std::uint64_t samples; // L

    // cached-table path; exits early once the comparison against
    // threshold_num/threshold_den (= 3 eps L as a fraction of L) is decided
    std::pair<std::uint64_t, bool> decide_cached(const std::vector<std::uint8_t>& tx,
                                                 const std::vector<std::uint8_t>& ty,
                                                 std::uint64_t key, int suffix_len,
                                                 const Int& merge_num, const Int& merge_den) const {
        const std::uint64_t mask = suffix_len == 0 ? 0 : (std::uint64_t(1) << suffix_len) - 1;
        const std::uint64_t chunk = std::uint64_t(1) << 18;
        unsigned threads = std::thread::hardware_concurrency();
        if (threads == 0) threads = 1;
        if (threads > 4) threads = 4;

        std::uint64_t k = 0, done = 0;
        while (done < samples) {
            const std::uint64_t batch = std::min<std::uint64_t>(samples - done, chunk * threads);
            if (batch >= chunk && threads > 1) {
                std::vector<std::future<std::uint64_t>> futs;
                const std::uint64_t per = (batch + threads - 1) / threads;
                for (std::uint64_t off = 0; off < batch; off += per) {
                    const std::uint64_t from = done + off;
                    const std::uint64_t to = std::min(done + batch, from + per);
                    futs.push_back(std::async(std::launch::async, count_diff_chunk, tx.data(),
                                              ty.data(), key, mask, from, to));
                }
                for (auto& fut : futs) k += fut.get();
            } else {
                k += count_diff_chunk(tx.data(), ty.data(), key, mask, done, done + batch);
            }
            done += batch;
            // certainty checks: K can only grow, by at most the remaining samples
            if (Int(k) * merge_den > merge_num) return {k, false};
            if ((Int(k) + Int(samples - done)) * merge_den <= merge_num) return {k, true};
        }
        return {k, Int(k) * merge_den <= merge_num};
    }

    // direct-query path for long suffixes
    std::pair<std::uint64_t, bool> decide_direct(const std::vector<bool>& x,
                                                 const std::vector<bool>& y, std::uint64_t key,
                                                 int suffix_len, const Int& merge_num,
                                                 const Int& merge_den) const {
        const int n = f.length();
        std::vector<bool> fx(x), fy(y);
        fx.resize(n);
        fy.resize(n);
        std::uint64_t k = 0;
        std::uint64_t word_cursor = 0;
        const int words_per_sample = suffix_len == 0 ? 0 : (suffix_len + 63) / 64;
        for (std::uint64_t j = 0; j < samples; ++j) {
            int t = 0;
            for (int wbuf = 0; wbuf < words_per_sample; ++wbuf) {
                std::uint64_t w = splitmix64(key + (word_cursor++) * CounterRng::kPhi);
                for (int bit = 0; bit < 64 && t < suffix_len; ++bit, ++t) {
                    fx[x.size() + t] = fy[y.size() + t] = (w >> bit) & 1;
                }
            }
            k += f.query(fx) != f.query(fy);
            if ((j & 0xFFF) == 0xFFF) {
                if (Int(k) * merge_den > merge_num) return {k, false};
                if ((Int(k) + Int(samples - (j + 1))) * merge_den <= merge_num) return {k, true};
            }
        }
        return {k, Int(k) * merge_den <= merge_num};
    }
};

inline std::uint64_t comparison_key(std::uint64_t seed, int layer, std::size_t candidate,
                                    std::size_t rep) {
    CounterRng rng{seed, 0x6c6561726e6b6579ULL, static_cast<std::uint64_t>(layer),
                   static_cast<std::uint64_t>(candidate), static_cast<std::uint64_t>(rep)};
    return rng.key();
}

} // namespace detail

// Empirical fraction of L uniform suffixes on which the two prefixes'
// restrictions disagree. Sample j of the stream draws its suffix from word j
// (low bit = first suffix position).
inline Rational estimate_distance(const MembershipOracle& f, const std::vector<bool>& x,
                                  const std::vector<bool>& y, std::uint64_t samples,
                                  CounterRng& rng) {
    if (x.size() != y.size()) throw input_error("estimate_distance: prefix lengths differ");
    if (x.size() > static_cast<std::size_t>(f.length()))
        throw input_error("estimate_distance: prefix longer than the function");
    if (samples == 0) throw input_error("estimate_distance: need at least one sample");
    const int suffix_len = f.length() - static_cast<int>(x.size());
    const int n = f.length();
    std::vector<bool> fx(x), fy(y);
    fx.resize(n);
    fy.resize(n);
    std::uint64_t diff = 0;
    const int words_per_sample = suffix_len == 0 ? 0 : (suffix_len + 63) / 64;
    std::uint64_t word_cursor = 0;
    for (std::uint64_t j = 0; j < samples; ++j) {
        int t = 0;
        for (int wbuf = 0; wbuf < words_per_sample; ++wbuf) {
            const std::uint64_t w = rng.word(word_cursor++);
            for (int bit = 0; bit < 64 && t < suffix_len; ++bit, ++t)
                fx[x.size() + t] = fy[y.size() + t] = (w >> bit) & 1;
        }
        diff += f.query(fx) != f.query(fy);
    }
    return Rational(Int(diff), Int(samples));
}

struct LearnResult {
    bool failed = false;
    int fail_layer = -1;
    std::optional<Robp> program;
    std::uint64_t queries = 0;
    std::vector<std::size_t> layer_widths;
};

// Main layer-by-layer learner: candidates x.b merge into the first existing
// representative within estimated distance 3*eps, scanning representatives in
// insertion order; a layer exceeding the width cap is a FAIL outcome. On
// success the program's final labels come from one query per representative.
inline LearnResult learn(const MembershipOracle& f, const AlmostRobpParams& params,
                         std::uint64_t seed) {
    const int n = f.length();
    const std::uint64_t base_queries = f.queries();
    // merge iff K <= 3 eps L, cross-multiplied
    const Int merge_num = Int(3) * numerator(params.eps) * Int(params.samples);
    const Int merge_den = denominator(params.eps);
    detail::DistanceKernel kernel{f, params.samples};

    std::vector<std::vector<bool>> reps{{}}; // layer 0: the empty prefix
    std::vector<std::vector<Robp::Transition>> trans(n);
    LearnResult out;
    out.layer_widths.assign(n + 1, 0);
    out.layer_widths[0] = 1;

    for (int layer = 1; layer <= n; ++layer) {
        const int suffix_len = n - layer;
        const bool cached = suffix_len <= detail::kMaxCachedSuffix;
        std::vector<std::vector<bool>> next_reps;
        std::vector<std::vector<std::uint8_t>> next_tables;
        trans[layer - 1].resize(reps.size());

        std::size_t candidate_ordinal = 0;
        for (std::size_t xi = 0; xi < reps.size(); ++xi) {
            for (int b = 0; b < 2; ++b, ++candidate_ordinal) {
                std::vector<bool> cand(reps[xi]);
                cand.push_back(b != 0);
                std::vector<std::uint8_t> cand_table;
                if (cached) cand_table = detail::suffix_table(f, cand);

                std::ptrdiff_t merged = -1;
                for (std::size_t yi = 0; yi < next_reps.size() && merged < 0; ++yi) {
                    const std::uint64_t key =
                        detail::comparison_key(seed, layer, candidate_ordinal, yi);
                    bool merge;
                    if (cached)
                        merge = kernel
                                    .decide_cached(cand_table, next_tables[yi], key, suffix_len,
                                                   merge_num, merge_den)
                                    .second;
                    else
                        merge = kernel
                                    .decide_direct(cand, next_reps[yi], key, suffix_len, merge_num,
                                                   merge_den)
                                    .second;
                    if (merge) merged = static_cast<std::ptrdiff_t>(yi);
                }
                if (merged < 0) {
                    next_reps.push_back(std::move(cand));
                    if (cached) next_tables.push_back(std::move(cand_table));
                    merged = static_cast<std::ptrdiff_t>(next_reps.size()) - 1;
                    if (next_reps.size() > params.width_cap) {
                        out.failed = true;
                        out.fail_layer = layer;
                        out.queries = f.queries() - base_queries;
                        return out;
                    }
                }
                trans[layer - 1][xi].next[b] = static_cast<std::uint32_t>(merged);
            }
        }
        reps = std::move(next_reps);
        out.layer_widths[layer] = reps.size();
    }

    std::vector<std::uint8_t> accept(reps.size());
    for (std::size_t s = 0; s < reps.size(); ++s) accept[s] = f.query(reps[s]) ? 1 : 0;
    out.program.emplace(n, std::move(trans), std::move(accept));
    out.queries = f.queries() - base_queries;
    return out;
}

// Pr_uniform[M(x) != f(x)], exactly for n <= 20, Monte-Carlo otherwise.
inline Rational measure_error(const Robp& m, const MembershipOracle& f, std::uint64_t samples,
                              std::uint64_t seed) {
    const int n = m.length();
    if (n != f.length()) throw input_error("measure_error: length mismatch");
    if (n <= 20) {
        std::uint64_t diff = 0;
        std::vector<bool> x(n);
        for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
            for (int i = 0; i < n; ++i) x[i] = (mask >> i) & 1;
            diff += m.eval(x) != f.query(x);
        }
        return Rational(Int(diff), pow2(n));
    }
    if (samples == 0) throw input_error("measure_error: need at least one sample");
    CounterRng rng{seed, 0x6d6561737572654dULL};
    std::uint64_t diff = 0;
    for (std::uint64_t j = 0; j < samples; ++j) {
        const std::vector<bool> x = rng.next_bits(n);
        diff += m.eval(x) != f.query(x);
    }
    return Rational(Int(diff), Int(samples));
}

} // namespace knapcount
