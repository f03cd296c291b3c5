#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "knapcount/numeric.hpp"

namespace knapcount {

struct ContingencyInstance {
    enum class Mode { ct, ct_prime };

    std::vector<Int> r; // row sums (ct) / row caps (ct_prime)
    std::vector<Int> c; // column sums
    Mode mode = Mode::ct;

    Int max_margin() const {
        Int m = 0;
        for (const Int& v : r)
            if (v > m) m = v;
        for (const Int& v : c)
            if (v > m) m = v;
        return m;
    }

    void validate() const {
        if (r.empty()) throw input_error("contingency: need at least one row");
        for (const Int& v : r)
            if (v < 0) throw input_error("contingency: negative row sum");
        for (const Int& v : c)
            if (v < 0) throw input_error("contingency: negative column sum");
    }
};

// |{y in Z^m, y_i >= 0, sum y_i = target, lo_i <= y_i <= hi_i}| by
// inclusion-exclusion over which coordinates overflow their upper bound;
// 2^m stars-and-bars terms.
inline Int box_simplex_count(const Int& target, const std::vector<std::pair<Int, Int>>& bounds) {
    const int m = static_cast<int>(bounds.size());
    Int base = target;
    std::vector<Int> widths(m);
    for (int k = 0; k < m; ++k) {
        Int lo = bounds[k].first < 0 ? Int(0) : bounds[k].first;
        if (lo > bounds[k].second) return 0;
        base -= lo;
        widths[k] = bounds[k].second - lo;
    }
    if (base < 0) return 0;
    Int total = 0;
    for (std::uint32_t mask = 0; mask < (std::uint32_t(1) << m); ++mask) {
        Int rem = base;
        for (int k = 0; k < m; ++k)
            if ((mask >> k) & 1) rem -= widths[k] + 1;
        if (rem < 0) continue;
        const Int term = binomial(rem + m - 1, Int(m - 1));
        if (__builtin_popcount(mask) % 2 == 0)
            total += term;
        else
            total -= term;
    }
    return total;
}

// Dyer's lattice data for CT'(r, c) with all r_i > 0: the grid T = {0..2n^2}^m,
// the per-column h-value distributions delta_j, the suffix-count table f with
// f(k, t) = #{(y_{k+1}..y_n) in B(k+1) x .. x B(n) : t + sum h(y) <= 2n^2 * 1}
// (base f(n, t) = 1 on the grid), and |S| = f(0, 0).
class SuffixTable {
public:
    using TVec = std::vector<std::int32_t>; // point of T, coordinates in [0, 2n^2]

    SuffixTable(std::vector<Int> rows, std::vector<Int> cols) : r_(std::move(rows)), c_(std::move(cols)) {
        m_ = static_cast<int>(r_.size());
        n_ = static_cast<int>(c_.size());
        for (const Int& ri : r_)
            if (ri <= 0) throw input_error("SuffixTable: row caps must be positive");
        big_d_ = Int(2) * n_ * n_;
        if (big_d_ + 1 > (Int(1) << 20)) throw capacity_error("SuffixTable: grid side too large");
        side_ = static_cast<std::size_t>(big_d_ + 1);
        Int cells = 1;
        for (int k = 0; k < m_; ++k) cells *= Int(side_);
        check_budget(cells * (n_ + 1), 48, "SuffixTable");
        t_size_ = 1;
        for (int k = 0; k < m_; ++k) t_size_ *= side_;

        build_deltas();
        build_f();
        build_reach();
    }

    int rows() const { return m_; }
    int cols() const { return n_; }
    const Int& grid_max() const { return big_d_; } // 2n^2
    const std::vector<Int>& row_caps() const { return r_; }
    const std::vector<Int>& col_sums() const { return c_; }

    // h-preimage of value t on row k: {y : floor(2n^2 y / r_k) = t}
    std::pair<Int, Int> preimage(int k, const Int& t) const {
        return {ceil_div(t * r_[k], big_d_), ceil_div((t + 1) * r_[k], big_d_) - 1};
    }

    std::size_t index_of(const TVec& t) const {
        std::size_t idx = 0;
        for (int k = m_ - 1; k >= 0; --k) idx = idx * side_ + static_cast<std::size_t>(t[k]);
        return idx;
    }

    // delta_j as a sparse list of (t, count) with count > 0
    const std::vector<std::pair<TVec, Int>>& delta(int j) const { return delta_[j]; }

    const Int& f_value(int k, const TVec& t) const { return f_[k][index_of(t)]; }

    Int set_size() const { return f_[0][0]; } // |S| = f(0, 0)

    // prefix h-sums u reachable after l columns with f(l, u) > 0, sorted by index
    const std::vector<std::size_t>& reachable(int l) const { return reach_[l]; }

    std::size_t reach_position(int l, std::size_t t_idx) const {
        const auto& v = reach_[l];
        auto it = std::lower_bound(v.begin(), v.end(), t_idx);
        if (it == v.end() || *it != t_idx)
            throw input_error("SuffixTable: index not reachable at this layer");
        return static_cast<std::size_t>(it - v.begin());
    }

    const Int& f_at(int k, std::size_t t_idx) const { return f_[k][t_idx]; }

    // t_idx of t+z, or npos when any coordinate leaves the grid
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t shifted_index(std::size_t t_idx, const TVec& z) const {
        std::size_t out = 0;
        std::size_t mult = 1;
        for (int k = 0; k < m_; ++k) {
            const std::size_t coord = (t_idx / powers_[k]) % side_ + static_cast<std::size_t>(z[k]);
            if (coord >= side_) return npos;
            out += coord * mult;
            mult *= side_;
        }
        return out;
    }

private:
    void build_deltas() {
        delta_.resize(n_);
        for (int j = 0; j < n_; ++j) {
            // candidate t values per row: images of [0, c_j] under h_k, clipped to the grid
            std::vector<std::vector<std::int32_t>> cand(m_);
            for (int k = 0; k < m_; ++k) {
                Int y = 0;
                while (y <= c_[j]) {
                    const Int t = floor_div(big_d_ * y, r_[k]);
                    if (t > big_d_) break;
                    cand[k].push_back(static_cast<std::int32_t>(t));
                    y = ceil_div((t + 1) * r_[k], big_d_); // first y of the next h-value
                }
            }
            TVec t(m_, 0);
            std::vector<std::size_t> pick(m_, 0);
            for (;;) {
                for (int k = 0; k < m_; ++k) t[k] = cand[k][pick[k]];
                std::vector<std::pair<Int, Int>> bounds(m_);
                for (int k = 0; k < m_; ++k) {
                    auto [lo, hi] = preimage(k, Int(t[k]));
                    if (hi > c_[j]) hi = c_[j];
                    bounds[k] = {lo, hi};
                }
                const Int count = box_simplex_count(c_[j], bounds);
                if (count > 0) delta_[j].emplace_back(t, count);
                int k = 0;
                while (k < m_ && ++pick[k] == cand[k].size()) pick[k++] = 0;
                if (k == m_) break;
            }
        }
    }

    void build_f() {
        powers_.resize(m_);
        std::size_t mult = 1;
        for (int k = 0; k < m_; ++k) {
            powers_[k] = mult;
            mult *= side_;
        }
        f_.assign(n_ + 1, {});
        f_[n_].assign(t_size_, Int(1));
        for (int l = n_ - 1; l >= 0; --l) {
            f_[l].assign(t_size_, Int(0));
            for (std::size_t idx = 0; idx < t_size_; ++idx) {
                Int acc = 0;
                for (const auto& [z, d] : delta_[l]) {
                    const std::size_t shifted = shifted_index(idx, z);
                    if (shifted == npos) continue;
                    acc += d * f_[l + 1][shifted];
                }
                f_[l][idx] = std::move(acc);
            }
        }
    }

    void build_reach() {
        reach_.assign(n_ + 1, {});
        if (f_[0][0] > 0) reach_[0].push_back(0);
        for (int l = 0; l < n_; ++l) {
            std::set<std::size_t> next;
            for (std::size_t idx : reach_[l])
                for (const auto& [z, d] : delta_[l]) {
                    const std::size_t shifted = shifted_index(idx, z);
                    if (shifted != npos && f_[l + 1][shifted] > 0) next.insert(shifted);
                }
            reach_[l + 1].assign(next.begin(), next.end());
        }
    }

    std::vector<Int> r_, c_;
    int m_ = 0, n_ = 0;
    Int big_d_;
    std::size_t side_ = 0, t_size_ = 0;
    std::vector<std::size_t> powers_;
    std::vector<std::vector<std::pair<TVec, Int>>> delta_;
    std::vector<std::vector<Int>> f_;
    std::vector<std::vector<std::size_t>> reach_;
};

// Interval ROBP for one row constraint sum_j X_ij <= r_i, rounded under the
// conditional distributions D(u, l) of the uniform distribution on S. Layer l
// keeps clamped row partial sums (ascending, 0 and the r_i+1 sentinel always
// present) with the exact suffix counts g(v, u) = f(l, u) * P_{M,u}(v) for
// every reachable prefix class u.
class RowProgram {
public:
    struct Layer {
        std::vector<Int> sums;
        std::vector<std::vector<Int>> g; // [state][reach position]
    };

    RowProgram(int row, Int cap, Rational eta, std::vector<Layer> layers)
        : row_(row), cap_(std::move(cap)), eta_(std::move(eta)), layers_(std::move(layers)) {}

    int row() const { return row_; }
    const Int& cap() const { return cap_; }
    const Rational& eta() const { return eta_; }
    const Layer& layer(int l) const { return layers_[l]; }
    int length() const { return static_cast<int>(layers_.size()) - 1; }

    std::size_t width(int l) const { return layers_[l].sums.size(); }

    std::size_t round_down(int l, const Int& sum) const {
        const auto& s = layers_[l].sums;
        auto it = std::upper_bound(s.begin(), s.end(), sum);
        return static_cast<std::size_t>(it - s.begin()) - 1;
    }

    // walk on row entries
    bool accepts(const std::vector<Int>& x) const {
        if (static_cast<int>(x.size()) != length())
            throw input_error("RowProgram::accepts: input length mismatch");
        Int v = 0;
        for (int l = 0; l < length(); ++l) {
            Int s = v + x[l];
            if (s > cap_) return false;
            v = layers_[l + 1].sums[round_down(l + 1, s)];
        }
        return true;
    }

private:
    int row_;
    Int cap_;
    Rational eta_;
    std::vector<Layer> layers_;
};

namespace detail {

class RowProgramBuilder {
public:
    RowProgramBuilder(const SuffixTable& table, int row, const Rational& eta)
        : table_(table), row_(row), cap_(table.row_caps()[row]),
          thr_num_(denominator(eta) + numerator(eta)), thr_den_(denominator(eta)), eta_(eta) {}

    RowProgram run() {
        const int n = table_.cols();
        layers_.resize(n + 1);
        for (int l = n; l >= 1; --l) round_layer(l);
        memo_.clear(); // keys carry no layer; drop the layer-1 entries
        RowProgram::Layer root;
        root.sums = {Int(0)};
        root.g.resize(1);
        const auto& reach0 = table_.reachable(0);
        root.g[0].resize(reach0.size());
        for (std::size_t up = 0; up < reach0.size(); ++up)
            root.g[0][up] = n == 0 ? Int(cap_ >= 0 ? 1 : 0) : g_value(0, Int(0), up);
        layers_[0] = std::move(root);
        return RowProgram(row_, cap_, eta_, std::move(layers_));
    }

private:
    const SuffixTable& table_;
    int row_;
    Int cap_;
    Int thr_num_, thr_den_;
    Rational eta_;
    std::vector<RowProgram::Layer> layers_;
    std::map<std::pair<Int, std::size_t>, Int> memo_; // per layer under construction

    // g(v, u) at layer l: suffix assignments of columns l+1..n consistent with
    // prefix class u that the row walk from v accepts. Uses the finalized
    // layer l+1 kept list; transition mass comes from the box-count kernel.
    Int g_raw(int l, const Int& v, std::size_t u_pos) {
        const int n = table_.cols();
        if (l == n) return v <= cap_ ? 1 : 0;
        const std::size_t u_idx = table_.reachable(l)[u_pos];
        const auto& next_layer = layers_[l + 1];
        const auto& next_reach = table_.reachable(l + 1);
        Int acc = 0;
        for (const auto& [z, d] : table_.delta(l)) {
            (void)d;
            const std::size_t shifted = table_.shifted_index(u_idx, z);
            if (shifted == SuffixTable::npos || table_.f_at(l + 1, shifted) == 0) continue;
            const auto it = std::lower_bound(next_reach.begin(), next_reach.end(), shifted);
            const std::size_t next_pos = static_cast<std::size_t>(it - next_reach.begin());
            auto [plo, phi] = table_.preimage(row_, Int(z[row_]));
            if (phi > table_.col_sums()[l]) phi = table_.col_sums()[l];
            // pieces of the kept list: y-interval per target
            for (std::size_t t = 0; t < next_layer.sums.size(); ++t) {
                const Int w = next_layer.sums[t];
                if (w > cap_) break; // sentinel: walk rejects, contributes 0
                const Int piece_end =
                    t + 1 < next_layer.sums.size() ? next_layer.sums[t + 1] - 1 : cap_;
                // y with v + y in [w, piece_end], intersected with the h-preimage
                Int lo = w - v;
                Int hi = piece_end - v;
                if (lo < plo) lo = plo;
                if (hi > phi) hi = phi;
                if (lo > hi) continue;
                const Int g_next = next_layer.g[t][next_pos];
                if (g_next == 0) continue;
                acc += column_count(l, z, lo, hi) * g_next;
            }
        }
        return acc;
    }

    // #{y in B(l+1) : h(y) = z, y_row in [lo, hi]}
    Int column_count(int l, const SuffixTable::TVec& z, const Int& lo, const Int& hi) {
        const int m = table_.rows();
        std::vector<std::pair<Int, Int>> bounds(m);
        for (int k = 0; k < m; ++k) {
            auto [plo, phi] = table_.preimage(k, Int(z[k]));
            if (phi > table_.col_sums()[l]) phi = table_.col_sums()[l];
            bounds[k] = {plo, phi};
        }
        if (bounds[row_].first < lo) bounds[row_].first = lo;
        if (bounds[row_].second > hi) bounds[row_].second = hi;
        return box_simplex_count(table_.col_sums()[l], bounds);
    }

    Int g_value(int l, const Int& v, std::size_t u_pos) {
        auto key = std::make_pair(v, u_pos);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        Int g = g_raw(l, v, u_pos);
        memo_.emplace(std::move(key), g);
        return g;
    }

    // breakpoint scan (strict drop rule) per reachable prefix class, plus the per-class
    // zero-boundary marker; 0 and the cap+1 sentinel are always kept.
    void round_layer(int l) {
        memo_.clear();
        std::set<Int> kept{Int(0), cap_ + 1};
        const std::size_t classes = table_.reachable(l).size();
        for (std::size_t u = 0; u < classes; ++u) {
            Int cur = 0;
            Int g_cur = g_value(l, cur, u);
            if (g_cur > 0) {
                for (;;) {
                    // min v > cur with g(v)*(q+p) < g(cur)*q, then require g > 0
                    Int lo = cur, hi = cap_ + 1;
                    if (!(g_value(l, hi, u) * thr_num_ < g_cur * thr_den_)) break;
                    while (hi - lo > 1) {
                        Int mid = lo + (hi - lo) / 2;
                        if (g_value(l, mid, u) * thr_num_ < g_cur * thr_den_)
                            hi = mid;
                        else
                            lo = mid;
                    }
                    Int g_hi = g_value(l, hi, u);
                    if (g_hi == 0) break;
                    kept.insert(hi);
                    cur = std::move(hi);
                    g_cur = std::move(g_hi);
                }
                // zero marker: smallest v with g(v, u) = 0
                if (g_value(l, cap_ + 1, u) == 0) {
                    Int lo = cur, hi = cap_ + 1;
                    while (hi - lo > 1) {
                        Int mid = lo + (hi - lo) / 2;
                        if (g_value(l, mid, u) == 0)
                            hi = mid;
                        else
                            lo = mid;
                    }
                    kept.insert(hi);
                }
            }
        }
        RowProgram::Layer layer;
        layer.sums.assign(kept.begin(), kept.end());
        layer.g.resize(layer.sums.size());
        for (std::size_t t = 0; t < layer.sums.size(); ++t) {
            layer.g[t].resize(classes);
            for (std::size_t u = 0; u < classes; ++u) layer.g[t][u] = g_value(l, layer.sums[t], u);
        }
        layers_[l] = std::move(layer);
    }
};

} // namespace detail

inline SuffixTable build_suffix_table(const std::vector<Int>& row_caps, const std::vector<Int>& col_sums) {
    return SuffixTable(row_caps, col_sums);
}

inline RowProgram build_row_program(const SuffixTable& table, int row, const Rational& eta) {
    if (row < 0 || row >= table.rows()) throw input_error("build_row_program: row out of range");
    if (eta <= 0) throw input_error("build_row_program: eta must be positive");
    return detail::RowProgramBuilder(table, row, eta).run();
}

// Pr_{X uniform on S}[all row programs accept], via the joint DP over
// (per-row kept states, prefix class) tuples. Exact rational.
inline Rational joint_accept_prob(const SuffixTable& table, const std::vector<RowProgram>& programs) {
    const int m = table.rows();
    const int n = table.cols();
    if (static_cast<int>(programs.size()) != m)
        throw input_error("joint_accept_prob: need one program per row");
    if (table.set_size() == 0) throw input_error("joint_accept_prob: S is empty");

    // G[l][tuple, u] = #suffixes from (v_1..v_m, u) accepted by every row walk
    auto tuple_count = [&](int l) {
        std::size_t total = 1;
        for (const RowProgram& p : programs) total *= p.width(l);
        return total;
    };

    const auto& reach_n = table.reachable(n);
    std::vector<Int> cur(tuple_count(n) * reach_n.size());
    {
        // base: accept iff every row's final state is within its cap
        const std::size_t tuples = tuple_count(n);
        for (std::size_t tup = 0; tup < tuples; ++tup) {
            std::size_t rest = tup;
            bool ok = true;
            for (int k = 0; k < m; ++k) {
                const std::size_t idx = rest % programs[k].width(n);
                rest /= programs[k].width(n);
                ok = ok && programs[k].layer(n).sums[idx] <= programs[k].cap();
            }
            if (ok)
                for (std::size_t up = 0; up < reach_n.size(); ++up) cur[tup * reach_n.size() + up] = 1;
        }
    }

    for (int l = n - 1; l >= 0; --l) {
        const auto& reach_l = table.reachable(l);
        const auto& reach_next = table.reachable(l + 1);
        const std::size_t tuples = tuple_count(l);
        const std::size_t next_tuples = tuple_count(l + 1);
        std::vector<Int> prev(tuples * reach_l.size());
        check_budget(Int(prev.size()) + Int(next_tuples * reach_next.size()), 32, "joint_accept_prob");

        // per-z shift maps u_pos -> next u_pos (or npos)
        const auto& dl = table.delta(l);
        std::vector<std::vector<std::size_t>> shift(dl.size(),
                                                    std::vector<std::size_t>(reach_l.size()));
        for (std::size_t zi = 0; zi < dl.size(); ++zi)
            for (std::size_t up = 0; up < reach_l.size(); ++up) {
                const std::size_t s = table.shifted_index(reach_l[up], dl[zi].first);
                if (s == SuffixTable::npos || table.f_at(l + 1, s) == 0) {
                    shift[zi][up] = SuffixTable::npos;
                } else {
                    auto it = std::lower_bound(reach_next.begin(), reach_next.end(), s);
                    shift[zi][up] = static_cast<std::size_t>(it - reach_next.begin());
                }
            }

        // per-row nonempty edge pieces from each kept state (y-intervals)
        struct Piece {
            std::size_t target;
            Int lo, hi;
        };
        std::vector<std::vector<std::vector<Piece>>> pieces(m);
        for (int k = 0; k < m; ++k) {
            const auto& lay = programs[k].layer(l);
            const auto& nxt = programs[k].layer(l + 1);
            pieces[k].resize(lay.sums.size());
            for (std::size_t s = 0; s < lay.sums.size(); ++s) {
                const Int& v = lay.sums[s];
                for (std::size_t t = 0; t < nxt.sums.size(); ++t) {
                    if (nxt.sums[t] > programs[k].cap()) break; // sentinel rejects
                    const Int end =
                        t + 1 < nxt.sums.size() ? nxt.sums[t + 1] - 1 : programs[k].cap();
                    Int lo = nxt.sums[t] - v;
                    if (lo < 0) lo = 0;
                    Int hi = end - v;
                    if (hi < 0) continue;
                    if (lo > table.col_sums()[l]) continue;
                    pieces[k][s].push_back({t, std::move(lo), std::move(hi)});
                }
            }
        }

        std::vector<std::size_t> state(m), target_pick(m);
        for (std::size_t tup = 0; tup < tuples; ++tup) {
            std::size_t rest = tup;
            for (int k = 0; k < m; ++k) {
                state[k] = rest % programs[k].width(l);
                rest /= programs[k].width(l);
            }
            for (std::size_t zi = 0; zi < dl.size(); ++zi) {
                const auto& z = dl[zi].first;
                // iterate all combinations of per-row target pieces
                bool any_empty = false;
                for (int k = 0; k < m; ++k) {
                    if (pieces[k][state[k]].empty()) {
                        any_empty = true;
                        break;
                    }
                    target_pick[k] = 0;
                }
                if (any_empty) continue;
                for (;;) {
                    // bounds: per row, preimage of z_k intersected with the piece
                    std::vector<std::pair<Int, Int>> bounds(m);
                    std::size_t next_tup = 0;
                    std::size_t mult = 1;
                    bool feasible = true;
                    for (int k = 0; k < m; ++k) {
                        const Piece& pc = pieces[k][state[k]][target_pick[k]];
                        auto [plo, phi] = table.preimage(k, Int(z[k]));
                        if (phi > table.col_sums()[l]) phi = table.col_sums()[l];
                        if (plo < pc.lo) plo = pc.lo;
                        if (phi > pc.hi) phi = pc.hi;
                        if (plo > phi) {
                            feasible = false;
                            break;
                        }
                        bounds[k] = {plo, phi};
                        next_tup += pc.target * mult;
                        mult *= programs[k].width(l + 1);
                    }
                    if (feasible) {
                        const Int bc = box_simplex_count(table.col_sums()[l], bounds);
                        if (bc > 0) {
                            for (std::size_t up = 0; up < reach_l.size(); ++up) {
                                const std::size_t next_up = shift[zi][up];
                                if (next_up == SuffixTable::npos) continue;
                                const Int& g_next = cur[next_tup * reach_next.size() + next_up];
                                if (g_next != 0)
                                    prev[tup * reach_l.size() + up] += bc * g_next;
                            }
                        }
                    }
                    int k = 0;
                    while (k < m && ++target_pick[k] == pieces[k][state[k]].size())
                        target_pick[k++] = 0;
                    if (k == m) break;
                }
            }
        }
        cur = std::move(prev);
    }

    // start tuple: every row starts at sum 0 = kept index 0
    return Rational(cur[0], table.set_size());
}

// Exact |CT'(r, c)| by column-wise DP over row-sum vectors clamped at r+1;
// test/oracle use, budget-guarded.
inline Int exact_count_ct_prime(const std::vector<Int>& r, const std::vector<Int>& c) {
    const int m = static_cast<int>(r.size());
    std::map<std::vector<Int>, Int> cur{{std::vector<Int>(m, 0), Int(1)}};
    for (const Int& cj : c) {
        std::map<std::vector<Int>, Int> next;
        for (const auto& [sums, cnt] : cur) {
            // add one column: all compositions of cj that keep rows within caps
            std::vector<Int> y(m, 0);
            std::vector<Int> acc(sums);
            auto rec = [&](auto&& self, int k, Int left) -> void {
                if (k == m - 1) {
                    if (acc[k] + left > r[k]) return;
                    acc[k] += left;
                    next[acc] += cnt;
                    acc[k] -= left;
                    return;
                }
                for (Int v = 0; v <= left && acc[k] + v <= r[k]; ++v) {
                    acc[k] += v;
                    self(self, k + 1, left - v);
                    acc[k] -= v;
                }
            };
            rec(rec, 0, cj);
        }
        cur = std::move(next);
        check_budget(Int(cur.size()) * m, 128, "exact_count_ct");
    }
    Int total = 0;
    for (const auto& [sums, cnt] : cur) total += cnt;
    return total;
}

// Exact contingency count following the same mode/degeneracy handling as count_ct.
inline Int exact_count_ct(const ContingencyInstance& inst) {
    inst.validate();
    std::vector<Int> c = inst.c;
    if (inst.mode == ContingencyInstance::Mode::ct) {
        Int row_total = 0, col_total = 0;
        for (const Int& v : inst.r) row_total += v;
        for (const Int& v : inst.c) col_total += v;
        if (row_total != col_total) return 0;
        if (c.empty()) return row_total == 0 ? 1 : 0;
        c.pop_back();
    }
    std::vector<Int> r;
    for (const Int& ri : inst.r)
        if (ri > 0) r.push_back(ri);
    if (r.empty()) {
        for (const Int& cj : c)
            if (cj != 0) return 0;
        return 1;
    }
    if (c.empty()) return 1;
    return exact_count_ct_prime(r, c);
}

namespace detail {

// eta for the CT pipeline: start at eps/(m n^{m+1}) and halve until the
// telescoped union bound m n^m ((1+eta)^n - 1) <= eps holds exactly, so the
// end-to-end sandwich is provable rather than asymptotic.
inline Rational ct_eta(const Rational& eps, int m, int n) {
    Rational eta = eps / Rational(Int(m) * pow_int(Int(n), m + 1));
    const Int pe = numerator(eps), qe = denominator(eps);
    const Int factor = Int(m) * pow_int(Int(n), m);
    for (;;) {
        const Int p = numerator(eta), q = denominator(eta);
        // m n^m ((q+p)^n - q^n) * qe <= pe * q^n
        if (factor * (pow_int(q + p, n) - pow_int(q, n)) * qe <= pe * pow_int(q, n)) break;
        eta /= 2;
    }
    return eta;
}

} // namespace detail

struct CtCountResult {
    Int count;
    Rational eta;                  // per-layer tolerance actually used
    std::size_t max_row_width = 0; // widest kept layer across the row programs
    int columns = 0;               // columns of the relaxed instance solved
};

// eps-relative-error count of contingency tables. Equality mode
// reduces to CT' by dropping the last column; rows with r_i = 0 force their
// entries to zero and are eliminated up front.
inline CtCountResult count_ct_detailed(const ContingencyInstance& inst, const Rational& eps) {
    inst.validate();
    if (eps <= 0 || eps > 1) throw input_error("count_ct: eps must lie in (0,1]");

    std::vector<Int> c = inst.c;
    if (inst.mode == ContingencyInstance::Mode::ct) {
        Int row_total = 0, col_total = 0;
        for (const Int& v : inst.r) row_total += v;
        for (const Int& v : inst.c) col_total += v;
        if (row_total != col_total) return {Int(0), eps, 0, 0};
        if (c.empty()) return {Int(row_total == 0 ? 1 : 0), eps, 0, 0};
        c.pop_back(); // |CT(r, c')| = |CT'(r, c)|
    }

    std::vector<Int> r;
    for (const Int& ri : inst.r)
        if (ri > 0) r.push_back(ri);

    if (r.empty()) {
        for (const Int& cj : c)
            if (cj != 0) return {Int(0), eps, 0, 0};
        return {Int(1), eps, 0, 0};
    }
    if (c.empty()) return {Int(1), eps, 0, 0};

    const int m = static_cast<int>(r.size());
    const int n = static_cast<int>(c.size());
    const SuffixTable table(r, c);
    if (table.set_size() == 0) return {Int(0), eps, 0, n};
    const Rational eta = detail::ct_eta(eps, m, n);
    std::vector<RowProgram> programs;
    programs.reserve(m);
    std::size_t max_width = 0;
    for (int i = 0; i < m; ++i) {
        programs.push_back(build_row_program(table, i, eta));
        for (int l = 0; l <= n; ++l) max_width = std::max(max_width, programs.back().width(l));
    }
    const Rational p = joint_accept_prob(table, programs);
    const Rational answer = Rational(table.set_size()) * p;
    return {numerator(answer), eta, max_width, n}; // |S| * (G / |S|) = G, an integer
}

inline Int count_ct(const ContingencyInstance& inst, const Rational& eps) {
    return count_ct_detailed(inst, eps).count;
}

} // namespace knapcount
