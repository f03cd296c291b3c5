#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "knapcount/numeric.hpp"

namespace knapcount {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based generator: word k of a stream is splitmix64(key + k*PHI),
// where the stream key is folded from (seed, stream ids...). Draw j of a
// stream therefore never depends on how many draws preceded it, which keeps
// parallel and sequential consumption bit-identical.
class CounterRng {
public:
    static constexpr std::uint64_t kPhi = 0x9e3779b97f4a7c15ULL;

    explicit CounterRng(std::initializer_list<std::uint64_t> ids) {
        key_ = 0x7f4a7c15ca62c94dULL;
        for (std::uint64_t id : ids) key_ = splitmix64(key_ ^ id);
    }

    std::uint64_t key() const { return key_; }

    // Stateless indexed access (the defining property of the stream).
    std::uint64_t word(std::uint64_t index) const { return splitmix64(key_ + index * kPhi); }

    std::uint64_t next_u64() { return word(cursor_++); }

    bool next_bit() {
        if (bits_left_ == 0) {
            bit_buf_ = next_u64();
            bits_left_ = 64;
        }
        bool b = bit_buf_ & 1;
        bit_buf_ >>= 1;
        --bits_left_;
        return b;
    }

    std::vector<bool> next_bits(std::size_t count) {
        std::vector<bool> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = next_bit();
        return out;
    }

    // Exactly uniform over [0, bound) for bound >= 1, by k-bit rejection.
    Int uniform_below(const Int& bound) {
        if (bound <= 0) throw input_error("uniform_below: bound must be positive");
        if (bound == 1) return 0;
        const unsigned long bits = static_cast<unsigned long>(boost::multiprecision::msb(bound)) + 1;
        for (;;) {
            Int v = 0;
            unsigned long got = 0;
            while (got < bits) {
                unsigned long take = bits - got < 64 ? bits - got : 64;
                std::uint64_t w = next_u64();
                if (take < 64) w &= (std::uint64_t(1) << take) - 1;
                v <<= take;
                v |= Int(w);
                got += take;
            }
            if (v < bound) return v;
        }
    }

    std::uint64_t uniform_below_u64(std::uint64_t bound) {
        if (bound == 0) throw input_error("uniform_below: bound must be positive");
        if (bound == 1) return 0;
        unsigned bits = 64 - static_cast<unsigned>(__builtin_clzll(bound - 1));
        const std::uint64_t mask = bits == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << bits) - 1;
        for (;;) {
            std::uint64_t v = next_u64() & mask;
            if (v < bound) return v;
        }
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t cursor_ = 0;
    std::uint64_t bit_buf_ = 0;
    unsigned bits_left_ = 0;
};

} // namespace knapcount
