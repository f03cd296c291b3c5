#include <catch2/catch_amalgamated.hpp>

#include "knapcount/knap01.hpp"
#include "knapcount/robp.hpp"
#include "knapcount/sources.hpp"

#include "oracles.hpp"

using namespace knapcount;

namespace {

Knapsack01Instance make_inst(std::vector<int> a, int b) {
    Knapsack01Instance inst;
    for (int ai : a) inst.a.emplace_back(ai);
    inst.b = b;
    return inst;
}

// Program accepting exactly {01, 10}: track the first bit, accept on mismatch.
Robp xor_program() {
    std::vector<std::vector<Robp::Transition>> trans(2);
    trans[0] = {Robp::Transition{{0, 1}}};
    trans[1] = {Robp::Transition{{0, 1}}, Robp::Transition{{2, 3}}};
    return Robp(2, std::move(trans), {0, 1, 1, 0});
}

Knapsack01Instance random_instance(CounterRng& rng, int max_n, int weight_bits) {
    const int n = 1 + static_cast<int>(rng.uniform_below_u64(max_n));
    Knapsack01Instance inst;
    Int total = 0;
    for (int i = 0; i < n; ++i) {
        Int ai = rng.uniform_below(Int(1) << weight_bits);
        total += ai;
        inst.a.push_back(std::move(ai));
    }
    inst.b = rng.uniform_below(total + 2);
    return inst;
}

} // namespace

TEST_CASE("eval follows labeled paths", "[robp]") {
    CHECK(Robp::constant(2, true).eval({false, false}));

    const Robp m = exact_program(make_inst({2, 3, 5}, 5));
    CHECK(m.eval({true, true, false}));   // 2+3 = 5 <= 5
    CHECK_FALSE(m.eval({false, true, true})); // 3+5 = 8 > 5

    CHECK_THROWS_AS(m.eval({true, true}), input_error);
}

TEST_CASE("accept_counts matches enumeration", "[robp]") {
    CHECK(accept_count(Robp::constant(3, true)) == 8);
    CHECK(accept_count(Robp::constant(3, false)) == 0);

    const Robp m = exact_program(make_inst({2, 3, 5}, 5));
    CHECK(accept_count(m) == 5); // frozen from exhaustive enumeration of {0,1}^3
    CHECK(accept_count(m) == oracles::robp_count_by_enumeration(m));

    // per-state counts sum across children
    const AcceptCounts counts = accept_counts(m);
    for (int i = 0; i < m.length(); ++i)
        for (std::size_t s = 0; s < m.width(i); ++s) {
            const auto& t = m.transitions(i)[s];
            CHECK(counts[i][s] == counts[i + 1][t.next[0]] + counts[i + 1][t.next[1]]);
        }
}

TEST_CASE("accept_counts equals enumeration on random programs", "[robp]") {
    CounterRng rng{2024, 11};
    for (int trial = 0; trial < 25; ++trial) {
        const Robp m = exact_program(random_instance(rng, 10, 6));
        CHECK(accept_count(m) == oracles::robp_count_by_enumeration(m));
    }
}

TEST_CASE("eval_prob is exact under sources", "[robp]") {
    const Robp m = exact_program(make_inst({2, 3, 5}, 5));
    CHECK(eval_prob(m, uniform_source(3)) == Rational(5, 8));

    CounterRng rng{7, 3};
    for (int trial = 0; trial < 8; ++trial) {
        const auto z = rng.next_bits(3);
        CHECK(eval_prob(m, point_source(z)) == (m.eval(z) ? 1 : 0));
    }

    CHECK(eval_prob(Robp::constant(4, true), hamming_slice_source(4, 2)) == 1);
    CHECK(eval_prob(Robp::constant(4, true), uniform_source(4)) == 1);

    CHECK_THROWS_AS(eval_prob(m, uniform_source(4)), input_error);
}

TEST_CASE("eval_prob under the uniform source recovers the accept count", "[robp]") {
    CounterRng rng{99, 5};
    for (int trial = 0; trial < 10; ++trial) {
        const Robp m = exact_program(random_instance(rng, 9, 5));
        CHECK(eval_prob(m, uniform_source(m.length())) * pow2(m.length()) == accept_count(m));
    }
}

TEST_CASE("uniform_accept_source is uniform on the accept set", "[robp]") {
    SECTION("constant-1 gives the uniform source") {
        const SmallSpaceSource d = uniform_accept_source(Robp::constant(2, true));
        for (const auto& x : oracles::all_strings(2)) CHECK(d.probability_of(x) == Rational(1, 4));
        for (int i = 0; i < 2; ++i)
            for (int z = 0; z < 2; ++z) CHECK(d.edges(i, 0)[z].prob == Rational(1, 2));
    }

    SECTION("two-string accept set splits evenly") {
        const SmallSpaceSource d = uniform_accept_source(xor_program());
        CHECK(d.probability_of({false, true}) == Rational(1, 2));
        CHECK(d.probability_of({true, false}) == Rational(1, 2));
        CHECK(d.probability_of({false, false}) == 0);
        CHECK(d.probability_of({true, true}) == 0);
    }

    SECTION("knapsack accept set: each solution has probability 1/count") {
        const Robp m = exact_program(make_inst({2, 3}, 3));
        const SmallSpaceSource d = uniform_accept_source(m);
        int accepted = 0;
        for (const auto& x : oracles::all_strings(2)) {
            if (m.eval(x)) {
                ++accepted;
                CHECK(d.probability_of(x) == Rational(1, 3));
            } else {
                CHECK(d.probability_of(x) == 0);
            }
        }
        CHECK(accepted == 3); // {00, 10, 01}
    }

    SECTION("path probabilities sum to exactly 1") {
        CounterRng rng{31, 1};
        for (int trial = 0; trial < 10; ++trial) {
            const Robp m = exact_program(random_instance(rng, 8, 4));
            if (accept_count(m) == 0) continue;
            const SmallSpaceSource d = uniform_accept_source(m);
            Rational total = 0;
            const Int count = accept_count(m);
            for (const auto& x : oracles::all_strings(m.length())) {
                const Rational p = d.probability_of(x);
                if (m.eval(x))
                    CHECK(p == Rational(1, count));
                else
                    CHECK(p == 0);
                total += p;
            }
            CHECK(total == 1);
        }
    }

    SECTION("empty accept set is an error") {
        CHECK_THROWS_AS(uniform_accept_source(Robp::constant(2, false)), input_error);
    }
}

TEST_CASE("intersect computes the conjunction", "[robp]") {
    const Robp m1 = exact_program(make_inst({2, 3, 5}, 5));
    const Robp m2 = exact_program(make_inst({1, 1, 1}, 1));

    SECTION("identity and constant-1 absorption") {
        const Robp id = intersect(std::vector<Robp>{m1});
        const Robp absorbed = intersect(std::vector<Robp>{Robp::constant(3, true), m1});
        for (const auto& x : oracles::all_strings(3)) {
            CHECK(id.eval(x) == m1.eval(x));
            CHECK(absorbed.eval(x) == m1.eval(x));
        }
    }

    SECTION("pair intersection count") {
        CHECK(accept_count(intersect(std::vector<Robp>{m1, m2})) == 4); // enumeration of {0,1}^3
    }

    SECTION("empty list is an input error") {
        CHECK_THROWS_AS(intersect(std::vector<const Robp*>{}), input_error);
    }

    SECTION("pointwise conjunction on random programs") {
        CounterRng rng{5150, 2};
        for (int trial = 0; trial < 10; ++trial) {
            const Knapsack01Instance ia = random_instance(rng, 6, 4);
            Knapsack01Instance ib = random_instance(rng, 6, 4);
            ib.a.resize(ia.a.size(), Int(0));
            const Robp a = exact_program(ia), b = exact_program(ib);
            const Robp both = intersect(std::vector<Robp>{a, b});
            for (const auto& x : oracles::all_strings(a.length()))
                CHECK(both.eval(x) == (a.eval(x) && b.eval(x)));
        }
    }
}

TEST_CASE("source sampling follows the exact distribution support", "[robp]") {
    const Robp m = exact_program(make_inst({2, 3}, 3));
    const SmallSpaceSource d = uniform_accept_source(m);
    CounterRng rng{123, 77};
    for (int i = 0; i < 200; ++i) {
        const auto x = d.sample(rng);
        CHECK(m.eval(x));
    }
}
