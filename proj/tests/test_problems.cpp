#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vigls/knapsack.hpp"
#include "vigls/nk.hpp"

using namespace vigls;
using vigls::testing::bits;
using vigls::testing::random_bits;

TEST(NkGenerate, AdjacentMasksWrapAround) {
    const auto inst = nk_generate(6, 3, NkModel::adjacent, 1);
    const std::vector<std::vector<std::size_t>> expected{{0, 1, 2}, {1, 2, 3}, {2, 3, 4},
                                                         {3, 4, 5}, {4, 5, 0}, {5, 0, 1}};
    EXPECT_EQ(inst.masks(), expected);
}

TEST(NkGenerate, RandomMasksContainOwnIndexAndAreDistinct) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = nk_generate(6, 3, NkModel::random, seed);
        for (std::size_t i = 0; i < 6; ++i) {
            const auto& m = inst.masks()[i];
            ASSERT_EQ(m.size(), 3u);
            EXPECT_EQ(m[0], i);
            EXPECT_EQ(std::set<std::size_t>(m.begin(), m.end()).size(), 3u);
            for (auto v : m) {
                EXPECT_LT(v, 6u);
            }
        }
    }
}

TEST(NkGenerate, TablesLieInUnitInterval) {
    const auto inst = nk_generate(30, 4, NkModel::random, 5);
    for (const auto& t : inst.tables()) {
        ASSERT_EQ(t.size(), 16u);
        for (double v : t) {
            EXPECT_GE(v, 0.0);
            EXPECT_LT(v, 1.0);
        }
    }
}

TEST(NkGenerate, RejectsBadParameters) {
    EXPECT_THROW(nk_generate(3, 4, NkModel::adjacent, 1), std::invalid_argument);
    EXPECT_THROW(nk_generate(5, 1, NkModel::adjacent, 1), std::invalid_argument);
}

TEST(NkGenerate, SameSeedSerializesIdentically) {
    const auto a = to_json(nk_generate(20, 3, NkModel::random, 8)).dump();
    const auto b = to_json(nk_generate(20, 3, NkModel::random, 8)).dump();
    const auto c = to_json(nk_generate(20, 3, NkModel::random, 9)).dump();
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(NkJson, RoundTripPreservesEvaluation) {
    const auto inst = nk_generate(12, 3, NkModel::random, 4);
    const auto j = to_json(inst);
    EXPECT_EQ(j["masks"][0][0], 1); // 1-based on disk
    const auto back = nk_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.masks(), inst.masks());
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        const auto x = random_bits(12, rng);
        EXPECT_EQ(back.evaluate(x), inst.evaluate(x));
    }
}

TEST(NkEvaluate, ConstantTables) {
    const std::vector<std::vector<std::size_t>> masks{{0, 1, 2}, {1, 2, 3}, {2, 3, 0}, {3, 0, 1}};
    const NkInstance inst(4, 3, NkModel::adjacent, masks, std::vector<std::vector<double>>(4, std::vector<double>(8, 0.5)));
    for (std::uint64_t v = 0; v < 16; ++v) {
        EXPECT_DOUBLE_EQ(inst.evaluate(BitString::from_u64(v, 4)), 0.5);
    }
}

TEST(NkEvaluate, TwoVariableHandComputed) {
    // table index bit b is x[mask[b]]; each f_i returns 0.5 * x_i
    const NkInstance inst(2, 2, NkModel::adjacent, {{0, 1}, {1, 0}}, {{0.0, 0.5, 0.0, 0.5}, {0.0, 0.5, 0.0, 0.5}});
    EXPECT_DOUBLE_EQ(inst.evaluate(bits("00")), 0.0);
    EXPECT_DOUBLE_EQ(inst.evaluate(bits("10")), 0.25);
    EXPECT_DOUBLE_EQ(inst.evaluate(bits("01")), 0.25);
    EXPECT_DOUBLE_EQ(inst.evaluate(bits("11")), 0.5);
}

TEST(NkEvaluate, InvariantToSubfunctionOrder) {
    const auto inst = nk_generate(40, 4, NkModel::random, 13);
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto x = random_bits(40, rng);
        double rev = 0.0;
        for (std::size_t i = 40; i-- > 0;) {
            rev += inst.contribution(i, x);
        }
        EXPECT_NEAR(inst.evaluate(x), rev / 40.0, 1e-12);
    }
}

TEST(NkEvaluate, FlipOutsideMaskLeavesContributionUnchanged) {
    const auto inst = nk_generate(15, 3, NkModel::random, 21);
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        const auto x = random_bits(15, rng);
        for (std::size_t i = 0; i < 15; ++i) {
            const auto& m = inst.masks()[i];
            for (std::size_t j = 0; j < 15; ++j) {
                if (std::find(m.begin(), m.end(), j) == m.end()) {
                    EXPECT_EQ(inst.contribution(i, flip(x, j)), inst.contribution(i, x));
                }
            }
        }
    }
}

TEST(NkEvaluate, RejectsMalformedInstances) {
    EXPECT_THROW(NkInstance(2, 2, NkModel::adjacent, {{1, 0}, {1, 0}}, {{0, 0, 0, 0}, {0, 0, 0, 0}}),
                 std::invalid_argument);
    EXPECT_THROW(NkInstance(2, 2, NkModel::adjacent, {{0, 1}, {1, 0}}, {{0, 0, 0, 1.0}, {0, 0, 0, 0}}),
                 std::invalid_argument);
}

TEST(NkEvaluator, TracksFlipsIncrementally) {
    const auto inst = nk_generate(25, 4, NkModel::random, 30);
    Rng rng(3);
    auto x = random_bits(25, rng);
    auto ev = inst.make_evaluator(x);
    for (int t = 0; t < 300; ++t) {
        const auto g = rng.uniform_index(25);
        const double d = ev.delta(g);
        ev.flip(g);
        x.toggle(g);
        EXPECT_NEAR(d, inst.evaluate(x) - inst.evaluate(flip(x, g)), 1e-12);
        EXPECT_NEAR(ev.fitness(), inst.evaluate(x), 1e-12);
    }
}

TEST(KnapsackGenerate, CapacityIsHalfTheWeights) {
    for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
        const auto inst = knapsack_generate(500, seed);
        const auto total = std::accumulate(inst.weights().begin(), inst.weights().end(), std::int64_t{0});
        EXPECT_EQ(inst.capacity(), total / 2);
        for (std::size_t i = 0; i < 500; ++i) {
            EXPECT_GE(inst.weights()[i], 5);
            EXPECT_LE(inst.weights()[i], 20);
            EXPECT_GE(inst.profits()[i], 40);
            EXPECT_LE(inst.profits()[i], 100);
        }
    }
}

TEST(KnapsackInstance, SingleItemCapacity) {
    const KnapsackInstance inst({10}, {50});
    EXPECT_EQ(inst.capacity(), 5);
}

TEST(KnapsackInstance, PenaltyRateIsMaxRatio) {
    const KnapsackInstance inst({5, 10}, {100, 40});
    EXPECT_DOUBLE_EQ(inst.penalty_rate(), 20.0);
}

TEST(KnapsackEvaluate, Examples) {
    const KnapsackInstance one({10}, {50}, 10, 0);
    EXPECT_DOUBLE_EQ(one.evaluate(bits("0")), 0.0);
    EXPECT_DOUBLE_EQ(one.evaluate(bits("1")), 50.0);
    const KnapsackInstance two({10, 10}, {50, 60}, 10, 0);
    EXPECT_DOUBLE_EQ(two.evaluate(bits("11")), 50.0);
}

TEST(KnapsackEvaluate, BoundedByTotalProfitAndPenalized) {
    const auto inst = knapsack_generate(30, 3);
    const auto total = std::accumulate(inst.profits().begin(), inst.profits().end(), std::int64_t{0});
    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
        const auto x = random_bits(30, rng);
        std::int64_t w = 0;
        std::int64_t p = 0;
        for (std::size_t i = 0; i < 30; ++i) {
            if (x[i]) {
                w += inst.weights()[i];
                p += inst.profits()[i];
            }
        }
        const double f = inst.evaluate(x);
        EXPECT_LE(f, static_cast<double>(total));
        if (w > inst.capacity()) {
            EXPECT_LT(f, static_cast<double>(p));
        } else {
            EXPECT_EQ(f, static_cast<double>(p));
        }
    }
}

TEST(KnapsackEvaluator, DeltaMatchesFullEvaluation) {
    const auto inst = knapsack_generate(40, 12);
    Rng rng(8);
    auto x = random_bits(40, rng);
    auto ev = inst.make_evaluator(x);
    for (int t = 0; t < 400; ++t) {
        const auto g = rng.uniform_index(40);
        EXPECT_NEAR(ev.delta(g), inst.evaluate(flip(x, g)) - inst.evaluate(x), 1e-12);
        ev.flip(g);
        x.toggle(g);
    }
}

TEST(KnapsackJson, RoundTrip) {
    const auto inst = knapsack_generate(50, 2);
    const auto back = knapsack_from_json(nlohmann::json::parse(to_json(inst).dump()));
    EXPECT_EQ(back.weights(), inst.weights());
    EXPECT_EQ(back.profits(), inst.profits());
    EXPECT_EQ(back.capacity(), inst.capacity());
    EXPECT_EQ(back.penalty_rate(), inst.penalty_rate());
    EXPECT_EQ(back.seed(), inst.seed());
}
