#include <gtest/gtest.h>

#include <random>

#include "mlve/bounds.hpp"

using namespace mlve;

TEST(DoubleFactorial, EvenValues) {
    EXPECT_EQ(even_double_factorial(0), 1u);
    EXPECT_EQ(even_double_factorial(4), 8u);
    EXPECT_EQ(even_double_factorial(8), 384u);
    for (int m = 0; m <= 20; m += 2)
        EXPECT_NEAR(std::exp(static_cast<double>(log_even_double_factorial(m))), static_cast<double>(even_double_factorial(m)),
                    1e-12 * static_cast<double>(even_double_factorial(m)));
}

TEST(RealBlockBound, Examples) {
    EXPECT_NEAR(lemma35_bound(1, {0}, {3}, 0.7, 10), 0.1, 1e-15);
    EXPECT_NEAR(lemma35_bound(2, {1, 1}, {3, 4}, 1.0, 10), std::sqrt(8.0) * 1e-3, 1e-15);
    EXPECT_EQ(lemma35_bound(3, {1, 2, 1}, {3, 4, 5}, 0.0, 10), 0.0);
}

TEST(RealBlockBound, RejectsInconsistentDegrees) {
    EXPECT_THROW(lemma35_bound(2, {1, 2}, {3, 4}, 0.5, 10), std::invalid_argument);
    EXPECT_THROW(lemma35_bound(2, {1}, {3, 4}, 0.5, 10), std::invalid_argument);
}

TEST(ComplexBlockBound, Examples) {
    EXPECT_NEAR(lemma37_bound(1, {0}, {3}, std::polar(0.3, std::numbers::pi / 8), 10), 0.009, 1e-15);
    // grows without bound as gamma -> pi/4
    double prev = 0.0;
    // |lambda|^2 = 0.0025 stays inside for every eps below
    for (double eps : {2e-1, 1e-1, 3e-2, 1e-2}) {
        const double b = lemma37_bound(2, {1, 1}, {3, 4}, std::polar(0.05, std::numbers::pi / 4 - eps), 10);
        EXPECT_GT(b, prev);
        prev = b;
    }
    EXPECT_GT(prev, 10.0 * lemma35_bound(2, {1, 1}, {3, 4}, 0.05, 10));
    EXPECT_THROW(lemma37_bound(2, {1, 1}, {3, 4}, std::polar(0.5, 0.7), 10), std::invalid_argument);
}

TEST(ComplexBlockBound, ReducesToRealBoundAtZeroAngle) {
    EXPECT_NEAR(lemma37_bound(3, {1, 2, 1}, {3, 4, 5}, 0.6, 10), lemma35_bound(3, {1, 2, 1}, {3, 4, 5}, 0.6, 10), 1e-18);
}

TEST(BoundSeries, Examples) {
    const auto z = lemma36_series(0.0, 1e8, 100, 20);
    EXPECT_NEAR(z.S, 27.0 * std::pow(1e8, -0.25), 1e-15);
    const auto one = lemma36_series(1.0, 1e8, 1000, 50);
    EXPECT_TRUE(one.converges);
    EXPECT_TRUE(one.tail_ok);
    EXPECT_NEAR(one.inner_tail_bound, 1.0 / 9.0, 1e-15);
    const auto small = lemma36_series(1.0, 5.0, 100, 10);
    EXPECT_FALSE(small.converges);
    EXPECT_TRUE(std::isfinite(small.S));
}

TEST(BoundSeries, TailOnLambdaGrid) {
    for (int i = 0; i <= 20; ++i) EXPECT_TRUE(lemma36_series(0.05 * i, 1e8, 1000, 50).tail_ok) << i;
}

TEST(StirlingChain, Examples) {
    const auto r = stirling_chain_check(1, 50);
    EXPECT_TRUE(r.holds);
    EXPECT_NEAR(std::exp(static_cast<double>(r.rows[0].log_lhs)), 2.0, 1e-14);
    EXPECT_NEAR(std::exp(static_cast<double>(r.rows[0].log_rhs)), 27.0 / std::exp(1.0), 1e-13);
    EXPECT_NEAR(std::exp(static_cast<double>(r.rows[1].log_lhs)), 2.0 * std::sqrt(8.0), 1e-13);
    EXPECT_NEAR(std::exp(static_cast<double>(r.rows[1].log_rhs)), 729.0 * std::exp(-2.0) * 4.0, 1e-10);
    EXPECT_GT(r.rows[49].margin(), 0.0L);
}

TEST(StirlingChain, HoldsToOneThousand) { EXPECT_TRUE(stirling_chain_check(1, 1000).holds); }

TEST(MThreshold, Examples) {
    const auto r = m_threshold_check(1e8, 1, 3);
    EXPECT_NEAR(r.rows[1].value, 0.2916, 1e-12);
    EXPECT_FALSE(r.rows[1].violates);
    EXPECT_NEAR(r.rows[0].value, 2.7, 1e-12);
    EXPECT_TRUE(r.rows[0].violates);
    ASSERT_EQ(r.violations, std::vector<int>{1});
    const auto r16 = m_threshold_check(1e16, 1, 1);
    EXPECT_NEAR(r16.rows[0].value, 0.27, 1e-13);
    EXPECT_TRUE(r16.violations.empty());
}

TEST(Borel, Examples) {
    EXPECT_TRUE(borel_domain(0.5).inside_lambda);
    EXPECT_TRUE(borel_domain(0.99).inside_disk);
    for (double r : {0.1, 0.5, 0.9}) EXPECT_FALSE(borel_domain(std::polar(r, std::numbers::pi / 4)).inside_lambda);
    const auto b = borel_domain_g({0.5, 0.5});
    EXPECT_TRUE(b.boundary);
    EXPECT_FALSE(b.inside_disk);
    EXPECT_NEAR((1.0 / b.g).real(), 1.0, 1e-15);
    EXPECT_TRUE(borel_domain_g(0.5).inside_disk);
    EXPECT_FALSE(borel_domain_g(1.2).inside_disk);
    EXPECT_TRUE(borel_domain_g({0.5, 0.49}).inside_disk);
    EXPECT_TRUE(borel_domain_g(0.0).boundary);
}

TEST(Borel, PredicatesAgree) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> R(0.0, 1.3), G(-std::numbers::pi, std::numbers::pi);
    for (int t = 0; t < 10000; ++t) {
        const auto b = borel_domain(std::polar(R(rng), G(rng)));
        if (b.boundary) continue;
        EXPECT_EQ(b.inside_lambda, b.inside_disk);
        EXPECT_EQ(b.inside_disk, b.inside_inverse);
    }
}

TEST(TermBound, Examples) {
    const double lam = 0.5, M = 10;
    EXPECT_NEAR(assemble_term_bound(Jungle{1, {}, {}}, {3}, lam, M), 0.25 * 0.1, 1e-16);
    EXPECT_NEAR(assemble_term_bound(Jungle{2, {}, {Edge(0, 1)}}, {3, 3}, lam, M), 2.0 * 0.025 * 0.025, 1e-16);
    EXPECT_NEAR(assemble_term_bound(Jungle{2, {Edge(0, 1)}, {}}, {3, 4}, lam, M),
                lemma35_bound(2, {1, 1}, {3, 4}, lam, M), 1e-18);
    // hardcore-violating slices still get a finite bound
    EXPECT_TRUE(std::isfinite(assemble_term_bound(Jungle{2, {Edge(0, 1)}, {}}, {3, 3}, lam, M)));
}

TEST(TermBound, HardcoreMinimum) {
    EXPECT_EQ(hardcore_min_slice_sum(3, 1), 3);
    EXPECT_EQ(hardcore_min_slice_sum(3, 3), 3 + 4 + 5);
}
