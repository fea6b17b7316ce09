#include <gtest/gtest.h>

#include "mlve/engine.hpp"
#include "mlve/oracle.hpp"

using namespace mlve;

namespace {

ModelParams reference_params() {
    ModelParams p;
    p.lambda = 0.2;
    p.M = 2;
    p.j_min = 1;
    p.j_max = 3;
    return p;
}

// partial sums for the reference parameters
constexpr double kS1 = -0.0285338471819781;
constexpr double kS2 = -0.0283681936344241;
constexpr double kLogZ = -0.0283643534983368;

cplx one_dim(const ModelParams& p, int j, int q, int nodes) {
    const auto rule = gauss_hermite_normal(nodes);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * dw_derivative(p, j, q, rule.nodes[i]);
    return acc;
}

} // namespace

TEST(BosonicBlock, SingletonZeroCoupling) {
    ModelParams p;
    p.lambda = 0.0;
    EXPECT_EQ(MlveEngine(p).bosonic_block_value({2}, Forest{1, {}}, {}), cplx(0.0));
}

TEST(BosonicBlock, SingletonMatchesOneDimensionalQuadrature) {
    ModelParams p;
    p.lambda = 0.5;
    const cplx a = one_dim(p, 1, 0, 100), b = one_dim(p, 1, 0, 200);
    EXPECT_LT(std::abs(a - b), 1e-9);
    EXPECT_LT(std::abs(MlveEngine(p).bosonic_block_value({1}, Forest{1, {}}, {}) - b), 1e-9);
}

TEST(BosonicBlock, PairAtZeroWeightFactorises) {
    ModelParams p;
    p.lambda = 0.5;
    const cplx v = MlveEngine(p).bosonic_block_value({1, 2}, Forest{2, {Edge(0, 1)}}, {{0.0}});
    const cplx want = one_dim(p, 1, 1, 200) * one_dim(p, 2, 1, 200);
    EXPECT_LT(std::abs(v - want), 1e-10);
}

TEST(BosonicBlock, PairAtUnitWeightIsOneDimensional) {
    ModelParams p;
    p.lambda = 0.4;
    const cplx v = MlveEngine(p).bosonic_block_value({2, 3}, Forest{2, {Edge(0, 1)}}, {{1.0}});
    const auto rule = gauss_hermite_normal(200);
    cplx want = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        want += rule.weights[i] * dw_derivative(p, 2, 1, rule.nodes[i]) * dw_derivative(p, 3, 1, rule.nodes[i]);
    EXPECT_LT(std::abs(v - want), 1e-10);
}

TEST(JungleTerm, TrivialCases) {
    ModelParams p;
    p.lambda = 0.0;
    EXPECT_EQ(jungle_term(p, Jungle{1, {}, {}}, {2}), cplx(0.0));
    const ModelParams q = reference_params();
    EXPECT_EQ(jungle_term(q, Jungle{2, {}, {Edge(0, 1)}}, {1, 2}), cplx(0.0));
}

TEST(JungleTerm, StructuralZerosAreExact) {
    const MlveEngine e(reference_params());
    EXPECT_EQ(e.jungle_term(Jungle{2, {Edge(0, 1)}, {}}, {2, 2}), cplx(0.0));
    EXPECT_EQ(e.jungle_term(Jungle{3, {Edge(0, 1)}, {Edge(1, 2)}}, {1, 3, 2}), cplx(0.0));
    EXPECT_EQ(e.jungle_term(Jungle{3, {Edge(0, 2)}, {Edge(1, 2)}}, {3, 3, 3}), cplx(0.0));
    EXPECT_TRUE(MlveEngine::is_structural_zero(Jungle{2, {Edge(0, 1)}, {}}, {1, 1}));
    EXPECT_FALSE(MlveEngine::is_structural_zero(Jungle{2, {Edge(0, 1)}, {}}, {1, 2}));
}

TEST(OrderContribution, ZeroCoupling) {
    ModelParams p;
    p.lambda = 0.0;
    EXPECT_EQ(order_contribution(p, 1), cplx(0.0));
    EXPECT_EQ(order_contribution(p, 2), cplx(0.0));
}

TEST(OrderContribution, FirstOrderMatchesOracle) {
    const auto p = reference_params();
    const cplx s1 = order_contribution(p, 1);
    EXPECT_LT(std::abs(s1 - first_order_oracle(p)), 1e-8);
    EXPECT_NEAR(s1.real(), kS1, 1e-10);
}

TEST(LogzTruncation, FrozenSecondOrder) {
    const auto p = reference_params();
    const auto r = MlveEngine(p).logz_truncation(2, logz_oracle(p));
    ASSERT_EQ(r.partial_sums.size(), 2u);
    EXPECT_NEAR(r.partial_sums[0].real(), kS1, 1e-10);
    EXPECT_NEAR(r.partial_sums[1].real(), kS2, 1e-10);
    EXPECT_NEAR(r.partial_sums[1].imag(), 0.0, 1e-15);
    EXPECT_LT(r.distances[1], r.distances[0]);
    EXPECT_NEAR(std::abs(logz_oracle(p) - cplx(kLogZ)), 0.0, 1e-12);
}

TEST(LogzTruncation, EmptyAndZero) {
    EXPECT_EQ(logz_truncation(reference_params(), 0).total, cplx(0.0));
    ModelParams p;
    p.lambda = 0.0;
    const auto r = logz_truncation(p, 2, logz_oracle(p));
    EXPECT_EQ(r.total, cplx(0.0));
    EXPECT_EQ(logz_oracle(p), cplx(0.0));
}

TEST(LogzTruncation, BudgetIsEnforced) {
    EXPECT_THROW(MlveEngine(reference_params()).order_contribution(kMaxEngineOrder + 1), BudgetError);
}

TEST(Engine, ConjugateSymmetryShortcutIsExact) {
    ModelParams p = reference_params();
    p.j_max = 2;
    EngineOptions full;
    full.conjugate_symmetry = false;
    const cplx a = MlveEngine(p).order_contribution(2);
    const cplx b = MlveEngine(p, full).order_contribution(2);
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-14);
    EXPECT_NEAR(b.imag(), 0.0, 1e-14); // real coupling gives a real order
}

TEST(Engine, ThreadCountDoesNotChangeResult) {
    ModelParams p = reference_params();
    EngineOptions one, three;
    three.threads = 3;
    EXPECT_EQ(MlveEngine(p, one).order_contribution(2), MlveEngine(p, three).order_contribution(2));
}

TEST(Engine, ComplexCouplingImprovesWithOrder) {
    ModelParams p = reference_params();
    p.lambda = std::polar(0.25, 0.3);
    const auto r = MlveEngine(p).logz_truncation(2, logz_oracle(p));
    EXPECT_LT(r.distances[1], r.distances[0]);
    EXPECT_GT(std::abs(r.partial_sums[1].imag()), 1e-6);
}

TEST(Engine, TraceReportsEveryTerm) {
    const auto p = reference_params();
    std::vector<TermRecord> recs;
    const cplx v = MlveEngine(p).order_contribution(2, [&](const TermRecord& r) { recs.push_back(r); });
    ASSERT_EQ(recs.size(), 2u * 9u); // 2 spanning jungles, 3^2 slice assignments
    cplx sum = 0.0;
    for (const auto& r : recs) {
        EXPECT_EQ(r.n, 2);
        EXPECT_EQ(r.slices.size(), 2u);
        sum += r.value;
    }
    EXPECT_NEAR(std::abs(sum / 2.0 - v), 0.0, 1e-14);
}
