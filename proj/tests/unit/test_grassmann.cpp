#include <gtest/gtest.h>

#include <random>

#include "mlve/grassmann.hpp"

using namespace mlve;

namespace {

Eigen::MatrixXd random_matrix(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = U(rng);
    return m;
}

} // namespace

TEST(BruteForce, Normalisation) {
    Eigen::MatrixXd a(1, 1);
    a << 0.37;
    EXPECT_DOUBLE_EQ(brute_force_grassmann(a, {}), 0.37);
    std::mt19937_64 rng(1);
    const auto m = random_matrix(2, rng);
    EXPECT_NEAR(brute_force_grassmann(m, {}), m.determinant(), 1e-15);
    for (int d = 3; d <= 6; ++d) {
        const auto md = random_matrix(d, rng);
        EXPECT_NEAR(brute_force_grassmann(md, {}), md.determinant(), 1e-12) << d;
    }
}

TEST(BruteForce, RepeatedGeneratorIsZero) {
    std::mt19937_64 rng(2);
    const auto m = random_matrix(3, rng);
    const std::vector<Generator> mono{psi(0), psi(0)};
    EXPECT_EQ(brute_force_grassmann(m, mono), 0.0);
    const std::vector<Generator> mono2{psibar(1), psi(2), psibar(1)};
    EXPECT_EQ(brute_force_grassmann(m, mono2), 0.0);
}

TEST(Minor, Examples) {
    std::mt19937_64 rng(3);
    const auto m = random_matrix(4, rng);
    EXPECT_NEAR(grassmann_minor(MinorSpec<double>{m, {}, {}}), m.determinant(), 1e-14);
    EXPECT_DOUBLE_EQ(grassmann_minor(MinorSpec<double>{Eigen::MatrixXd::Identity(3, 3), {0}, {0}}), 1.0);
    const double y = 0.3;
    Eigen::MatrixXd two(2, 2);
    two << 1, y, y, 1;
    const double v = grassmann_minor(MinorSpec<double>{two, {0}, {1}});
    EXPECT_NEAR(std::abs(v), y, 1e-15);
    EXPECT_NEAR(v, brute_force_grassmann(two, minor_monomial({0}, {1})), 1e-15);
}

TEST(Minor, RepeatedIndexThrows) {
    EXPECT_THROW(grassmann_minor(MinorSpec<double>{Eigen::MatrixXd::Identity(3, 3), {0, 0}, {1, 2}}), std::invalid_argument);
}

TEST(Minor, ExhaustiveAgainstBruteForce) {
    std::mt19937_64 rng(4);
    for (int dim = 1; dim <= 4; ++dim) {
        const auto m = random_matrix(dim, rng);
        const auto E = GrassmannElement<double>::exp_bilinear(m);
        // all ordered pairs of equal-length injective index lists
        std::vector<std::vector<int>> lists{{}};
        for (std::size_t cur = 0; cur < lists.size(); ++cur)
            for (int i = 0; i < dim; ++i)
                if (std::find(lists[cur].begin(), lists[cur].end(), i) == lists[cur].end()) {
                    auto l = lists[cur];
                    l.push_back(i);
                    lists.push_back(l);
                }
        for (const auto& a : lists)
            for (const auto& b : lists) {
                if (a.size() != b.size()) continue;
                EXPECT_NEAR(grassmann_minor(MinorSpec<double>{m, a, b}), E.integrate_with(minor_monomial(a, b)), 1e-12);
            }
    }
}

TEST(Minor, ComplexScalar) {
    Eigen::MatrixXcd m(3, 3);
    m << cplx(1, 0.2), cplx(0.1, -0.3), 0.0, cplx(0.4, 0), cplx(1, 0), cplx(0, 0.5), cplx(-0.2, 0.1), 0.3, cplx(0.9, -0.1);
    for (const auto& [a, b] : std::vector<std::pair<std::vector<int>, std::vector<int>>>{{{}, {}}, {{0}, {2}}, {{2, 1}, {0, 2}}}) {
        const cplx got = grassmann_minor(MinorSpec<cplx>{m, a, b});
        const cplx want = brute_force_grassmann(m, minor_monomial(a, b));
        EXPECT_NEAR(std::abs(got - want), 0.0, 1e-14);
    }
}

TEST(FermionicFactor, Examples) {
    // one block, distinct slices, no Fermionic edges
    FermionicFactorInput a{Jungle{3, {Edge(0, 1), Edge(1, 2)}, {}}, {1, 2, 3}, {}};
    EXPECT_DOUBLE_EQ(fermionic_factor(a), 1.0);
    // hardcore violation
    FermionicFactorInput b{Jungle{3, {Edge(0, 1), Edge(1, 2)}, {}}, {1, 2, 1}, {}};
    EXPECT_EQ(fermionic_factor(b), 0.0);
    // two singletons, one Fermionic edge, equal slices, w = 1
    FermionicFactorInput c{Jungle{2, {}, {Edge(0, 1)}}, {2, 2}, {1.0}};
    const double v = fermionic_factor(c);
    EXPECT_LE(std::abs(v), 2.0);
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
    const double m01 = grassmann_minor(MinorSpec<double>{ones, {0}, {1}});
    const double m10 = grassmann_minor(MinorSpec<double>{ones, {1}, {0}});
    EXPECT_DOUBLE_EQ(v, m01 + m10);
    EXPECT_LE(std::abs(m01), 1.0);
    // slice delta
    FermionicFactorInput d{Jungle{2, {}, {Edge(0, 1)}}, {1, 2}, {0.5}};
    EXPECT_EQ(fermionic_factor(d), 0.0);
}

TEST(LiftedY, PsdAndLayeredForm) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int n = 1; n <= 6; ++n) {
        const auto jungles = enumerate_jungles(n, true);
        for (int t = 0; t < 200; ++t) {
            const auto& jg = jungles[rng() % jungles.size()];
            std::vector<int> s(static_cast<std::size_t>(n));
            for (auto& x : s) x = 1 + static_cast<int>(rng() % 3);
            std::vector<double> w;
            for (std::size_t i = 0; i < jg.fermionic.size(); ++i) w.push_back(U(rng));
            const auto Y = lifted_y_matrix(jg, s, w);
            ASSERT_GE(min_eigenvalue(Y), -kPsdTolerance);
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i) v(i) = N(rng);
            EXPECT_NEAR(v.dot(Y * v), layered_quadratic_form(jg, s, w, v), 1e-10);
            EXPECT_TRUE(check_minor_bound(Y, 5, rng()).ok());
        }
    }
}

TEST(MinorBound, Examples) {
    const auto id = check_minor_bound(Eigen::MatrixXd::Identity(4, 4), 50);
    EXPECT_TRUE(id.ok());
    EXPECT_LE(id.worst_minor_margin, 1e-15);
    const auto ones = check_minor_bound(Eigen::MatrixXd::Ones(3, 3), 50);
    EXPECT_TRUE(ones.ok());
    EXPECT_NEAR(grassmann_minor(MinorSpec<double>{Eigen::MatrixXd::Ones(3, 3), {0}, {0}}), 0.0, 1e-15);
}

TEST(MinorBound, RejectsNonUnitDiagonal) {
    EXPECT_THROW(check_minor_bound(2.0 * Eigen::MatrixXd::Identity(2, 2), 1), std::invalid_argument);
}
