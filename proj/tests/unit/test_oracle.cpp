#include <gtest/gtest.h>

#include "mlve/oracle.hpp"
#include "mlve/quadrature.hpp"

using namespace mlve;

namespace {

ModelParams reference_params() {
    ModelParams p;
    p.lambda = 0.2;
    return p;
}

} // namespace

TEST(GaussHermite, MomentsAndSymmetry) {
    for (int n : {20, 64, 200, 400}) {
        const auto r = gauss_hermite_normal(n);
        double m0 = 0, m2 = 0, m4 = 0, m1 = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double x = r.nodes[i], w = r.weights[i];
            m0 += w;
            m1 += w * x;
            m2 += w * x * x;
            m4 += w * x * x * x * x;
        }
        EXPECT_NEAR(m0, 1.0, 1e-13) << n;
        EXPECT_NEAR(m1, 0.0, 1e-13) << n;
        EXPECT_NEAR(m2, 1.0, 1e-12) << n;
        EXPECT_NEAR(m4, 3.0, 1e-11) << n;
    }
}

TEST(GaussLegendre, PolynomialExactness) {
    const auto r = gauss_legendre_unit(6);
    for (int k = 0; k <= 11; ++k) {
        double s = 0;
        for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
        EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << k;
    }
}

TEST(OrderedCube, VolumeAndMonomials) {
    const auto r = gauss_legendre_unit(6);
    for (int k = 0; k <= 3; ++k)
        EXPECT_NEAR(integrate_unit_cube_ordered<double>(k, r, [](std::span<const double>) { return 1.0; }), 1.0, 1e-14);
    // int_{[0,1]^3} min(w) = 1/4
    const double v = integrate_unit_cube_ordered<double>(3, r, [](std::span<const double> w) {
        return std::min({w[0], w[1], w[2]});
    });
    EXPECT_NEAR(v, 0.25, 1e-14);
}

TEST(Oracle, ZeroCouplingIsExact) {
    ModelParams p;
    p.lambda = 0.0;
    EXPECT_EQ(z_sigma_quadrature(p).value, cplx(1.0));
    EXPECT_EQ(logz_oracle(p), cplx(0.0));
}

TEST(Oracle, RealCouplingGivesRealZ) {
    const auto z = z_sigma_quadrature(reference_params());
    EXPECT_TRUE(z.reliable);
    EXPECT_LT(std::abs(z.value.imag()), 1e-12);
    EXPECT_NEAR(z.value.real(), 0.972034138234188, 1e-12);
    EXPECT_NEAR(logz_oracle(reference_params()).real(), -0.0283643534983368, 1e-12);
}

TEST(Oracle, SliceFactorisedIntegrandAgrees) {
    const auto p = reference_params();
    EXPECT_LT(std::abs(z_sigma_quadrature_fixed(p, kOracleNodes, Integrand::sliced) - z_sigma_quadrature(p).value), 1e-12);
}

TEST(Oracle, SliceWindowAboveOne) {
    ModelParams p;
    p.lambda = 0.7;
    p.M = 3;
    p.j_min = 2;
    p.j_max = 3;
    for (double s : {-2.0, 0.3, 1.7})
        EXPECT_LT(std::abs(z_integrand(p, s) - z_integrand(p, s, Integrand::sliced)), 1e-13);
}

TEST(Oracle, ComplexCouplingStable) {
    ModelParams p;
    p.lambda = std::polar(0.3, std::numbers::pi / 8);
    const auto z = z_sigma_quadrature(p);
    EXPECT_TRUE(z.reliable);
    EXPECT_TRUE(std::isfinite(std::abs(logz_oracle(p))));
    // conjugate coupling gives the conjugate Z
    ModelParams q = p;
    q.lambda = std::conj(p.lambda);
    EXPECT_LT(std::abs(z_sigma_quadrature(q).value - std::conj(z.value)), 1e-13);
}

TEST(Oracle, UnreliableQuadratureThrows) {
    ModelParams p;
    p.lambda = std::polar(1.0, 0.7); // outside the domain, heavy oscillation
    p.M = 10;
    p.j_max = 1;
    EXPECT_THROW(logz_oracle(p, 50), ReliabilityError);
}

TEST(Oracle, FirstOrderIsSumOfSliceExpectations) {
    const auto p = reference_params();
    const auto rule = gauss_hermite_normal(300);
    cplx s = 0.0;
    for (int j = 1; j <= 3; ++j)
        for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * w_kernel_product(p, j, rule.nodes[i]);
    EXPECT_LT(std::abs(first_order_oracle(p) - s), 1e-12);
}

TEST(LogzScan, ContinuousBranch) {
    ModelParams p;
    const std::vector<double> ts{0.1, 0.2, 0.3, 0.4, 0.5};
    const auto v = logz_scan(p, std::polar(1.0, 0.3), ts);
    ASSERT_EQ(v.size(), ts.size());
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LT(std::abs(v[i].imag() - v[i - 1].imag()), 1.0);
}

TEST(Perturbative, FrozenCoefficients) {
    const auto c = perturbative_coefficients(reference_params(), 4);
    ASSERT_EQ(c.size(), 4u);
    double s2 = 0;
    for (int p = 1; p <= 7; ++p) s2 += 1.0 / (p * p);
    EXPECT_NEAR(c[0], -s2 / 2, 1e-15);
    EXPECT_NEAR(c[1], 1.38253760203439, 1e-12);
    EXPECT_NEAR(c[2], -6.75826960221394, 1e-11);
    EXPECT_NEAR(c[3], 48.4787067804873, 1e-10);
}

TEST(Perturbative, FitAgreesWithSeries) {
    const auto p = reference_params();
    const auto c = perturbative_coefficients(p, 3);
    const auto f = perturbative_coefficients_fit(p, 3, 0.01, 24, 4);
    EXPECT_NEAR(f[0], c[0], 1e-8);
    EXPECT_NEAR(f[1], c[1], 1e-5);
    EXPECT_NEAR(f[2], c[2], 1e-2);
}

TEST(Perturbative, BudgetIsEnforced) { EXPECT_THROW(perturbative_coefficients(reference_params(), 5), BudgetError); }
