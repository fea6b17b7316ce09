#pragma once
// Reference values for Z and log Z from the one-dimensional sigma integral,
// and the first perturbative coefficients of log Z in g = lambda^2.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "mlve/error.hpp"
#include "mlve/model.hpp"
#include "mlve/numeric.hpp"
#include "mlve/quadrature.hpp"

namespace mlve {

enum class Integrand {
    full,   // prod over all p in the window
    sliced, // prod over slices of (1 + W_j)
};

struct OracleResult {
    cplx value;
    cplx doubled;       // same quantity with twice the nodes
    double delta = 0.0; // |value - doubled|
    bool reliable = false;
};

inline constexpr int kOracleNodes = 200;
inline constexpr double kOracleTolerance = 1e-10;

/// Integrand of Z at sigma over the slice window [M^{j_min-1}, N]:
/// prod_p exp(-i lambda sigma / p) / (1 - i lambda sigma / p).
inline cplx z_integrand(const ModelParams& params, double sigma, Integrand form = Integrand::full) {
    const cplx x = cplx(0.0, 1.0) * params.lambda * sigma;
    if (form == Integrand::sliced) {
        cplx prod = 1.0;
        for (int j = params.j_min; j <= params.j_max; ++j) prod *= 1.0 + w_kernel(params, j, sigma);
        return prod;
    }
    KahanSum<cplx> s;
    const std::int64_t lo = params.first_index(), hi = params.cutoff();
    for (std::int64_t p = hi; p >= lo; --p) {
        const cplx u = x / static_cast<double>(p);
        detail::check_pole(1.0 - u);
        s.add(-log2m(u));
    }
    return std::exp(s.value());
}

inline cplx z_sigma_quadrature_fixed(const ModelParams& params, int nodes, Integrand form = Integrand::full) {
    params.validate();
    const auto rule = gauss_hermite_normal(nodes);
    // divide by the discrete mass so that a constant integrand is reproduced exactly
    KahanSum<cplx> acc;
    KahanSum<double> mass;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        acc.add(rule.weights[i] * z_integrand(params, rule.nodes[i], form));
        mass.add(rule.weights[i]);
    }
    return acc.value() / mass.value();
}

/// Gauss-Hermite value of Z with a node-doubling reliability check.
inline OracleResult z_sigma_quadrature(const ModelParams& params, int nodes = kOracleNodes,
                                       Integrand form = Integrand::full, double tol = kOracleTolerance) {
    detail::require(nodes >= 50, "z_sigma_quadrature: need at least 50 nodes");
    OracleResult r;
    r.value = z_sigma_quadrature_fixed(params, nodes, form);
    r.doubled = z_sigma_quadrature_fixed(params, 2 * nodes, form);
    r.delta = std::abs(r.value - r.doubled);
    r.reliable = r.delta < tol;
    return r;
}

/// Principal log of Z; throws when Z is unreliable or too close to 0.
inline cplx logz_oracle(const ModelParams& params, int nodes = kOracleNodes) {
    const auto z = z_sigma_quadrature(params, nodes);
    if (!z.reliable)
        throw ReliabilityError("logz_oracle: node doubling changed Z by " + std::to_string(z.delta));
    if (std::abs(z.value) < 1e-8) throw ReliabilityError("logz_oracle: Z is too close to zero");
    return std::log(z.value);
}

/// log Z along lambda = t * direction, t in `ts` (ascending from near 0), with
/// the branch followed continuously from log Z(0) = 0.
inline std::vector<cplx> logz_scan(const ModelParams& base, cplx direction, const std::vector<double>& ts,
                                   int nodes = kOracleNodes) {
    std::vector<cplx> out;
    double prev_arg = 0.0;
    for (double t : ts) {
        ModelParams p = base;
        p.lambda = t * direction;
        const auto z = z_sigma_quadrature(p, nodes);
        if (!z.reliable) throw ReliabilityError("logz_scan: unreliable quadrature");
        double arg = std::arg(z.value);
        while (arg - prev_arg > std::numbers::pi) arg -= 2.0 * std::numbers::pi;
        while (arg - prev_arg < -std::numbers::pi) arg += 2.0 * std::numbers::pi;
        prev_arg = arg;
        out.emplace_back(std::log(std::abs(z.value)), arg);
    }
    return out;
}

/// sum_j E_nu[W_j] by one-dimensional quadrature.
inline cplx first_order_oracle(const ModelParams& params, int nodes = kOracleNodes) {
    const auto rule = gauss_hermite_normal(nodes);
    KahanSum<cplx> acc;
    for (int j = params.j_min; j <= params.j_max; ++j) {
        const SliceKernel k(params, j);
        for (std::size_t i = 0; i < rule.size(); ++i) acc.add(rule.weights[i] * k.w_derivative(0, rule.nodes[i]));
    }
    return acc.value();
}

inline constexpr int kMaxPerturbativeOrder = 4;

/// c_1..c_K of log Z = sum_k c_k g^k. Expands exp(sum_{k>=2} (i lambda sigma)^k s_k / k)
/// in lambda, integrates sigma^{2m} exactly ((2m-1)!!) and takes the log of the series.
inline std::vector<double> perturbative_coefficients(const ModelParams& params, int K) {
    detail::require(K >= 1, "perturbative_coefficients: K must be >= 1");
    if (K > kMaxPerturbativeOrder)
        throw BudgetError("perturbative_coefficients: K = " + std::to_string(K) + " exceeds the budget " +
                          std::to_string(kMaxPerturbativeOrder));
    params.validate();
    const int L = 2 * K; // lambda order
    std::vector<double> s(static_cast<std::size_t>(L + 1), 0.0);
    for (int k = 2; k <= L; ++k) {
        KahanSum<double> acc;
        for (std::int64_t p = params.cutoff(); p >= params.first_index(); --p)
            acc.add(std::pow(static_cast<double>(p), -k));
        s[static_cast<std::size_t>(k)] = acc.value();
    }
    // Series in lambda with coefficients polynomial in sigma; (i sigma)^k pairs give real
    // values after taking expectations, so track i^k explicitly.
    using Poly = std::vector<cplx>; // coefficient of sigma^m
    std::vector<Poly> A(static_cast<std::size_t>(L + 1), Poly(static_cast<std::size_t>(L + 1), 0.0));
    cplx ik = 1.0;
    for (int k = 1; k <= L; ++k) {
        ik *= cplx(0.0, 1.0);
        if (k >= 2) A[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = ik * s[static_cast<std::size_t>(k)] / static_cast<double>(k);
    }
    // E = exp(A) = sum_m A^m / m!
    std::vector<Poly> E(static_cast<std::size_t>(L + 1), Poly(static_cast<std::size_t>(L + 1), 0.0));
    E[0][0] = 1.0;
    std::vector<Poly> term = E;
    for (int m = 1; m <= L / 2; ++m) {
        std::vector<Poly> next(static_cast<std::size_t>(L + 1), Poly(static_cast<std::size_t>(L + 1), 0.0));
        for (int a = 0; a <= L; ++a)
            for (int b = 2; a + b <= L; ++b)
                for (int sa = 0; sa <= a; ++sa)
                    next[static_cast<std::size_t>(a + b)][static_cast<std::size_t>(sa + b)] +=
                        term[static_cast<std::size_t>(a)][static_cast<std::size_t>(sa)] * A[static_cast<std::size_t>(b)][static_cast<std::size_t>(b)] / static_cast<double>(m);
        term = next;
        for (int a = 0; a <= L; ++a)
            for (int sa = 0; sa <= L; ++sa) E[static_cast<std::size_t>(a)][static_cast<std::size_t>(sa)] += term[static_cast<std::size_t>(a)][static_cast<std::size_t>(sa)];
    }
    // z_m: coefficient of g^m in Z.
    std::vector<double> z(static_cast<std::size_t>(K + 1), 0.0);
    for (int m = 0; m <= K; ++m) {
        cplx acc = 0.0;
        for (int sa = 0; sa <= 2 * m; sa += 2) {
            double moment = 1.0; // (sa-1)!!
            for (int t = sa - 1; t > 1; t -= 2) moment *= t;
            acc += E[static_cast<std::size_t>(2 * m)][static_cast<std::size_t>(sa)] * moment;
        }
        z[static_cast<std::size_t>(m)] = acc.real();
    }
    // log(1 + u), u = sum_{m>=1} z_m g^m: c = sum_r (-1)^{r+1} u^r / r
    std::vector<double> c(static_cast<std::size_t>(K + 1), 0.0), upow(static_cast<std::size_t>(K + 1), 0.0);
    upow[0] = 1.0;
    for (int r = 1; r <= K; ++r) {
        std::vector<double> next(static_cast<std::size_t>(K + 1), 0.0);
        for (int a = 0; a <= K; ++a)
            for (int b = 1; a + b <= K; ++b) next[static_cast<std::size_t>(a + b)] += upow[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(b)];
        upow = next;
        const double sign = r % 2 ? 1.0 : -1.0;
        for (int m = 1; m <= K; ++m) c[static_cast<std::size_t>(m)] += sign * upow[static_cast<std::size_t>(m)] / r;
    }
    return {c.begin() + 1, c.end()};
}

/// Estimates c_1..c_K by a least-squares polynomial fit of log Z(g) on small g > 0.
inline std::vector<double> perturbative_coefficients_fit(const ModelParams& params, int K, double g_max,
                                                         int points = 24, int extra_degree = 3) {
    const int deg = K + extra_degree;
    std::vector<double> gs, ys;
    for (int i = 1; i <= points; ++i) {
        const double g = g_max * i / points;
        ModelParams p = params;
        p.lambda = std::sqrt(g);
        gs.push_back(g);
        ys.push_back(logz_oracle(p).real());
    }
    // Normal equations on scaled variable x = g / g_max, columns x^1..x^deg.
    const int nc = deg;
    std::vector<std::vector<long double>> A(static_cast<std::size_t>(nc), std::vector<long double>(static_cast<std::size_t>(nc + 1), 0.0L));
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const long double x = gs[i] / g_max;
        std::vector<long double> row(static_cast<std::size_t>(nc));
        long double xp = 1.0L;
        for (int c = 0; c < nc; ++c) row[static_cast<std::size_t>(c)] = (xp *= x);
        for (int r = 0; r < nc; ++r) {
            for (int c = 0; c < nc; ++c) A[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] += row[static_cast<std::size_t>(r)] * row[static_cast<std::size_t>(c)];
            A[static_cast<std::size_t>(r)][static_cast<std::size_t>(nc)] += row[static_cast<std::size_t>(r)] * ys[i];
        }
    }
    for (int c = 0; c < nc; ++c) {
        int piv = c;
        for (int r = c + 1; r < nc; ++r)
            if (std::abs(A[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) > std::abs(A[static_cast<std::size_t>(piv)][static_cast<std::size_t>(c)])) piv = r;
        std::swap(A[static_cast<std::size_t>(c)], A[static_cast<std::size_t>(piv)]);
        for (int r = 0; r < nc; ++r) {
            if (r == c) continue;
            const long double f = A[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] / A[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
            for (int k = c; k <= nc; ++k) A[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] -= f * A[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
        }
    }
    std::vector<double> out;
    double scale = 1.0;
    for (int c = 0; c < K; ++c) {
        scale *= g_max;
        out.push_back(static_cast<double>(A[static_cast<std::size_t>(c)][static_cast<std::size_t>(nc)] / A[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]) / scale);
    }
    return out;
}

} // namespace mlve
