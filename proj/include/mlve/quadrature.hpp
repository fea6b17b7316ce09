#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlve/error.hpp"

namespace mlve {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule mapped to [0, 1].
inline QuadratureRule gauss_legendre_unit(int n) {
    detail::require(n >= 1, "gauss_legendre_unit: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * k - 1.0) * z * p2 - (k - 1.0) * p3) / k;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = 0.5 * (1.0 - z);
        rule.nodes[hi] = 0.5 * (1.0 + z);
        rule.weights[lo] = 0.5 * w;
        rule.weights[hi] = 0.5 * w;
    }
    return rule;
}

/// Gauss-Hermite rule for the standard normal measure:
/// sum_i w_i f(x_i) ~ int dx e^{-x^2/2} / sqrt(2 pi) f(x).
/// Starting points from the Jacobi matrix eigenvalues, then Newton on the
/// orthonormal Hermite functions (which carry the e^{-z^2/2} factor and so
/// stay finite for large n).
inline QuadratureRule gauss_hermite_normal(int n) {
    detail::require(n >= 1 && n <= 600, "gauss_hermite_normal: n must be in [1, 600]");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    const double pim4 = 0.7511255444649425; // pi^{-1/4}
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double sqrt2 = std::sqrt(2.0), inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        double z = es.eigenvalues()(i);
        double h0 = 0.0, h1 = 0.0; // psi_{n-1}, psi_n at z
        int it = 0;
        for (; it < 50; ++it) {
            double p1 = pim4 * std::exp(-0.5 * z * z), p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            h1 = p1;
            h0 = p2;
            const double dz = h1 / (std::sqrt(2.0 * n) * h0);
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        if (it == 50 || !std::isfinite(z)) throw ReliabilityError("gauss_hermite_normal: Newton iteration did not converge");
        // recompute psi_{n-1} at the polished node
        double p1 = pim4 * std::exp(-0.5 * z * z), p2 = 0.0;
        for (int j = 0; j < n - 1; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
        }
        // physicists' weight e^{-z^2} / (n psi_{n-1}(z)^2)
        const double w = p1 == 0.0 ? 0.0 : std::exp(-z * z - 2.0 * std::log(std::abs(p1))) / n;
        rule.nodes[static_cast<std::size_t>(i)] = sqrt2 * z;
        rule.weights[static_cast<std::size_t>(i)] = inv_sqrt_pi * w;
    }
    // exact symmetry
    for (int i = 0; i < n / 2; ++i) {
        const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
        const double x = 0.5 * (rule.nodes[hi] - rule.nodes[lo]);
        const double w = 0.5 * (rule.weights[hi] + rule.weights[lo]);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = rule.weights[hi] = w;
    }
    if (n % 2) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

/// Integrates f over [0,1]^k by splitting the cube into the k! cells
/// w_{pi(1)} <= ... <= w_{pi(k)} and using a tensor Gauss-Legendre rule on
/// each cell. Functions built from min() of the coordinates are smooth on
/// every cell. Cells are visited in lexicographic permutation order.
template <class T, class F>
T integrate_unit_cube_ordered(int k, const QuadratureRule& rule, F&& f) {
    detail::require(k >= 0, "integrate_unit_cube_ordered: negative dimension");
    if (k == 0) {
        std::vector<double> none;
        return f(std::span<const double>(none));
    }
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> idx(static_cast<std::size_t>(k));
    std::vector<double> t(static_cast<std::size_t>(k)), w(static_cast<std::size_t>(k));
    const std::size_t n = rule.size();
    T total{};
    do {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            // t_{k-1} = u_{k-1}, t_{i} = t_{i+1} u_i; Jacobian prod_{i<k-1} t_{i+1}.
            double weight = 1.0;
            double upper = 1.0;
            for (int i = k - 1; i >= 0; --i) {
                const auto ui = static_cast<std::size_t>(i);
                t[ui] = upper * rule.nodes[idx[ui]];
                weight *= rule.weights[idx[ui]] * upper;
                upper = t[ui];
            }
            for (int i = 0; i < k; ++i) w[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = t[static_cast<std::size_t>(i)];
            total += weight * f(std::span<const double>(w));
            std::size_t d = 0;
            while (d < idx.size() && ++idx[d] == n) idx[d++] = 0;
            if (d == idx.size()) break;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

} // namespace mlve
