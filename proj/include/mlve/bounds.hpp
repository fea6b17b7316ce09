#pragma once
// Numeric instances of the block bounds, the geometric bound series, the
// Stirling-type chain, the large-M threshold and the Borel disk.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "mlve/combinatorics.hpp"
#include "mlve/error.hpp"
#include "mlve/numeric.hpp"

namespace mlve {

/// log((2m)!!) = m log 2 + log m! for the even double factorial; (0)!! = 1.
inline long double log_even_double_factorial(int two_m) {
    detail::require(two_m >= 0 && two_m % 2 == 0, "log_even_double_factorial: argument must be even and >= 0");
    const long double m = two_m / 2;
    return m * std::log(2.0L) + std::lgamma(m + 1.0L);
}

/// (2m)!! exactly while it fits.
inline std::uint64_t even_double_factorial(int two_m) {
    detail::require(two_m >= 0 && two_m % 2 == 0 && two_m <= 40, "even_double_factorial: argument out of range");
    std::uint64_t r = 1;
    for (int k = two_m; k > 1; k -= 2) r *= static_cast<std::uint64_t>(k);
    return r;
}

namespace detail {

inline void check_block(int size, const std::vector<int>& degrees, const std::vector<int>& slices) {
    require(size >= 1, "block size must be >= 1");
    require(static_cast<int>(degrees.size()) == size && static_cast<int>(slices.size()) == size,
            "one degree and one slice per block vertex required");
    int sum = 0;
    for (int d : degrees) {
        require(d >= 0, "degrees must be >= 0");
        sum += d;
    }
    require(sum == 2 * size - 2, "degree sum must equal 2|B| - 2");
    if (size >= 2)
        for (int d : degrees) require(d >= 1, "tree degrees must be >= 1 when |B| >= 2");
}

} // namespace detail

/// sqrt((4|B|-4)!!) prod_a d_a! |lambda|^{d_a} M^{-(j_a - 2)}.
inline double lemma35_bound(int size, const std::vector<int>& degrees, const std::vector<int>& slices,
                            double lambda_abs, double M) {
    detail::check_block(size, degrees, slices);
    detail::require(lambda_abs >= 0.0 && lambda_abs <= 1.0, "lemma35_bound: need 0 <= |lambda| <= 1");
    detail::require(M > 1.0, "lemma35_bound: M must be > 1");
    long double log_v = 0.5L * log_even_double_factorial(4 * size - 4);
    long double v = 1.0L;
    for (int a = 0; a < size; ++a) {
        const int d = degrees[static_cast<std::size_t>(a)];
        log_v += std::lgamma(d + 1.0L) - (slices[static_cast<std::size_t>(a)] - 2) * std::log(static_cast<long double>(M));
        v *= std::pow(static_cast<long double>(lambda_abs), d);
    }
    return static_cast<double>(v * std::exp(log_v));
}

/// Complex-coupling block bound; requires |lambda|^2 < cos 2 gamma.
inline double lemma37_bound(int size, const std::vector<int>& degrees, const std::vector<int>& slices, cplx lambda,
                            double M) {
    detail::check_block(size, degrees, slices);
    const double r2 = std::norm(lambda);
    const double c2g = std::cos(2.0 * std::arg(lambda));
    detail::require(r2 < c2g || r2 == 0.0, "lemma37_bound: lambda outside the domain |lambda|^2 < cos 2 gamma");
    if (size == 1) return r2 * std::pow(M, -(slices[0] - 2));
    return std::pow(c2g, -0.5 * size) * lemma35_bound(size, degrees, slices, std::abs(lambda), M);
}

struct Lemma36Result {
    double S = 0.0;              // sum_{q <= Q_max} |lambda|^{2q-2} 3^{3q} q^q M^{-q^2/4}
    double partial_sum = 0.0;    // sum_{B <= B_max} S^B
    bool converges = false;      // S < 1
    double inner_tail = 0.0;     // sum_{q <= Q_max} |lambda|^{2q-2} M^{-q/8}
    double inner_tail_bound = 0.0; // 1 / (M^{1/8} - |lambda|^2), +inf if not positive
    bool tail_ok = false;
};

/// Terms of the geometric bound series, evaluated in the log domain.
inline Lemma36Result lemma36_series(double lambda_abs, double M, int Q_max, int B_max) {
    detail::require(M > 4.0, "lemma36_series: M must be > 4");
    detail::require(Q_max >= 1 && B_max >= 0, "lemma36_series: invalid truncation");
    detail::require(lambda_abs >= 0.0, "lemma36_series: |lambda| must be >= 0");
    const long double lm = std::log(static_cast<long double>(M));
    const long double ll = lambda_abs > 0.0 ? std::log(static_cast<long double>(lambda_abs)) : 0.0L;
    long double S = 0.0L, tail = 0.0L;
    for (int q = 1; q <= Q_max; ++q) {
        if (lambda_abs == 0.0 && q > 1) break;
        const long double lq = (2.0L * q - 2.0L) * ll;
        S += std::exp(lq + 3.0L * q * std::log(3.0L) + q * std::log(static_cast<long double>(q)) - q * q / 4.0L * lm);
        tail += std::exp(lq - q / 8.0L * lm);
    }
    Lemma36Result r;
    r.S = static_cast<double>(S);
    long double ps = 0.0L, sb = 1.0L;
    for (int b = 0; b <= B_max; ++b) {
        ps += sb;
        sb *= S;
    }
    r.partial_sum = static_cast<double>(ps);
    r.converges = S < 1.0L;
    r.inner_tail = static_cast<double>(tail);
    const long double den = std::pow(static_cast<long double>(M), 0.125L) - static_cast<long double>(lambda_abs) * lambda_abs;
    r.inner_tail_bound = den > 0 ? static_cast<double>(1.0L / den) : INFINITY;
    r.tail_ok = den > 0 && tail <= 1.0L / den * (1.0L + 1e-15L);
    return r;
}

struct ChainRow {
    int q = 0;
    long double log_lhs = 0.0L;
    long double log_rhs = 0.0L;
    long double margin() const { return log_rhs - log_lhs; } // >= 0 when the inequality holds
};

struct ChainReport {
    std::vector<ChainRow> rows;
    bool holds = true;
    long double worst_margin = INFINITY;
};

/// 2/(q-1)! sqrt((4q-4)!!) (3q-3)!/(2q-1)! <= 3^{3q} e^{-q} q^q, per q.
inline ChainReport stirling_chain_check(int q_lo, int q_hi) {
    detail::require(q_lo >= 1 && q_hi >= q_lo, "stirling_chain_check: invalid q range");
    ChainReport rep;
    for (int q = q_lo; q <= q_hi; ++q) {
        ChainRow r;
        r.q = q;
        r.log_lhs = std::log(2.0L) - std::lgamma(static_cast<long double>(q)) + 0.5L * log_even_double_factorial(4 * q - 4) +
                    std::lgamma(3.0L * q - 2.0L) - std::lgamma(2.0L * q);
        r.log_rhs = 3.0L * q * std::log(3.0L) - q + q * std::log(static_cast<long double>(q));
        rep.worst_margin = std::min(rep.worst_margin, r.margin());
        if (r.margin() < 0) rep.holds = false;
        rep.rows.push_back(r);
    }
    return rep;
}

struct ThresholdRow {
    int q = 0;
    double value = 0.0; // 3^{3q} q^q M^{-q^2/8}
    bool violates = false;
};

struct ThresholdReport {
    std::vector<ThresholdRow> rows;
    std::vector<int> violations;
};

inline ThresholdReport m_threshold_check(double M, int q_lo, int q_hi) {
    detail::require(M > 1.0 && q_lo >= 1 && q_hi >= q_lo, "m_threshold_check: invalid arguments");
    ThresholdReport rep;
    for (int q = q_lo; q <= q_hi; ++q) {
        const long double lv = 3.0L * q * std::log(3.0L) + q * std::log(static_cast<long double>(q)) -
                               q * static_cast<long double>(q) / 8.0L * std::log(static_cast<long double>(M));
        ThresholdRow r{q, static_cast<double>(std::exp(lv)), lv > 0};
        if (r.violates) rep.violations.push_back(q);
        rep.rows.push_back(r);
    }
    return rep;
}

struct BorelPoint {
    cplx g;
    bool inside_lambda = false; // |lambda|^2 < cos 2 gamma
    bool inside_disk = false;   // |g - 1/2| < 1/2
    bool inside_inverse = false; // Re(1/g) > 1
    bool boundary = false;      // on |g - 1/2| = 1/2 within tolerance
};

/// Domain predicates for g = lambda^2. The boundary (including g = 0) is excluded.
inline BorelPoint borel_domain_g(cplx g, double boundary_tol = 1e-12) {
    BorelPoint b;
    b.g = g;
    const double dist = std::abs(g - 0.5);
    b.boundary = std::abs(dist - 0.5) <= boundary_tol;
    const double r2 = std::abs(g);
    const double c2g = std::cos(std::arg(g));
    b.inside_lambda = !b.boundary && r2 > 0.0 && r2 < c2g;
    b.inside_disk = !b.boundary && dist < 0.5;
    b.inside_inverse = !b.boundary && r2 > 0.0 && (1.0 / g).real() > 1.0;
    return b;
}

inline BorelPoint borel_domain(cplx lambda, double boundary_tol = 1e-12) {
    return borel_domain_g(lambda * lambda, boundary_tol);
}

/// Per-term bound: 2^{#Fermionic edges} times a block bound per Bosonic block.
/// Singletons use |lambda|^2 M^{-(j-2)}; larger blocks the tree bound with the
/// block's tree degrees.
inline double assemble_term_bound(const Jungle& jungle, const std::vector<int>& slices, double lambda_abs, double M) {
    detail::require(static_cast<int>(slices.size()) == jungle.n, "assemble_term_bound: one slice per vertex required");
    detail::require(jungle.is_spanning(), "assemble_term_bound: jungle must be spanning");
    const auto deg = jungle.bosonic_forest().degrees();
    double bound = std::ldexp(1.0, static_cast<int>(jungle.fermionic.size()));
    for (const auto& block : jungle.blocks().blocks) {
        std::vector<int> d, j;
        for (int a : block) {
            d.push_back(deg[static_cast<std::size_t>(a)]);
            j.push_back(slices[static_cast<std::size_t>(a)]);
        }
        const int size = static_cast<int>(block.size());
        bound *= size == 1 ? lambda_abs * lambda_abs * std::pow(M, -(j[0] - 2))
                           : lemma35_bound(size, d, j, lambda_abs, M);
    }
    return bound;
}

/// Smallest slice sum over injective assignments of |B| slices >= j_min.
inline long hardcore_min_slice_sum(int j_min, int size) {
    return static_cast<long>(j_min) * size + static_cast<long>(size) * (size - 1) / 2;
}

} // namespace mlve
