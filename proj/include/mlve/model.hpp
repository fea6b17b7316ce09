#pragma once
// Toy vector model with 1/p propagator: slices, subtracted logarithm and
// the per-slice interaction kernels V_j, W_j = e^{-V_j} - 1 with derivatives.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlve/error.hpp"
#include "mlve/numeric.hpp"

namespace mlve {

struct ModelParams {
    cplx lambda{0.2, 0.0};
    int M = 2;
    int j_min = 1;
    int j_max = 3;

    void validate() const {
        detail::require(M >= 2, "slice base M must be >= 2");
        detail::require(j_min >= 1, "j_min must be >= 1");
        detail::require(j_max >= j_min, "j_max must be >= j_min");
        (void)cutoff();
    }
    /// UV cutoff N = M^{j_max} - 1.
    std::int64_t cutoff() const { return ipow_checked(M, j_max) - 1; }
    /// Lowest field index covered by the slice window.
    std::int64_t first_index() const { return ipow_checked(M, j_min - 1); }
    int num_slices() const { return j_max - j_min + 1; }
    double gamma() const { return std::arg(lambda); }
    cplx g() const { return lambda * lambda; }
};

struct SliceIndexSet {
    int j = 1;
    std::int64_t first = 1;
    std::int64_t last = 1;

    std::int64_t size() const { return last - first + 1; }
    bool contains(std::int64_t p) const { return p >= first && p <= last; }
};

/// I_j = [M^{j-1}, M^j - 1].
inline SliceIndexSet slice_range(int M, int j) {
    detail::require(M >= 2, "slice_range: M must be >= 2");
    detail::require(j >= 1, "slice_range: j must be >= 1");
    return {j, ipow_checked(M, j - 1), ipow_checked(M, j) - 1};
}

inline SliceIndexSet slice_range(const ModelParams& params, int j) {
    detail::require(j >= params.j_min && j <= params.j_max, "slice index outside the window");
    return slice_range(params.M, j);
}

/// log_2(1 - x) = x + log(1 - x), principal branch.
inline cplx log2m(const cplx& x) {
    const cplx one_minus = 1.0 - x;
    if (one_minus.imag() == 0.0 && one_minus.real() <= 0.0)
        throw std::domain_error("log2m: 1 - x on the branch cut or at the pole");
    if (std::norm(x) < 0.125 * 0.125) {
        // -sum_{k>=2} x^k / k; 40 terms reach below 1e-36 relative at |x| = 1/8.
        cplx acc = 0.0;
        cplx xk = x * x;
        for (int k = 2; k < 40; ++k) {
            const cplx term = xk / static_cast<double>(k);
            acc -= term;
            if (std::norm(term) <= 1e-36 * std::norm(acc)) break;
            xk *= x;
        }
        return acc;
    }
    return x + std::log(one_minus);
}

/// L_N = sum_{p=1}^N 1/p.
inline double self_loop_sum(std::int64_t N) {
    detail::require(N >= 1, "self_loop_sum: N must be >= 1");
    KahanSum<double> s;
    for (std::int64_t p = N; p >= 1; --p) s.add(1.0 / static_cast<double>(p));
    return s.value();
}

/// sum_{p in I_j} p^{-t}, summed from the largest index downwards.
inline double power_sum(const ModelParams& params, int j, double t) {
    detail::require(t >= 1.0, "power_sum: t must be >= 1");
    const auto I = slice_range(params, j);
    KahanSum<double> s;
    for (std::int64_t p = I.last; p >= I.first; --p) s.add(std::pow(static_cast<double>(p), -t));
    return s.value();
}

/// Upper bound M^j / M^{t(j-1)} on power_sum.
inline double power_sum_bound(const ModelParams& params, int j, double t) {
    const double M = params.M;
    return std::pow(M, j - t * (j - 1));
}

namespace detail {

inline void check_pole(const cplx& denom) {
    if (denom == cplx(0.0, 0.0)) throw std::domain_error("slice kernel: pole p = i lambda sigma");
}

} // namespace detail

/// V_j(sigma) = sum_{p in I_j} log_2(1 - i lambda sigma / p), direct summation.
inline cplx v_kernel(const ModelParams& params, int j, const cplx& sigma) {
    const auto I = slice_range(params, j);
    const cplx il = cplx(0.0, 1.0) * params.lambda * sigma;
    KahanSum<cplx> s;
    for (std::int64_t p = I.last; p >= I.first; --p) s.add(log2m(il / static_cast<double>(p)));
    return s.value();
}

/// W_j = e^{-V_j} - 1 through the sum of logarithms.
inline cplx w_kernel(const ModelParams& params, int j, const cplx& sigma) {
    return expm1(-v_kernel(params, j, sigma));
}

/// W_j through the product prod_p e^{-x_p} / (1 - x_p) - 1, x_p = i lambda sigma / p.
inline cplx w_kernel_product(const ModelParams& params, int j, const cplx& sigma) {
    const auto I = slice_range(params, j);
    const cplx il = cplx(0.0, 1.0) * params.lambda * sigma;
    cplx prod = 1.0;
    for (std::int64_t p = I.last; p >= I.first; --p) {
        const cplx x = il / static_cast<double>(p);
        detail::check_pole(1.0 - x);
        prod *= std::exp(-x) / (1.0 - x);
    }
    return prod - 1.0;
}

/// k-th derivative of -V_j at sigma (closed forms, direct summation).
inline cplx dv_derivative(const ModelParams& params, int j, int k, const cplx& sigma) {
    detail::require(k >= 1, "dv_derivative: k must be >= 1");
    const auto I = slice_range(params, j);
    const cplx i{0.0, 1.0};
    const cplx lam = params.lambda;
    KahanSum<cplx> s;
    if (k == 1) {
        for (std::int64_t p = I.last; p >= I.first; --p) {
            const double pd = static_cast<double>(p);
            const cplx den = pd * (pd - i * lam * sigma);
            detail::check_pole(den);
            s.add(-lam * lam * sigma / den);
        }
        return s.value();
    }
    const cplx ilk = std::pow(i * lam, k);
    for (std::int64_t p = I.last; p >= I.first; --p) {
        const cplx den = static_cast<double>(p) - i * lam * sigma;
        detail::check_pole(den);
        s.add(ilk / std::pow(den, k));
    }
    return static_cast<double>(factorial_u64(k - 1)) * s.value();
}

/// Integer partitions of q as multiplicity vectors: m[k-1] = number of parts
/// equal to k, so that sum_k k m_k = q. Ordered lexicographically in (m_1, m_2, ...).
inline std::vector<std::vector<int>> integer_partitions(int q) {
    detail::require(q >= 0, "integer_partitions: q must be >= 0");
    std::vector<std::vector<int>> out;
    std::vector<int> m(static_cast<std::size_t>(q), 0);
    // Recursive fill from the largest part downwards, then sort.
    auto rec = [&](auto&& self, int remaining, int max_part) -> void {
        if (remaining == 0) {
            out.push_back(m);
            return;
        }
        if (max_part == 0) return;
        for (int c = remaining / max_part; c >= 0; --c) {
            m[static_cast<std::size_t>(max_part - 1)] = c;
            self(self, remaining - c * max_part, max_part - 1);
        }
        m[static_cast<std::size_t>(max_part - 1)] = 0;
    };
    rec(rec, q, q);
    std::sort(out.begin(), out.end());
    return out;
}

/// q! / prod_k (m_k! (k!)^{m_k}), exact.
inline std::uint64_t faa_di_bruno_weight(std::span<const int> m) {
    int q = 0;
    for (std::size_t k = 0; k < m.size(); ++k) q += static_cast<int>(k + 1) * m[k];
    unsigned __int128 num = factorial_u64(q);
    unsigned __int128 den = 1;
    for (std::size_t k = 0; k < m.size(); ++k) {
        den *= factorial_u64(m[k]);
        for (int r = 0; r < m[k]; ++r) den *= factorial_u64(static_cast<int>(k + 1));
    }
    if (num % den != 0) throw std::logic_error("faa_di_bruno_weight: non-integer weight");
    return static_cast<std::uint64_t>(num / den);
}

/// Assembles d^q/dsigma^q of e^{f} - 1 from e^f and f', ..., f^{(q)}.
inline cplx faa_di_bruno_exp(int q, const cplx& exp_f, std::span<const cplx> f_derivs,
                             std::span<const std::vector<int>> partitions) {
    if (q == 0) return exp_f - 1.0;
    cplx acc = 0.0;
    for (const auto& m : partitions) {
        cplx term = static_cast<double>(faa_di_bruno_weight(m));
        for (std::size_t k = 0; k < m.size(); ++k)
            for (int r = 0; r < m[k]; ++r) term *= f_derivs[k];
        acc += term;
    }
    return exp_f * acc;
}

/// q-th derivative of W_j (q = 0 returns W_j itself), direct summation.
inline cplx dw_derivative(const ModelParams& params, int j, int q, const cplx& sigma) {
    detail::require(q >= 0, "dw_derivative: q must be >= 0");
    if (q == 0) return w_kernel(params, j, sigma);
    std::vector<cplx> d(static_cast<std::size_t>(q));
    for (int k = 1; k <= q; ++k) d[static_cast<std::size_t>(k - 1)] = dv_derivative(params, j, k, sigma);
    const auto parts = integer_partitions(q);
    return faa_di_bruno_exp(q, std::exp(-v_kernel(params, j, sigma)), d, parts);
}

/// Fast evaluator of e^{-V_j} and the derivatives of -V_j for one slice.
///
/// Small slices are summed directly. Large slices with |lambda sigma| small
/// against the first index switch to the moment expansion
///   -V_j = sum_{k>=2} (i lambda sigma)^k s_k / k,   s_k = sum_{p in I_j} p^{-k},
/// with the s_k precomputed once. Both paths agree to ~1e-15 relative.
class SliceKernel {
public:
    static constexpr int kMaxDerivative = 8;
    static constexpr std::int64_t kDirectSliceSize = 32;
    static constexpr double kSeriesRatio = 0.35;
    static constexpr int kSeriesTerms = 96;

    SliceKernel(const ModelParams& params, int j)
        : lambda_(params.lambda), slice_(slice_range(params, j)) {
        for (int q = 0; q <= kMaxDerivative; ++q) partitions_.push_back(integer_partitions(q));
        if (slice_.size() > kDirectSliceSize) {
            // Normalised moments s~_k = sum_p (first / p)^k, k = 0..kSeriesTerms+kMaxDerivative.
            const int K = kSeriesTerms + kMaxDerivative + 1;
            moments_.assign(static_cast<std::size_t>(K + 1), 0.0);
            std::vector<KahanSum<double>> s(static_cast<std::size_t>(K + 1));
            const double f = static_cast<double>(slice_.first);
            for (std::int64_t p = slice_.last; p >= slice_.first; --p) {
                const double r = f / static_cast<double>(p);
                double rk = 1.0;
                for (int k = 0; k <= K; ++k, rk *= r) s[static_cast<std::size_t>(k)].add(rk);
            }
            for (int k = 0; k <= K; ++k) moments_[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k)].value();
        }
    }

    const SliceIndexSet& slice() const { return slice_; }

    /// exp(-V_j(sigma)) and (-V_j)^{(k)}(sigma) for k = 1..derivs.size().
    void evaluate(const cplx& sigma, cplx& exp_neg_v, std::span<cplx> derivs) const {
        const cplx x = cplx(0.0, 1.0) * lambda_ * sigma;
        if (!moments_.empty() && std::norm(x) <= kSeriesRatio * kSeriesRatio * static_cast<double>(slice_.first) * static_cast<double>(slice_.first))
            evaluate_series(sigma, exp_neg_v, derivs);
        else
            evaluate_direct(sigma, exp_neg_v, derivs);
    }

    /// q-th derivative of W_j.
    cplx w_derivative(int q, const cplx& sigma) const {
        detail::require(q >= 0 && q <= kMaxDerivative, "SliceKernel: derivative order out of range");
        cplx e;
        cplx d[kMaxDerivative];
        if (q == 0) {
            cplx neg_v = neg_v_only(sigma);
            return expm1(neg_v);
        }
        evaluate(sigma, e, std::span<cplx>(d, static_cast<std::size_t>(q)));
        return faa_di_bruno_exp(q, e, std::span<const cplx>(d, static_cast<std::size_t>(q)),
                                partitions_[static_cast<std::size_t>(q)]);
    }

    cplx neg_v_only(const cplx& sigma) const {
        const cplx x = cplx(0.0, 1.0) * lambda_ * sigma;
        const double f = static_cast<double>(slice_.first);
        if (!moments_.empty() && std::norm(x) <= kSeriesRatio * kSeriesRatio * f * f) {
            const cplx xt = x / f;
            cplx acc = 0.0, xk = xt * xt;
            for (int k = 2; k <= kSeriesTerms; ++k) {
                const cplx term = xk * moments_[static_cast<std::size_t>(k)] / static_cast<double>(k);
                acc += term;
                if (std::norm(term) <= 1e-38 * std::norm(acc)) break;
                xk *= xt;
            }
            return acc;
        }
        KahanSum<cplx> s;
        for (std::int64_t p = slice_.last; p >= slice_.first; --p) s.add(-log2m(x / static_cast<double>(p)));
        return s.value();
    }

private:
    void evaluate_direct(const cplx& sigma, cplx& exp_neg_v, std::span<cplx> derivs) const {
        const cplx i{0.0, 1.0};
        const cplx il = i * lambda_;
        const cplx x = il * sigma;
        KahanSum<cplx> nv;
        detail::require(derivs.size() <= static_cast<std::size_t>(kMaxDerivative), "SliceKernel: too many derivatives requested");
        KahanSum<cplx> acc[kMaxDerivative];
        for (std::int64_t p = slice_.last; p >= slice_.first; --p) {
            const double pd = static_cast<double>(p);
            nv.add(-log2m(x / pd));
            if (derivs.empty()) continue;
            const cplx den = pd - x;
            detail::check_pole(den);
            const cplx inv = 1.0 / den;
            // k = 1: -lambda^2 sigma / (p (p - i lambda sigma)) = i lambda * x / (p den)
            acc[0].add(il * x * inv / pd);
            cplx pw = il * inv;
            for (std::size_t k = 1; k < derivs.size(); ++k) {
                pw *= il * inv;
                acc[k].add(pw);
            }
        }
        exp_neg_v = std::exp(nv.value());
        for (std::size_t k = 0; k < derivs.size(); ++k) {
            double fact = static_cast<double>(factorial_u64(static_cast<int>(k)));
            derivs[k] = k == 0 ? acc[0].value() : fact * acc[k].value();
        }
    }

    void evaluate_series(const cplx& sigma, cplx& exp_neg_v, std::span<cplx> derivs) const {
        const cplx il = cplx(0.0, 1.0) * lambda_;
        const double f = static_cast<double>(slice_.first);
        const cplx xt = il * sigma / f;
        exp_neg_v = std::exp(neg_v_only(sigma));
        if (derivs.empty()) return;
        // (-V)' = (i lambda / f) sum_{k>=2} xt^{k-1} s~_k
        {
            cplx acc = 0.0, xk = xt;
            for (int k = 2; k <= kSeriesTerms; ++k) {
                const cplx term = xk * moments_[static_cast<std::size_t>(k)];
                acc += term;
                if (std::norm(term) <= 1e-38 * std::norm(acc)) break;
                xk *= xt;
            }
            derivs[0] = il / f * acc;
        }
        // (-V)^{(m)} = (m-1)! (i lambda / f)^m sum_{r>=0} C(m+r-1, r) xt^r s~_{m+r}
        cplx ilf_pow = il / f;
        for (std::size_t mi = 1; mi < derivs.size(); ++mi) {
            const int m = static_cast<int>(mi) + 1;
            ilf_pow *= il / f;
            cplx acc = 0.0, xr = 1.0;
            double binom = 1.0;
            for (int r = 0; r <= kSeriesTerms; ++r) {
                const cplx term = binom * xr * moments_[static_cast<std::size_t>(m + r)];
                acc += term;
                if (r > 0 && std::norm(term) <= 1e-38 * std::norm(acc)) break;
                binom = binom * static_cast<double>(m + r) / static_cast<double>(r + 1);
                xr *= xt;
            }
            derivs[mi] = static_cast<double>(factorial_u64(m - 1)) * ilf_pow * acc;
        }
    }

    cplx lambda_;
    SliceIndexSet slice_;
    std::vector<double> moments_;
    std::vector<std::vector<std::vector<int>>> partitions_;
};

} // namespace mlve
