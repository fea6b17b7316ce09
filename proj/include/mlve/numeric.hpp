#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace mlve {

using cplx = std::complex<double>;

/// Neumaier-compensated accumulator; works for double and std::complex<double>.
template <class T>
class KahanSum {
public:
    void add(const T& x) {
        add_component(sum_, comp_, x);
    }
    T value() const { return sum_ + comp_; }

private:
    static void add_real(double& s, double& c, double x) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    static void add_component(double& s, double& c, double x) { add_real(s, c, x); }
    static void add_component(cplx& s, cplx& c, const cplx& x) {
        double sr = s.real(), si = s.imag(), cr = c.real(), ci = c.imag();
        add_real(sr, cr, x.real());
        add_real(si, ci, x.imag());
        s = {sr, si};
        c = {cr, ci};
    }

    T sum_{};
    T comp_{};
};

/// e^z - 1 without cancellation for small |z|.
inline cplx expm1(const cplx& z) {
    const double x = z.real(), y = z.imag();
    const double s = std::sin(0.5 * y);
    const double re = std::expm1(x) * std::cos(y) - 2.0 * s * s;
    const double im = std::exp(x) * std::sin(y);
    return {re, im};
}

/// Integer power with overflow check, used for slice boundaries M^j.
inline std::int64_t ipow_checked(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > INT64_MAX / base) throw std::overflow_error("integer power overflows int64");
        r *= base;
    }
    return r;
}

inline std::uint64_t factorial_u64(int n) {
    if (n < 0 || n > 20) throw std::overflow_error("factorial out of uint64 range");
    std::uint64_t r = 1;
    for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
    return r;
}

inline std::uint64_t binomial_u64(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (r > UINT64_MAX) throw std::overflow_error("binomial out of uint64 range");
    }
    return static_cast<std::uint64_t>(r);
}

} // namespace mlve
