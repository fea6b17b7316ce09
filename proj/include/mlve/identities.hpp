#pragma once
// Exact rational checks of the counting identities used by the bounds.

#include <boost/rational.hpp>

#include <cstdint>
#include <vector>

#include "mlve/error.hpp"
#include "mlve/model.hpp"
#include "mlve/numeric.hpp"

namespace mlve {

using Rational = boost::rational<long long>;

/// sum over {m_k}, sum k m_k = d, of 1 / prod(m_k! k^{m_k}); equals 1.
inline Rational partition_weight_sum(int d) {
    detail::require(d >= 1 && d <= 12, "partition_weight_sum: d must be in [1, 12]");
    Rational total(0);
    for (const auto& m : integer_partitions(d)) {
        long long den = 1;
        for (std::size_t k = 0; k < m.size(); ++k) {
            den *= static_cast<long long>(factorial_u64(m[k]));
            den *= ipow_checked(static_cast<std::int64_t>(k + 1), m[k]);
        }
        total += Rational(1, den);
    }
    return total;
}

/// sum over compositions d_1..d_q >= 1 of 2q - 2 of prod d_a; equals C(3q-3, q-2).
inline std::uint64_t coordination_sum(int q) {
    detail::require(q >= 2 && q <= 8, "coordination_sum: q must be in [2, 8]");
    std::uint64_t total = 0;
    std::vector<int> d(static_cast<std::size_t>(q), 1);
    auto rec = [&](auto&& self, int i, int left, std::uint64_t prod) -> void {
        if (i == q - 1) {
            if (left >= 1) total += prod * static_cast<std::uint64_t>(left);
            return;
        }
        for (int x = 1; x <= left - (q - 1 - i); ++x) self(self, i + 1, left - x, prod * static_cast<std::uint64_t>(x));
    };
    rec(rec, 0, 2 * q - 2, 1);
    return total;
}

/// sum over profiles {B_q}, sum q B_q = n, of n^{sum B_q} / prod(B_q! q^{B_q}); equals C(2n-1, n).
inline Rational profile_coefficient_sum(int n) {
    detail::require(n >= 1 && n <= 8, "profile_coefficient_sum: n must be in [1, 8]");
    Rational total(0);
    for (const auto& b : integer_partitions(n)) {
        int parts = 0;
        long long den = 1;
        for (std::size_t k = 0; k < b.size(); ++k) {
            parts += b[k];
            den *= static_cast<long long>(factorial_u64(b[k]));
            den *= ipow_checked(static_cast<std::int64_t>(k + 1), b[k]);
        }
        total += Rational(ipow_checked(n, parts), den);
    }
    return total;
}

} // namespace mlve
