#pragma once
// Gaussian Grassmann integrals as signed determinants, an explicit
// Grassmann-algebra oracle, and the Fermionic factor of a jungle term.

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mlve/combinatorics.hpp"
#include "mlve/error.hpp"
#include "mlve/interpolation.hpp"

namespace mlve {

/// int prod(dpsibar dpsi) exp(-psibar M psi) prod_i psi_{cols[i]} psibar_{rows[i]}
template <class Scalar>
struct MinorSpec {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix;
    std::vector<int> cols; // a_1..a_k (psi insertions)
    std::vector<int> rows; // b_1..b_k (psibar insertions)
};

namespace detail {

inline void check_index_list(const std::vector<int>& v, Eigen::Index dim, const char* what) {
    std::vector<char> seen(static_cast<std::size_t>(dim), 0);
    for (int i : v) {
        require(i >= 0 && i < dim, std::string("grassmann_minor: ") + what + " index out of range");
        require(!seen[static_cast<std::size_t>(i)], std::string("grassmann_minor: repeated ") + what + " index");
        seen[static_cast<std::size_t>(i)] = 1;
    }
}

} // namespace detail

/// Value of the Grassmann integral in MinorSpec. Equals det(M) with row b_i
/// replaced by the unit row e_{a_i} for every i, i.e. the mixed derivative
/// d^k det M / prod dM_{b_i a_i}. Sign locked against brute_force_grassmann.
template <class Scalar>
Scalar grassmann_minor(const MinorSpec<Scalar>& spec) {
    const auto& m = spec.matrix;
    detail::require(m.rows() == m.cols(), "grassmann_minor: matrix must be square");
    detail::require(spec.cols.size() == spec.rows.size(), "grassmann_minor: need as many rows as columns");
    detail::require(static_cast<Eigen::Index>(spec.cols.size()) <= m.rows(), "grassmann_minor: too many insertions");
    detail::check_index_list(spec.cols, m.rows(), "column");
    detail::check_index_list(spec.rows, m.rows(), "row");
    if (m.rows() == 0) return Scalar(1);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> r = m;
    for (std::size_t i = 0; i < spec.rows.size(); ++i) {
        r.row(spec.rows[i]).setZero();
        r(spec.rows[i], spec.cols[i]) = Scalar(1);
    }
    return r.determinant();
}

/// Generator of the Grassmann algebra: psibar_i (bar = true) or psi_i.
struct Generator {
    bool bar = false;
    int index = 0;

    /// Position in the canonical order psibar_0, psi_0, psibar_1, psi_1, ...
    int slot() const { return 2 * index + (bar ? 0 : 1); }
};

inline Generator psi(int i) { return {false, i}; }
inline Generator psibar(int i) { return {true, i}; }

/// Element of the Grassmann algebra on 2*dim generators, stored densely by
/// monomial bitmask in canonical order.
template <class Scalar>
class GrassmannElement {
public:
    explicit GrassmannElement(int dim) : dim_(dim), coef_(std::size_t{1} << (2 * dim), Scalar(0)) {
        detail::require(dim >= 0 && dim <= 8, "GrassmannElement: dim must be in [0, 8]");
        coef_[0] = Scalar(1);
    }

    int dim() const { return dim_; }
    const Scalar& operator[](std::uint32_t mask) const { return coef_[mask]; }

    /// Sign of (monomial a) * (monomial b) relative to the canonical monomial a|b.
    static int product_sign(std::uint32_t a, std::uint32_t b) {
        int swaps = 0;
        while (b) {
            const int s = std::countr_zero(b);
            b &= b - 1;
            swaps += std::popcount(a >> (s + 1));
        }
        return swaps & 1 ? -1 : 1;
    }

    /// this <- this * (1 + c * g1 g2) with g1 != g2.
    void multiply_by_one_plus(Scalar c, Generator g1, Generator g2) {
        const std::uint32_t b1 = 1u << g1.slot(), b2 = 1u << g2.slot();
        const int inner = g1.slot() < g2.slot() ? 1 : -1;
        const std::uint32_t pair = b1 | b2;
        for (std::uint32_t m = static_cast<std::uint32_t>(coef_.size()); m-- > 0;) {
            if (coef_[m] == Scalar(0) || (m & pair)) continue;
            coef_[m | pair] += coef_[m] * c * static_cast<double>(inner * product_sign(m, pair));
        }
    }

    /// exp(-psibar M psi) = prod_{ij} (1 - M_ij psibar_i psi_j).
    template <class Derived>
    static GrassmannElement exp_bilinear(const Eigen::MatrixBase<Derived>& M) {
        const int dim = static_cast<int>(M.rows());
        GrassmannElement e(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (M(i, j) != Scalar(0)) e.multiply_by_one_plus(-Scalar(M(i, j)), psibar(i), psi(j));
        return e;
    }

    /// int prod_i (dpsibar_i dpsi_i) [this * monomial]. A repeated generator gives 0.
    Scalar integrate_with(std::span<const Generator> monomial) const {
        std::uint32_t mask = 0;
        int sign = 1;
        for (const auto& g : monomial) {
            detail::require(g.index >= 0 && g.index < dim_, "brute_force_grassmann: generator out of range");
            const std::uint32_t bit = 1u << g.slot();
            if (mask & bit) return Scalar(0);
            sign *= product_sign(mask, bit);
            mask |= bit;
        }
        const std::uint32_t top = static_cast<std::uint32_t>(coef_.size() - 1);
        const std::uint32_t rest = top ^ mask;
        // canonical top monomial prod(psibar_i psi_i) integrates to (-1)^dim
        const int measure = dim_ & 1 ? -1 : 1;
        return coef_[rest] * static_cast<double>(sign * product_sign(rest, mask) * measure);
    }

private:
    int dim_;
    std::vector<Scalar> coef_;
};

/// Explicit expansion in the Grassmann algebra; dim <= 8.
template <class Derived>
typename Derived::Scalar brute_force_grassmann(const Eigen::MatrixBase<Derived>& M, std::span<const Generator> monomial) {
    using Scalar = typename Derived::Scalar;
    detail::require(M.rows() == M.cols(), "brute_force_grassmann: matrix must be square");
    detail::require(M.rows() <= 8, "brute_force_grassmann: dim must be <= 8");
    return GrassmannElement<Scalar>::exp_bilinear(M).integrate_with(monomial);
}

/// The monomial prod_i psi_{cols[i]} psibar_{rows[i]}.
inline std::vector<Generator> minor_monomial(const std::vector<int>& cols, const std::vector<int>& rows) {
    std::vector<Generator> out;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out.push_back(psi(cols[i]));
        out.push_back(psibar(rows[i]));
    }
    return out;
}

struct FermionicFactorInput {
    Jungle jungle;
    std::vector<int> slices;    // j_a per vertex
    std::vector<double> w;      // one weight per Fermionic edge, in jungle.fermionic order
};

/// Hardcore: two vertices of one Bosonic block share a slice.
inline bool violates_hardcore(const std::vector<int>& block_of, const std::vector<int>& slices) {
    const std::size_t n = slices.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (block_of[a] == block_of[b] && slices[a] == slices[b]) return true;
    return false;
}

/// A Fermionic edge joins different slices.
inline bool violates_slice_delta(const std::vector<Edge>& fermionic, const std::vector<int>& slices) {
    for (const auto& e : fermionic)
        if (slices[static_cast<std::size_t>(e.a)] != slices[static_cast<std::size_t>(e.b)]) return true;
    return false;
}

/// Y_ab = Y_{B(a)B(b)}(w) delta_{j_a j_b} on the n vertices.
inline Eigen::MatrixXd lifted_y_matrix(const Jungle& jungle, const std::vector<int>& slices, std::span<const double> w) {
    const int n = jungle.n;
    detail::require(static_cast<int>(slices.size()) == n, "lifted_y_matrix: one slice per vertex required");
    const auto block_of = jungle.bosonic_forest().component_labels();
    const int nb = block_of.empty() ? 0 : *std::max_element(block_of.begin(), block_of.end()) + 1;
    const auto bedges = jungle.block_level_fermionic();
    const Eigen::MatrixXd y = detail::path_min_matrix(nb, bedges, w);
    Eigen::MatrixXd out(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            out(a, b) = slices[static_cast<std::size_t>(a)] == slices[static_cast<std::size_t>(b)]
                            ? y(block_of[static_cast<std::size_t>(a)], block_of[static_cast<std::size_t>(b)])
                            : 0.0;
    return out;
}

/// v^T Y v for the lifted matrix, assembled layer by layer from the sorted
/// Fermionic weights as a sum of squares:
///   sum_j [ sum_k (w_(k) - w_(k-1)) sum_C (sum_{a in C, j_a = j} v_a)^2
///           + (1 - w_max) sum_B (sum_{a in B, j_a = j} v_a)^2 ].
inline double layered_quadratic_form(const Jungle& jungle, const std::vector<int>& slices, std::span<const double> w,
                                     const Eigen::VectorXd& v) {
    const int n = jungle.n;
    const auto block_of = jungle.bosonic_forest().component_labels();
    const int nb = block_of.empty() ? 0 : *std::max_element(block_of.begin(), block_of.end()) + 1;
    const auto bedges = jungle.block_level_fermionic();
    std::vector<double> levels(w.begin(), w.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    auto cluster_sum = [&](const std::vector<int>& cluster_of_block) {
        // sum over (cluster, slice) of squared partial sums
        std::map<std::pair<int, int>, double> acc;
        for (int a = 0; a < n; ++a)
            acc[{cluster_of_block[static_cast<std::size_t>(block_of[static_cast<std::size_t>(a)])],
                 slices[static_cast<std::size_t>(a)]}] += v(a);
        double s = 0.0;
        for (const auto& [key, x] : acc) s += x * x;
        return s;
    };

    double total = 0.0, prev = 0.0;
    for (double level : levels) {
        UnionFind uf(nb);
        for (std::size_t i = 0; i < bedges.size(); ++i)
            if (w[i] >= level) uf.unite(bedges[i].a, bedges[i].b);
        std::vector<int> cluster(static_cast<std::size_t>(nb));
        for (int b = 0; b < nb; ++b) cluster[static_cast<std::size_t>(b)] = uf.find(b);
        total += (level - prev) * cluster_sum(cluster);
        prev = level;
    }
    std::vector<int> identity(static_cast<std::size_t>(nb));
    std::iota(identity.begin(), identity.end(), 0);
    total += (1.0 - prev) * cluster_sum(identity);
    return total;
}

/// Fermionic factor: hardcore and slice-delta zeros, then the sum over the
/// 2^k orientations of the Fermionic edges of the lifted-Y Grassmann minors.
inline double fermionic_factor(const FermionicFactorInput& in) {
    const auto& jg = in.jungle;
    detail::require(static_cast<int>(in.slices.size()) == jg.n, "fermionic_factor: one slice per vertex required");
    detail::require(in.w.size() == jg.fermionic.size(), "fermionic_factor: one weight per Fermionic edge required");
    detail::require(jg.is_valid(), "fermionic_factor: invalid jungle");
    const auto block_of = jg.bosonic_forest().component_labels();
    if (violates_hardcore(block_of, in.slices)) return 0.0;
    if (violates_slice_delta(jg.fermionic, in.slices)) return 0.0;

    MinorSpec<double> spec;
    spec.matrix = lifted_y_matrix(jg, in.slices, in.w);
    const std::size_t k = jg.fermionic.size();
    spec.cols.resize(k);
    spec.rows.resize(k);
    double total = 0.0;
    for (std::uint32_t flip = 0; flip < (1u << k); ++flip) {
        std::uint32_t used_cols = 0, used_rows = 0;
        bool repeated = false;
        for (std::size_t i = 0; i < k; ++i) {
            const auto& e = jg.fermionic[i];
            const bool swap = flip >> i & 1u;
            spec.cols[i] = swap ? e.b : e.a;
            spec.rows[i] = swap ? e.a : e.b;
            repeated |= (used_cols >> spec.cols[i] & 1u) || (used_rows >> spec.rows[i] & 1u);
            used_cols |= 1u << spec.cols[i];
            used_rows |= 1u << spec.rows[i];
        }
        // a generator inserted twice: nilpotent, contributes 0
        if (repeated) continue;
        total += grassmann_minor(spec);
    }
    return total;
}

struct MinorBoundReport {
    int trials = 0;
    int violations = 0;
    double worst_minor_margin = 0.0;   // max |minor| - 1
    double worst_cauchy_margin = 0.0;  // max minor_ab^2 - minor_aa minor_bb
    double worst_diagonal_margin = 0.0; // max of (-minor_aa, minor_aa - 1)
    bool ok() const { return violations == 0; }
};

/// Random-index check of |minor| <= 1, the Cauchy-Schwarz inequality for
/// minors and 0 <= diagonal minor <= 1 on a unit-diagonal PSD matrix.
inline MinorBoundReport check_minor_bound(const Eigen::MatrixXd& m, int trials, std::uint64_t seed = 1,
                                          double tol = 1e-10) {
    detail::require(m.rows() == m.cols() && m.rows() >= 1, "check_minor_bound: matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        detail::require(std::abs(m(i, i) - 1.0) <= 1e-12, "check_minor_bound: diagonal must be 1");
    detail::require(min_eigenvalue(m) >= -kPsdTolerance, "check_minor_bound: matrix must be PSD");
    const int dim = static_cast<int>(m.rows());
    std::mt19937_64 rng(seed);
    std::vector<int> idx(static_cast<std::size_t>(dim));
    std::iota(idx.begin(), idx.end(), 0);
    MinorBoundReport rep;
    rep.worst_minor_margin = rep.worst_cauchy_margin = rep.worst_diagonal_margin = -1.0;
    auto minor = [&](const std::vector<int>& a, const std::vector<int>& b) {
        return grassmann_minor(MinorSpec<double>{m, a, b});
    };
    for (int t = 0; t < trials; ++t) {
        const int k = std::uniform_int_distribution<int>(0, dim)(rng);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<int> a(idx.begin(), idx.begin() + k);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<int> b(idx.begin(), idx.begin() + k);
        const double mab = minor(a, b), maa = minor(a, a), mbb = minor(b, b);
        const double m1 = std::abs(mab) - 1.0;
        const double m2 = mab * mab - maa * mbb;
        const double m3 = std::max({-maa, maa - 1.0, -mbb, mbb - 1.0});
        rep.worst_minor_margin = std::max(rep.worst_minor_margin, m1);
        rep.worst_cauchy_margin = std::max(rep.worst_cauchy_margin, m2);
        rep.worst_diagonal_margin = std::max(rep.worst_diagonal_margin, m3);
        if (m1 > tol || m2 > tol || m3 > tol) ++rep.violations;
        ++rep.trials;
    }
    return rep;
}

} // namespace mlve
