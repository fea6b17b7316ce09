#pragma once
// Forest-formula interpolation: min-over-path covariance matrices, the
// forest identity f(1) = sum_F int dw_F d_F f(X^F(w)), and its Gaussian
// replica corollary for polynomial integrands.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "mlve/combinatorics.hpp"
#include "mlve/error.hpp"
#include "mlve/quadrature.hpp"

namespace mlve {

using CovarianceMatrix = Eigen::MatrixXd;

/// Weakening parameters, one per forest edge, in the order of Forest::edges.
struct InterpolationPoint {
    std::vector<double> w;
};

inline constexpr double kPsdTolerance = 1e-12;

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Symmetric, unit diagonal, entries in [0,1], PSD up to kPsdTolerance.
inline bool is_interpolated_covariance(const Eigen::MatrixXd& m, double tol = kPsdTolerance) {
    if (m.rows() != m.cols()) return false;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (std::abs(m(i, i) - 1.0) > tol) return false;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > tol) return false;
            if (m(i, j) < -tol || m(i, j) > 1.0 + tol) return false;
        }
    }
    return min_eigenvalue(m) >= -tol;
}

namespace detail {

/// Min-over-path matrix for an edge list on n vertices; edges must form a forest.
inline Eigen::MatrixXd path_min_matrix(int n, std::span<const Edge> edges, std::span<const double> w) {
    require(edges.size() == w.size(), "interpolation point must carry one weight per edge");
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
    UnionFind uf(n);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        require(e.a >= 0 && e.b < n && e.a != e.b, "edge endpoint out of range");
        require(w[i] >= 0.0 && w[i] <= 1.0, "interpolation weight outside [0,1]");
        require(uf.unite(e.a, e.b), "edge set is not a forest");
        adj[static_cast<std::size_t>(e.a)].push_back({e.b, w[i]});
        adj[static_cast<std::size_t>(e.b)].push_back({e.a, w[i]});
    }
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> best(static_cast<std::size_t>(n));
    std::vector<char> seen(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        std::fill(seen.begin(), seen.end(), 0);
        std::vector<int> stack{s};
        best[static_cast<std::size_t>(s)] = 1.0;
        seen[static_cast<std::size_t>(s)] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            x(s, u) = best[static_cast<std::size_t>(u)];
            for (auto [v, wt] : adj[static_cast<std::size_t>(u)]) {
                if (seen[static_cast<std::size_t>(v)]) continue;
                seen[static_cast<std::size_t>(v)] = 1;
                best[static_cast<std::size_t>(v)] = std::min(best[static_cast<std::size_t>(u)], wt);
                stack.push_back(v);
            }
        }
    }
    return x;
}

} // namespace detail

/// X^F(w): unit diagonal, X_ij = min of w along the forest path i -> j, 0 across components.
inline CovarianceMatrix x_matrix(const Forest& forest, const InterpolationPoint& point) {
    return detail::path_min_matrix(forest.n, forest.edges, point.w);
}

/// Block-level Y(w) for a Fermionic forest on the blocks of a partition.
inline CovarianceMatrix y_block_matrix(int num_blocks, std::span<const Edge> block_edges,
                                       const InterpolationPoint& point) {
    detail::require(num_blocks >= 1, "y_block_matrix: need at least one block");
    return detail::path_min_matrix(num_blocks, block_edges, point.w);
}

inline CovarianceMatrix y_block_matrix(const BlockPartition& partition, std::span<const Edge> block_edges,
                                       const InterpolationPoint& point) {
    return y_block_matrix(static_cast<int>(partition.blocks.size()), block_edges, point);
}

/// Block matrix X^Pi: 1 inside a block, 0 across blocks.
inline CovarianceMatrix partition_matrix(const BlockPartition& partition, int n) {
    const auto b = partition.block_of(n);
    Eigen::MatrixXd x(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = b[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
    return x;
}

/// d_F f evaluated at X: returns nullopt when the caller cannot provide the
/// derivative for this edge subset.
using ForestDerivative = std::function<std::optional<double>(std::span<const Edge>, const Eigen::MatrixXd&)>;

/// sum_F int dw_F (d_F f)(X^F(w)) over all forests on n vertices.
inline double forest_formula_eval(int n, const ForestDerivative& df, int quadrature_order = 16) {
    detail::require(n >= 1 && n <= 5, "forest_formula_eval: n must be in [1, 5]");
    detail::require(quadrature_order >= 1, "forest_formula_eval: quadrature order must be >= 1");
    const auto rule = gauss_legendre_unit(quadrature_order);
    double total = 0.0;
    for_each_forest(n, [&](const Forest& f) {
        const int k = static_cast<int>(f.edges.size());
        bool missing = false;
        const double v = integrate_unit_cube_ordered<double>(k, rule, [&](std::span<const double> w) {
            if (missing) return 0.0;
            const auto x = detail::path_min_matrix(n, f.edges, w);
            const auto d = df(f.edges, x);
            if (!d) {
                missing = true;
                return 0.0;
            }
            return *d;
        });
        if (missing) throw std::invalid_argument("forest_formula_eval: derivative closure missing for an edge subset");
        total += v;
    });
    return total;
}

/// f(X) = prod_{l} X_l^{k_l} over the edges of K_n.
inline ForestDerivative monomial_family(std::map<Edge, int> exponents) {
    return [exponents = std::move(exponents)](std::span<const Edge> forest,
                                               const Eigen::MatrixXd& x) -> std::optional<double> {
        double value = 1.0;
        std::map<Edge, int> order;
        for (const auto& e : forest) ++order[e];
        for (const auto& [e, k] : exponents) {
            const int d = order.count(e) ? order[e] : 0;
            if (d > k) return 0.0;
            // d/dx x^k applied d times
            double c = 1.0;
            for (int i = 0; i < d; ++i) c *= k - i;
            value *= c * std::pow(x(e.a, e.b), k - d);
        }
        for (const auto& [e, d] : order)
            if (!exponents.count(e)) return 0.0;
        return value;
    };
}

/// f(X) = exp(sum_l c_l X_l); d_F f = prod_{l in F} c_l f.
inline ForestDerivative exp_family(std::map<Edge, double> coeffs) {
    return [coeffs = std::move(coeffs)](std::span<const Edge> forest, const Eigen::MatrixXd& x) -> std::optional<double> {
        double s = 0.0;
        for (const auto& [e, c] : coeffs) s += c * x(e.a, e.b);
        double pref = 1.0;
        for (const auto& e : forest) {
            const auto it = coeffs.find(e);
            pref *= it == coeffs.end() ? 0.0 : it->second;
        }
        return pref * std::exp(s);
    };
}

/// Sparse real polynomial in a fixed number of variables.
class Polynomial {
public:
    using Exponents = std::vector<int>;

    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    static Polynomial constant(int nvars, double c) {
        Polynomial p(nvars);
        if (c != 0.0) p.terms_[Exponents(static_cast<std::size_t>(nvars), 0)] = c;
        return p;
    }
    static Polynomial variable(int nvars, int i) {
        Polynomial p(nvars);
        Exponents e(static_cast<std::size_t>(nvars), 0);
        e[static_cast<std::size_t>(i)] = 1;
        p.terms_[e] = 1.0;
        return p;
    }

    int num_vars() const { return nvars_; }
    const std::map<Exponents, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const Exponents& e, double c) {
        detail::require(static_cast<int>(e.size()) == nvars_, "Polynomial: exponent arity mismatch");
        if (c == 0.0) return;
        auto& slot = terms_[e];
        slot += c;
        if (slot == 0.0) terms_.erase(e);
    }

    Polynomial operator+(const Polynomial& o) const {
        Polynomial r = *this;
        for (const auto& [e, c] : o.terms_) r.add_term(e, c);
        return r;
    }
    Polynomial operator*(const Polynomial& o) const {
        detail::require(nvars_ == o.nvars_, "Polynomial: variable count mismatch");
        Polynomial r(nvars_);
        Exponents e(static_cast<std::size_t>(nvars_));
        for (const auto& [ea, ca] : terms_)
            for (const auto& [eb, cb] : o.terms_) {
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, ca * cb);
            }
        return r;
    }
    Polynomial scaled(double s) const {
        Polynomial r(nvars_);
        for (const auto& [e, c] : terms_) r.add_term(e, c * s);
        return r;
    }
    Polynomial derivative(int i) const {
        Polynomial r(nvars_);
        for (const auto& [e, c] : terms_) {
            const int k = e[static_cast<std::size_t>(i)];
            if (k == 0) continue;
            Exponents f = e;
            --f[static_cast<std::size_t>(i)];
            r.add_term(f, c * k);
        }
        return r;
    }
    /// Re-embeds into `nvars` variables, sending variable i to offset + i.
    Polynomial embedded(int nvars, int offset) const {
        Polynomial r(nvars);
        Exponents f(static_cast<std::size_t>(nvars), 0);
        for (const auto& [e, c] : terms_) {
            std::fill(f.begin(), f.end(), 0);
            for (int i = 0; i < nvars_; ++i) f[static_cast<std::size_t>(offset + i)] = e[static_cast<std::size_t>(i)];
            r.add_term(f, c);
        }
        return r;
    }
    double constant_term() const {
        const auto it = terms_.find(Exponents(static_cast<std::size_t>(nvars_), 0));
        return it == terms_.end() ? 0.0 : it->second;
    }
    int degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
        return d;
    }

private:
    int nvars_ = 0;
    std::map<Exponents, double> terms_;
};

/// Centered Gaussian expectation with covariance K, via exp(1/2 sum K_ab d_a d_b) at 0.
inline double gaussian_expectation(const Polynomial& p, const Eigen::MatrixXd& K) {
    detail::require(K.rows() == p.num_vars() && K.cols() == p.num_vars(), "gaussian_expectation: size mismatch");
    const int nv = p.num_vars();
    double total = 0.0;
    Polynomial cur = p;
    double fact = 1.0;
    for (int m = 0; !cur.is_zero(); ++m) {
        if (m > 0) fact *= m;
        total += cur.constant_term() / fact;
        Polynomial next(nv);
        for (int a = 0; a < nv; ++a) {
            const Polynomial da = cur.derivative(a);
            if (da.is_zero()) continue;
            for (int b = 0; b < nv; ++b) {
                if (K(a, b) == 0.0) continue;
                next = next + da.derivative(b).scaled(0.5 * K(a, b));
            }
        }
        cur = std::move(next);
    }
    return total;
}

struct ReplicaGaussianResult {
    double left = 0.0;  // int dmu_C prod f_i(tau)
    double right = 0.0; // forest side
};

/// Both sides of the replica forest identity for polynomial integrands f_i in
/// N_c variables with covariance C. Edge derivative for l = (i,j):
/// sum_{p,q} C_pq d/dtau_{p,i} d/dtau_{q,j}.
inline ReplicaGaussianResult replica_gaussian_eval(const Eigen::MatrixXd& C, const std::vector<Polynomial>& f,
                                                   int quadrature_order = 8) {
    const int n = static_cast<int>(f.size());
    const int nc = static_cast<int>(C.rows());
    detail::require(n >= 1 && n <= 4, "replica_gaussian_eval: n must be in [1, 4]");
    detail::require(nc >= 1 && nc <= 4 && C.cols() == nc, "replica_gaussian_eval: N_c must be in [1, 4]");
    detail::require(min_eigenvalue(C) >= -kPsdTolerance, "replica_gaussian_eval: covariance is not PSD");
    int total_degree = 0;
    for (const auto& fi : f) {
        detail::require(fi.num_vars() == nc, "replica_gaussian_eval: integrand arity must equal N_c");
        total_degree += fi.degree();
    }

    ReplicaGaussianResult out;
    Polynomial prod = Polynomial::constant(nc, 1.0);
    for (const auto& fi : f) prod = prod * fi;
    out.left = gaussian_expectation(prod, C);

    // Replica variables tau_{p,i} at index i * nc + p.
    const int nv = n * nc;
    Polynomial replicated = Polynomial::constant(nv, 1.0);
    for (int i = 0; i < n; ++i) replicated = replicated * f[static_cast<std::size_t>(i)].embedded(nv, i * nc);

    // The w-integrand is a polynomial in the min() entries of degree <= total_degree / 2.
    const int order = std::max(quadrature_order, total_degree / 2 + n + 1);
    const auto rule = gauss_legendre_unit(order);
    for_each_forest(n, [&](const Forest& forest) {
        Polynomial d = replicated;
        for (const auto& e : forest.edges) {
            Polynomial next(nv);
            for (int p = 0; p < nc; ++p) {
                const Polynomial dp = d.derivative(e.a * nc + p);
                if (dp.is_zero()) continue;
                for (int q = 0; q < nc; ++q) {
                    if (C(p, q) == 0.0) continue;
                    next = next + dp.derivative(e.b * nc + q).scaled(C(p, q));
                }
            }
            d = std::move(next);
        }
        if (d.is_zero()) return;
        const int k = static_cast<int>(forest.edges.size());
        out.right += integrate_unit_cube_ordered<double>(k, rule, [&](std::span<const double> w) {
            const Eigen::MatrixXd x = detail::path_min_matrix(n, forest.edges, w);
            Eigen::MatrixXd K(nv, nv);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) K.block(i * nc, j * nc, nc, nc) = x(i, j) * C;
            return gaussian_expectation(d, K);
        });
    });
    return out;
}

} // namespace mlve
