#pragma once
// Order-by-order evaluation of log Z from the two-level jungle formula:
// sum over spanning jungles and slice assignments of
//   [int dw_F fermionic_factor] * prod_B [int dw_T E_X(w)[prod_a W^{(d_a)}_{j_a}(sigma_a)]].

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "mlve/combinatorics.hpp"
#include "mlve/grassmann.hpp"
#include "mlve/interpolation.hpp"
#include "mlve/model.hpp"
#include "mlve/numeric.hpp"
#include "mlve/quadrature.hpp"

namespace mlve {

inline constexpr int kMaxEngineOrder = 4;

struct EngineOptions {
    int gh_nodes_small = 64;   // Gauss-Hermite nodes per dimension, |B| <= 3
    int gh_nodes_large = 32;   // |B| = 4
    int gl_nodes = 12;         // Gauss-Legendre nodes per edge and ordering cell
    double eigen_cutoff = 1e-12;
    double prune = 1e-22;      // drop tensor points with relative weight below this
    bool conjugate_symmetry = true; // real lambda: evaluate half the sigma grid
    int threads = 1;
};

/// One term of the jungle sum, as reported to trace callbacks.
struct TermRecord {
    int n = 0;
    std::size_t jungle_id = 0;
    Jungle jungle;
    std::vector<int> slices;
    cplx value;
};

using TraceCallback = std::function<void(const TermRecord&)>;

struct TruncationResult {
    cplx total;
    std::vector<cplx> orders;        // order_contribution for n = 1..n_max
    std::vector<cplx> partial_sums;  // S_n
    std::vector<double> distances;   // |S_n - reference| when a reference is given
};

/// Tree degrees of the vertices 0..q-1.
inline std::vector<int> tree_degrees(int q, std::span<const Edge> edges) {
    std::vector<int> d(static_cast<std::size_t>(q), 0);
    for (const auto& e : edges) {
        ++d[static_cast<std::size_t>(e.a)];
        ++d[static_cast<std::size_t>(e.b)];
    }
    return d;
}

class MlveEngine {
public:
    explicit MlveEngine(const ModelParams& params, EngineOptions options = {})
        : params_(params), opt_(options), gl_(gauss_legendre_unit(options.gl_nodes)) {
        params_.validate();
        detail::require(opt_.gh_nodes_small >= 2 && opt_.gh_nodes_large >= 2, "EngineOptions: too few Hermite nodes");
        for (int j = params_.j_min; j <= params_.j_max; ++j) kernels_.emplace_back(params_, j);
        gh_small_ = gauss_hermite_normal(opt_.gh_nodes_small);
        gh_large_ = gauss_hermite_normal(opt_.gh_nodes_large);
        real_lambda_ = params_.lambda.imag() == 0.0;
    }

    const ModelParams& params() const { return params_; }
    const EngineOptions& options() const { return opt_; }

    const SliceKernel& kernel(int j) const {
        detail::require(j >= params_.j_min && j <= params_.j_max, "slice index outside the window");
        return kernels_[static_cast<std::size_t>(j - params_.j_min)];
    }

    /// E[prod_a d^{deg_a} W_{j_a}(sigma_a)], sigma ~ N(0, X).
    cplx gaussian_block_expectation(const std::vector<int>& slices, const std::vector<int>& degrees,
                                    const Eigen::MatrixXd& X) const {
        const int q = static_cast<int>(slices.size());
        detail::require(q >= 1 && q <= 4, "bosonic block size must be in [1, 4]");
        detail::require(X.rows() == q && X.cols() == q && degrees.size() == slices.size(),
                        "bosonic block: size mismatch");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
        const auto& ev = es.eigenvalues();
        if (ev.minCoeff() < -1e-10) throw std::logic_error("bosonic block covariance is not PSD");
        std::vector<int> keep;
        for (int k = 0; k < q; ++k)
            if (ev(k) > opt_.eigen_cutoff) keep.push_back(k);
        const int r = static_cast<int>(keep.size());
        Eigen::MatrixXd L(q, r);
        for (int c = 0; c < r; ++c) L.col(c) = es.eigenvectors().col(keep[static_cast<std::size_t>(c)]) * std::sqrt(ev(keep[static_cast<std::size_t>(c)]));

        std::vector<const SliceKernel*> ker(static_cast<std::size_t>(q));
        for (int a = 0; a < q; ++a) ker[static_cast<std::size_t>(a)] = &kernel(slices[static_cast<std::size_t>(a)]);

        const auto& rule = q <= 3 ? gh_small_ : gh_large_;
        const bool half = opt_.conjugate_symmetry && real_lambda_ && r > 0;
        const auto& grid = tensor_grid(rule, r, half);
        KahanSum<cplx> acc;
        std::vector<double> z(static_cast<std::size_t>(r));
        for (std::size_t p = 0; p < grid.weight.size(); ++p) {
            for (int c = 0; c < r; ++c) z[static_cast<std::size_t>(c)] = rule.nodes[static_cast<std::size_t>(grid.index[p * static_cast<std::size_t>(r) + static_cast<std::size_t>(c)])];
            cplx prod = 1.0;
            for (int a = 0; a < q; ++a) {
                double s = 0.0;
                for (int c = 0; c < r; ++c) s += L(a, c) * z[static_cast<std::size_t>(c)];
                prod *= ker[static_cast<std::size_t>(a)]->w_derivative(degrees[static_cast<std::size_t>(a)], s);
            }
            acc.add(grid.weight[p] * prod);
        }
        const cplx v = acc.value();
        return half ? cplx(2.0 * v.real(), 0.0) : v;
    }

    /// Bosonic block at a fixed interpolation point; `tree` uses local labels 0..q-1.
    cplx bosonic_block_value(const std::vector<int>& slices, const Forest& tree, const InterpolationPoint& point) const {
        detail::require(tree.n == static_cast<int>(slices.size()), "bosonic block: tree and slices disagree");
        detail::require(tree.is_spanning_tree(), "bosonic block: tree must span the block");
        const Eigen::MatrixXd X = x_matrix(tree, point);
        return gaussian_block_expectation(slices, tree_degrees(tree.n, tree.edges), X);
    }

    /// Bosonic block integrated over its tree weights, cached by (tree, slices).
    cplx integrated_block_value(const std::vector<int>& slices, const std::vector<Edge>& local_edges) const {
        const int q = static_cast<int>(slices.size());
        std::vector<int> key(slices);
        key.push_back(-1);
        for (const auto& e : local_edges) {
            key.push_back(e.a);
            key.push_back(e.b);
        }
        {
            std::lock_guard<std::mutex> lk(mu_);
            const auto it = block_cache_.find(key);
            if (it != block_cache_.end()) return it->second;
        }
        const auto deg = tree_degrees(q, local_edges);
        const int k = static_cast<int>(local_edges.size());
        const cplx v = integrate_unit_cube_ordered<cplx>(k, gl_, [&](std::span<const double> w) {
            return gaussian_block_expectation(slices, deg, detail::path_min_matrix(q, local_edges, w));
        });
        std::lock_guard<std::mutex> lk(mu_);
        block_cache_.emplace(std::move(key), v);
        return v;
    }

    /// int dw_F fermionic_factor over the Fermionic edge weights.
    double integrated_fermionic_factor(const Jungle& jungle, const std::vector<int>& slices) const {
        const int k = static_cast<int>(jungle.fermionic.size());
        FermionicFactorInput in{jungle, slices, std::vector<double>(static_cast<std::size_t>(k))};
        return integrate_unit_cube_ordered<double>(k, gl_, [&](std::span<const double> w) {
            std::copy(w.begin(), w.end(), in.w.begin());
            return fermionic_factor(in);
        });
    }

    /// Exact structural zero: hardcore or slice-delta violation.
    static bool is_structural_zero(const Jungle& jungle, const std::vector<int>& slices) {
        const auto block_of = jungle.bosonic_forest().component_labels();
        return violates_hardcore(block_of, slices) || violates_slice_delta(jungle.fermionic, slices);
    }

    cplx jungle_term(const Jungle& jungle, const std::vector<int>& slices) const {
        detail::require(static_cast<int>(slices.size()) == jungle.n, "jungle_term: one slice per vertex required");
        for (int j : slices)
            detail::require(j >= params_.j_min && j <= params_.j_max, "jungle_term: slice outside the window");
        detail::require(jungle.is_spanning(), "jungle_term: jungle must be spanning");
        if (is_structural_zero(jungle, slices)) return 0.0;

        cplx value = integrated_fermionic_factor(jungle, slices);
        const auto label = jungle.bosonic_forest().component_labels();
        const int nb = *std::max_element(label.begin(), label.end()) + 1;
        for (int b = 0; b < nb; ++b) {
            // Local labels ordered by slice so equal (tree, slices) shapes share a cache entry.
            std::vector<int> members;
            for (int a = 0; a < jungle.n; ++a)
                if (label[static_cast<std::size_t>(a)] == b) members.push_back(a);
            std::sort(members.begin(), members.end(), [&](int x, int y) {
                return slices[static_cast<std::size_t>(x)] < slices[static_cast<std::size_t>(y)];
            });
            std::vector<int> local(static_cast<std::size_t>(jungle.n), -1), bslices;
            for (std::size_t i = 0; i < members.size(); ++i) {
                local[static_cast<std::size_t>(members[i])] = static_cast<int>(i);
                bslices.push_back(slices[static_cast<std::size_t>(members[i])]);
            }
            std::vector<Edge> ledges;
            for (const auto& e : jungle.bosonic)
                if (label[static_cast<std::size_t>(e.a)] == b)
                    ledges.emplace_back(local[static_cast<std::size_t>(e.a)], local[static_cast<std::size_t>(e.b)]);
            std::sort(ledges.begin(), ledges.end());
            value *= integrated_block_value(bslices, ledges);
            if (value == 0.0) break;
        }
        return value;
    }

    /// (1/n!) sum over spanning jungles and slice assignments.
    cplx order_contribution(int n, const TraceCallback& trace = {}) const {
        detail::require(n >= 1, "order_contribution: n must be >= 1");
        if (n > kMaxEngineOrder)
            throw BudgetError("order_contribution: n = " + std::to_string(n) + " exceeds the order budget " +
                              std::to_string(kMaxEngineOrder));
        struct Task {
            std::size_t jungle_id;
            const Jungle* jungle;
            std::vector<int> slices;
        };
        const auto jungles = enumerate_jungles(n, true);
        std::vector<Task> tasks;
        const int ns = params_.num_slices();
        std::vector<int> slices(static_cast<std::size_t>(n));
        for (std::size_t id = 0; id < jungles.size(); ++id) {
            std::fill(slices.begin(), slices.end(), 0);
            while (true) {
                std::vector<int> js(static_cast<std::size_t>(n));
                for (int a = 0; a < n; ++a) js[static_cast<std::size_t>(a)] = params_.j_min + slices[static_cast<std::size_t>(a)];
                tasks.push_back({id, &jungles[id], std::move(js)});
                std::size_t d = 0;
                while (d < slices.size() && ++slices[d] == ns) slices[d++] = 0;
                if (d == slices.size()) break;
            }
        }
        std::vector<cplx> values(tasks.size());
        auto work = [&](std::size_t begin, std::size_t stride) {
            for (std::size_t t = begin; t < tasks.size(); t += stride)
                values[t] = jungle_term(*tasks[t].jungle, tasks[t].slices);
        };
        const int threads = std::max(1, opt_.threads);
        if (threads == 1) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t) pool.emplace_back(work, static_cast<std::size_t>(t), static_cast<std::size_t>(threads));
            for (auto& th : pool) th.join();
        }
        KahanSum<cplx> sum;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            sum.add(values[t]);
            if (trace) trace(TermRecord{n, tasks[t].jungle_id, *tasks[t].jungle, tasks[t].slices, values[t]});
        }
        return sum.value() / static_cast<double>(factorial_u64(n));
    }

    TruncationResult logz_truncation(int n_max, std::optional<cplx> reference = std::nullopt,
                                     const TraceCallback& trace = {}) const {
        detail::require(n_max >= 0, "logz_truncation: n_max must be >= 0");
        if (n_max > kMaxEngineOrder)
            throw BudgetError("logz_truncation: n_max = " + std::to_string(n_max) + " exceeds the order budget " +
                              std::to_string(kMaxEngineOrder));
        TruncationResult res;
        cplx s = 0.0;
        for (int n = 1; n <= n_max; ++n) {
            const cplx c = order_contribution(n, trace);
            s += c;
            res.orders.push_back(c);
            res.partial_sums.push_back(s);
            if (reference) res.distances.push_back(std::abs(s - *reference));
        }
        res.total = s;
        return res;
    }

private:
    struct TensorGrid {
        std::vector<int> index; // flattened, dim entries per point
        std::vector<double> weight;
    };

    /// Pruned tensor Gauss-Hermite grid; with `half`, only one point of each
    /// mirror pair z <-> -z (the rule is symmetric and has no zero node when even).
    const TensorGrid& tensor_grid(const QuadratureRule& rule, int dim, bool half) const {
        const auto key = std::make_tuple(static_cast<int>(rule.size()), dim, half);
        std::lock_guard<std::mutex> lk(mu_);
        auto it = grids_.find(key);
        if (it != grids_.end()) return it->second;
        TensorGrid g;
        const int n = static_cast<int>(rule.size());
        const double wmax = *std::max_element(rule.weights.begin(), rule.weights.end());
        const double cut = opt_.prune * std::pow(wmax, dim);
        std::vector<int> idx(static_cast<std::size_t>(dim), 0);
        std::size_t total = 1;
        for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(n);
        for (std::size_t c = 0; c < total; ++c) {
            std::size_t rem = c;
            double w = 1.0;
            for (int d = 0; d < dim; ++d) {
                idx[static_cast<std::size_t>(d)] = static_cast<int>(rem % static_cast<std::size_t>(n));
                rem /= static_cast<std::size_t>(n);
                w *= rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
            }
            if (w < cut) continue;
            if (half) {
                // keep the lexicographically smaller of (idx, mirror(idx))
                bool smaller = false, decided = false;
                for (int d = 0; d < dim && !decided; ++d) {
                    const int a = idx[static_cast<std::size_t>(d)], b = n - 1 - a;
                    if (a != b) {
                        smaller = a < b;
                        decided = true;
                    }
                }
                if (!decided) {
                    // self-mirror point (odd n, all zero nodes): counted with weight 1/2
                    w *= 0.5;
                } else if (!smaller) {
                    continue;
                }
            }
            g.index.insert(g.index.end(), idx.begin(), idx.end());
            g.weight.push_back(w);
        }
        return grids_.emplace(key, std::move(g)).first->second;
    }

    ModelParams params_;
    EngineOptions opt_;
    QuadratureRule gl_;
    QuadratureRule gh_small_, gh_large_;
    bool real_lambda_ = true;
    std::vector<SliceKernel> kernels_;
    mutable std::mutex mu_;
    mutable std::map<std::vector<int>, cplx> block_cache_;
    mutable std::map<std::tuple<int, int, bool>, TensorGrid> grids_;
};

/// Convenience wrappers with default options.
inline cplx bosonic_block_value(const ModelParams& params, const std::vector<int>& slices, const Forest& tree,
                                const InterpolationPoint& point) {
    return MlveEngine(params).bosonic_block_value(slices, tree, point);
}

inline cplx jungle_term(const ModelParams& params, const Jungle& jungle, const std::vector<int>& slices) {
    return MlveEngine(params).jungle_term(jungle, slices);
}

inline cplx order_contribution(const ModelParams& params, int n) { return MlveEngine(params).order_contribution(n); }

inline TruncationResult logz_truncation(const ModelParams& params, int n_max,
                                        std::optional<cplx> reference = std::nullopt) {
    return MlveEngine(params).logz_truncation(n_max, reference);
}

} // namespace mlve
