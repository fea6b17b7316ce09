#pragma once
// Hardcore polymer gas on a finite monomer set: direct partition function
// and the tree (Mayer) expansion of log Z with interpolated non-tree factors.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <vector>

#include "mlve/combinatorics.hpp"
#include "mlve/error.hpp"
#include "mlve/numeric.hpp"
#include "mlve/quadrature.hpp"

namespace mlve {

struct Polymer {
    std::uint32_t mask = 0; // bit m set when monomer m belongs to the polymer
    cplx activity;
};

struct PolymerGas {
    int monomers = 0;
    std::vector<Polymer> polymers;

    void validate() const {
        detail::require(monomers >= 1 && monomers <= 16, "PolymerGas: monomer count must be in [1, 16]");
        for (const auto& p : polymers) {
            detail::require(p.mask != 0, "PolymerGas: polymers must be nonempty");
            detail::require(p.mask < (1u << monomers), "PolymerGas: polymer uses an unknown monomer");
        }
    }
};

inline constexpr int kMaxDirectMonomers = 8;
inline constexpr int kMaxMayerMonomers = 6;
inline constexpr int kMaxMayerOrder = 5;

/// Sum over unordered collections of pairwise disjoint polymers (empty one gives 1).
inline cplx polymer_z_direct(const PolymerGas& gas) {
    gas.validate();
    if (gas.monomers > kMaxDirectMonomers)
        throw BudgetError("polymer_z_direct: more than " + std::to_string(kMaxDirectMonomers) + " monomers");
    // Merge duplicate polymers.
    std::map<std::uint32_t, cplx> act;
    for (const auto& p : gas.polymers) act[p.mask] += p.activity;
    std::vector<std::pair<std::uint32_t, cplx>> list(act.begin(), act.end());
    auto rec = [&](auto&& self, std::size_t i, std::uint32_t used) -> cplx {
        if (i == list.size()) return 1.0;
        cplx v = self(self, i + 1, used);
        if (!(list[i].first & used)) v += list[i].second * self(self, i + 1, used | list[i].first);
        return v;
    };
    return rec(rec, 0, 0);
}

/// Sum_{P containing p0} |A(P)| e^{|P|}.
inline double convergence_condition(const PolymerGas& gas, int p0) {
    gas.validate();
    detail::require(p0 >= 0 && p0 < gas.monomers, "convergence_condition: root monomer out of range");
    double s = 0.0;
    for (const auto& p : gas.polymers)
        if (p.mask >> p0 & 1u) s += std::abs(p.activity) * std::exp(static_cast<double>(std::popcount(p.mask)));
    return s;
}

namespace detail {

/// Index of edge (a,b), a < b, in the lexicographic edge list of K_n.
inline int edge_index(int n, int a, int b) {
    if (a > b) std::swap(a, b);
    return a * n - a * (a + 1) / 2 + (b - a - 1);
}

inline std::uint32_t relabel_graph(int n, std::uint32_t g, const std::array<int, 8>& perm) {
    std::uint32_t out = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (g >> edge_index(n, a, b) & 1u) out |= 1u << edge_index(n, perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
    return out;
}

inline std::uint32_t canonical_graph(int n, std::uint32_t g) {
    std::array<int, 8> perm{};
    std::iota(perm.begin(), perm.begin() + n, 0);
    std::uint32_t best = g;
    do {
        best = std::min(best, relabel_graph(n, g, perm));
    } while (std::next_permutation(perm.begin(), perm.begin() + n));
    return best;
}

inline bool graph_connected(int n, std::uint32_t g) {
    UnionFind uf(n);
    int comps = n;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (g >> edge_index(n, a, b) & 1u) comps -= uf.unite(a, b) ? 1 : 0;
    return comps == 1;
}

} // namespace detail

/// eps^T(w) = prod_{l in T} eta_l prod_{l not in T} (1 + eta_l X^T_l(w)) with
/// eta_l = -1 on the edges of G and 0 elsewhere.
inline double mayer_epsilon(int n, std::uint32_t graph, const Forest& tree, std::span<const double> w) {
    detail::require(tree.is_spanning_tree() && tree.n == n, "mayer_epsilon: tree must span the n vertices");
    double v = 1.0;
    for (const auto& e : tree.edges) {
        if (!(graph >> detail::edge_index(n, e.a, e.b) & 1u)) return 0.0;
        v = -v;
    }
    // min of w along tree paths
    std::vector<double> best(static_cast<std::size_t>(n * n), 1.0);
    for (int s = 0; s < n; ++s) {
        std::vector<int> stack{s};
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        seen[static_cast<std::size_t>(s)] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (std::size_t i = 0; i < tree.edges.size(); ++i) {
                const auto& e = tree.edges[i];
                const int other = e.a == u ? e.b : e.b == u ? e.a : -1;
                if (other < 0 || seen[static_cast<std::size_t>(other)]) continue;
                seen[static_cast<std::size_t>(other)] = 1;
                best[static_cast<std::size_t>(s * n + other)] = std::min(best[static_cast<std::size_t>(s * n + u)], w[i]);
                stack.push_back(other);
            }
        }
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (!(graph >> detail::edge_index(n, a, b) & 1u)) continue;
            if (std::find(tree.edges.begin(), tree.edges.end(), Edge(a, b)) != tree.edges.end()) continue;
            v *= 1.0 - best[static_cast<std::size_t>(a * n + b)];
        }
    return v;
}

/// sum_T int dw eps^T over spanning trees T of K_n for the intersection graph G.
class MayerGraphWeights {
public:
    // On each ordering cell eps^T times the Jacobian is a polynomial of degree
    // <= 6 + 3 per variable for n <= 5, so 5 nodes are exact.
    explicit MayerGraphWeights(int gl_nodes = 5) : rule_(gauss_legendre_unit(gl_nodes)) {}

    double operator()(int n, std::uint32_t graph) {
        detail::require(n >= 1 && n <= kMaxMayerOrder, "mayer graph weight: n out of range");
        if (n == 1) return 1.0;
        if (!detail::graph_connected(n, graph)) return 0.0;
        const std::uint32_t canon = detail::canonical_graph(n, graph);
        {
            std::lock_guard<std::mutex> lk(mu_);
            const auto it = cache_.find({n, canon});
            if (it != cache_.end()) return it->second;
        }
        double total = 0.0;
        for_each_tree(n, [&](const Forest& t) {
            for (const auto& e : t.edges)
                if (!(canon >> detail::edge_index(n, e.a, e.b) & 1u)) return;
            total += integrate_unit_cube_ordered<double>(n - 1, rule_, [&](std::span<const double> w) {
                return mayer_epsilon(n, canon, t, w);
            });
        });
        std::lock_guard<std::mutex> lk(mu_);
        cache_[{n, canon}] = total;
        return total;
    }

private:
    QuadratureRule rule_;
    std::mutex mu_;
    std::map<std::pair<int, std::uint32_t>, double> cache_;
};

/// sum over connected spanning subgraphs C of G of (-1)^{|C|}.
inline long long connected_subgraph_sum(int n, std::uint32_t graph) {
    detail::require(n >= 1 && n <= 6, "connected_subgraph_sum: n out of range");
    if (n == 1) return 1;
    long long total = 0;
    for (std::uint32_t c = graph;; c = (c - 1) & graph) {
        if (detail::graph_connected(n, c)) total += std::popcount(c) % 2 ? -1 : 1;
        if (c == 0) break;
    }
    return total;
}

struct MayerResult {
    cplx total;
    std::vector<cplx> orders; // n = 1..n_max
};

/// log Z ~ sum_{n <= n_max} (1/n!) sum over ordered polymer tuples of prod A(P_i) * phi(G),
/// G the intersection graph of the tuple (identical polymers intersect).
inline MayerResult mayer_logz(const PolymerGas& gas, int n_max, MayerGraphWeights* weights = nullptr) {
    gas.validate();
    detail::require(n_max >= 0, "mayer_logz: n_max must be >= 0");
    if (n_max > kMaxMayerOrder)
        throw BudgetError("mayer_logz: n_max exceeds " + std::to_string(kMaxMayerOrder));
    if (gas.monomers > kMaxMayerMonomers)
        throw BudgetError("mayer_logz: more than " + std::to_string(kMaxMayerMonomers) + " monomers");
    MayerGraphWeights local;
    MayerGraphWeights& phi = weights ? *weights : local;
    std::vector<Polymer> list;
    for (const auto& p : gas.polymers)
        if (p.activity != 0.0) list.push_back(p);

    MayerResult res;
    for (int n = 1; n <= n_max; ++n) {
        KahanSum<cplx> sum;
        std::vector<int> pick(static_cast<std::size_t>(n));
        auto rec = [&](auto&& self, int i, std::uint32_t graph, cplx prod) -> void {
            if (i == n) {
                const double f = phi(n, graph);
                if (f != 0.0) sum.add(prod * f);
                return;
            }
            for (std::size_t k = 0; k < list.size(); ++k) {
                std::uint32_t g = graph;
                for (int a = 0; a < i; ++a)
                    if (list[static_cast<std::size_t>(pick[static_cast<std::size_t>(a)])].mask & list[k].mask)
                        g |= 1u << detail::edge_index(n, a, i);
                pick[static_cast<std::size_t>(i)] = static_cast<int>(k);
                self(self, i + 1, g, prod * list[k].activity);
            }
        };
        rec(rec, 0, 0u, cplx(1.0));
        const cplx c = sum.value() / static_cast<double>(factorial_u64(n));
        res.orders.push_back(c);
        res.total += c;
    }
    return res;
}

} // namespace mlve
