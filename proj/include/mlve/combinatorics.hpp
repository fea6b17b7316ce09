#pragma once
// Labeled trees, forests, set partitions and two-level jungles on small
// vertex sets. Vertices are 0-based. Enumerators are visitor based: the
// callback receives each object by const reference, in a fixed order.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "mlve/error.hpp"
#include "mlve/numeric.hpp"

namespace mlve {

struct Edge {
    int a = 0;
    int b = 0;

    Edge() = default;
    Edge(int u, int v) : a(std::min(u, v)), b(std::max(u, v)) {}

    auto operator<=>(const Edge&) const = default;
};

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            auto& p = parent_[static_cast<std::size_t>(x)];
            p = parent_[static_cast<std::size_t>(p)];
            x = p;
        }
        return x;
    }
    /// false if x and y were already connected.
    bool unite(int x, int y) {
        x = find(x);
        y = find(y);
        if (x == y) return false;
        parent_[static_cast<std::size_t>(std::max(x, y))] = std::min(x, y);
        return true;
    }

private:
    std::vector<int> parent_;
};

struct Forest {
    int n = 0;
    std::vector<Edge> edges;

    bool is_acyclic() const {
        UnionFind uf(n);
        for (const auto& e : edges) {
            if (e.a < 0 || e.b >= n || e.a == e.b) return false;
            if (!uf.unite(e.a, e.b)) return false;
        }
        return true;
    }
    bool is_spanning_tree() const {
        return is_acyclic() && static_cast<int>(edges.size()) == n - 1;
    }
    std::vector<int> degrees() const {
        std::vector<int> d(static_cast<std::size_t>(n), 0);
        for (const auto& e : edges) {
            ++d[static_cast<std::size_t>(e.a)];
            ++d[static_cast<std::size_t>(e.b)];
        }
        return d;
    }
    /// Component label per vertex; labels are 0..c-1 in order of smallest vertex.
    std::vector<int> component_labels() const {
        UnionFind uf(n);
        for (const auto& e : edges) uf.unite(e.a, e.b);
        std::vector<int> label(static_cast<std::size_t>(n), -1);
        std::map<int, int> root_to_label;
        for (int v = 0; v < n; ++v) {
            const int r = uf.find(v);
            auto [it, inserted] = root_to_label.emplace(r, static_cast<int>(root_to_label.size()));
            label[static_cast<std::size_t>(v)] = it->second;
        }
        return label;
    }
    /// Vertex sets of the connected components (each sorted, ordered by smallest vertex).
    std::vector<std::vector<int>> components() const {
        const auto label = component_labels();
        const int c = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
        std::vector<std::vector<int>> out(static_cast<std::size_t>(c));
        for (int v = 0; v < n; ++v) out[static_cast<std::size_t>(label[static_cast<std::size_t>(v)])].push_back(v);
        return out;
    }
};

struct BlockPartition {
    std::vector<std::vector<int>> blocks;

    int num_vertices() const {
        int s = 0;
        for (const auto& b : blocks) s += static_cast<int>(b.size());
        return s;
    }
    bool is_valid(int n) const {
        std::vector<int> seen(static_cast<std::size_t>(n), 0);
        for (const auto& b : blocks) {
            if (b.empty()) return false;
            for (int v : b) {
                if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]++) return false;
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
    }
    /// block index per vertex
    std::vector<int> block_of(int n) const {
        std::vector<int> out(static_cast<std::size_t>(n), -1);
        for (std::size_t i = 0; i < blocks.size(); ++i)
            for (int v : blocks[i]) out[static_cast<std::size_t>(v)] = static_cast<int>(i);
        return out;
    }
};

/// Ordered pair (Bosonic forest, Fermionic edge set) on n vertices.
struct Jungle {
    int n = 0;
    std::vector<Edge> bosonic;
    std::vector<Edge> fermionic;

    Forest bosonic_forest() const { return {n, bosonic}; }
    Forest union_forest() const {
        Forest f{n, bosonic};
        f.edges.insert(f.edges.end(), fermionic.begin(), fermionic.end());
        return f;
    }
    /// Union is a forest and every Fermionic edge joins distinct Bosonic blocks.
    bool is_valid() const {
        if (!union_forest().is_acyclic()) return false;
        const auto label = bosonic_forest().component_labels();
        return std::all_of(fermionic.begin(), fermionic.end(), [&](const Edge& e) {
            return label[static_cast<std::size_t>(e.a)] != label[static_cast<std::size_t>(e.b)];
        });
    }
    bool is_spanning() const { return is_valid() && union_forest().is_spanning_tree(); }

    /// Bosonic blocks (components of the Bosonic forest).
    BlockPartition blocks() const { return {bosonic_forest().components()}; }

    /// Fermionic edges contracted to block-level edges.
    std::vector<Edge> block_level_fermionic() const {
        const auto label = bosonic_forest().component_labels();
        std::vector<Edge> out;
        for (const auto& e : fermionic)
            out.emplace_back(label[static_cast<std::size_t>(e.a)], label[static_cast<std::size_t>(e.b)]);
        return out;
    }
};

inline constexpr int kMaxTreeVertices = 8;
inline constexpr int kMaxForestVertices = 8;
inline constexpr int kMaxJungleVertices = 7;

namespace detail {

inline void check_budget(int n, int limit, const char* what) {
    detail::require(n >= 1, std::string(what) + ": n must be >= 1");
    if (n > limit)
        throw BudgetError(std::string(what) + ": n = " + std::to_string(n) + " exceeds the enumeration budget " +
                          std::to_string(limit));
}

/// Edges of K_n in lexicographic order.
inline std::vector<Edge> complete_graph_edges(int n) {
    std::vector<Edge> out;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) out.emplace_back(a, b);
    return out;
}

/// Decodes a Pruefer sequence into the edge list of a labeled tree.
inline std::vector<Edge> pruefer_decode(const std::vector<int>& seq, int n) {
    std::vector<int> degree(static_cast<std::size_t>(n), 1);
    for (int x : seq) ++degree[static_cast<std::size_t>(x)];
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n - 1));
    for (int x : seq) {
        for (int leaf = 0; leaf < n; ++leaf) {
            if (degree[static_cast<std::size_t>(leaf)] == 1) {
                edges.emplace_back(leaf, x);
                --degree[static_cast<std::size_t>(leaf)];
                --degree[static_cast<std::size_t>(x)];
                break;
            }
        }
    }
    int u = -1, v = -1;
    for (int i = 0; i < n; ++i) {
        if (degree[static_cast<std::size_t>(i)] == 1) (u < 0 ? u : v) = i;
    }
    edges.emplace_back(u, v);
    std::sort(edges.begin(), edges.end());
    return edges;
}

} // namespace detail

/// Every labeled spanning tree on {0..n-1}, via Pruefer sequences.
template <class Visitor>
void for_each_tree(int n, Visitor&& visit) {
    detail::check_budget(n, kMaxTreeVertices, "enumerate_trees");
    if (n == 1) {
        visit(Forest{1, {}});
        return;
    }
    if (n == 2) {
        visit(Forest{2, {Edge(0, 1)}});
        return;
    }
    std::vector<int> seq(static_cast<std::size_t>(n - 2), 0);
    while (true) {
        visit(Forest{n, detail::pruefer_decode(seq, n)});
        std::size_t d = 0;
        while (d < seq.size() && ++seq[d] == n) seq[d++] = 0;
        if (d == seq.size()) break;
    }
}

inline std::vector<Forest> enumerate_trees(int n) {
    std::vector<Forest> out;
    for_each_tree(n, [&](const Forest& f) { out.push_back(f); });
    return out;
}

/// Every acyclic edge subset of K_n (including the empty forest). Backtracks
/// over the edges of K_n in lexicographic order with union-find pruning.
template <class Visitor>
void for_each_forest(int n, Visitor&& visit) {
    detail::check_budget(n, kMaxForestVertices, "enumerate_forests");
    const auto all = detail::complete_graph_edges(n);
    Forest current{n, {}};
    auto rec = [&](auto&& self, std::size_t next) -> void {
        visit(std::as_const(current));
        for (std::size_t i = next; i < all.size(); ++i) {
            current.edges.push_back(all[i]);
            if (current.is_acyclic()) self(self, i + 1);
            current.edges.pop_back();
        }
    };
    rec(rec, 0);
}

inline std::vector<Forest> enumerate_forests(int n) {
    std::vector<Forest> out;
    for_each_forest(n, [&](const Forest& f) { out.push_back(f); });
    return out;
}

/// Every two-level jungle: each edge of a forest (spanning tree if `spanning`)
/// is coloured Bosonic or Fermionic. Bitmask bit i set means edge i is Fermionic;
/// masks are visited in increasing order.
template <class Visitor>
void for_each_jungle(int n, bool spanning, Visitor&& visit) {
    detail::check_budget(n, kMaxJungleVertices, "enumerate_jungles");
    auto colour = [&](const Forest& f) {
        const std::size_t k = f.edges.size();
        for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
            Jungle j{n, {}, {}};
            for (std::size_t i = 0; i < k; ++i) {
                if (mask >> i & 1u)
                    j.fermionic.push_back(f.edges[i]);
                else
                    j.bosonic.push_back(f.edges[i]);
            }
            visit(std::as_const(j));
        }
    };
    if (spanning)
        for_each_tree(n, colour);
    else
        for_each_forest(n, colour);
}

inline std::vector<Jungle> enumerate_jungles(int n, bool spanning) {
    std::vector<Jungle> out;
    for_each_jungle(n, spanning, [&](const Jungle& j) { out.push_back(j); });
    return out;
}

/// Set partitions of {0..n-1} via restricted growth strings.
template <class Visitor>
void for_each_set_partition(int n, Visitor&& visit) {
    detail::require(n >= 1 && n <= 12, "for_each_set_partition: n must be in [1, 12]");
    std::vector<int> rgs(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int i, int max_label) -> void {
        if (i == n) {
            BlockPartition p;
            p.blocks.resize(static_cast<std::size_t>(max_label + 1));
            for (int v = 0; v < n; ++v) p.blocks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(v)])].push_back(v);
            visit(std::as_const(p));
            return;
        }
        for (int l = 0; l <= max_label + 1; ++l) {
            rgs[static_cast<std::size_t>(i)] = l;
            self(self, i + 1, std::max(max_label, l));
        }
    };
    rgs[0] = 0;
    rec(rec, 1, 0);
}

/// Number of labeled trees on q vertices with vertex degrees d_1..d_q:
/// (q-2)! / prod (d_i - 1)!.
inline std::uint64_t count_trees_with_degrees(const std::vector<int>& degrees) {
    const int q = static_cast<int>(degrees.size());
    detail::require(q >= 2, "count_trees_with_degrees: need at least two vertices");
    int sum = 0;
    for (int d : degrees) {
        detail::require(d >= 1, "count_trees_with_degrees: degrees must be >= 1");
        sum += d;
    }
    detail::require(sum == 2 * q - 2, "count_trees_with_degrees: degree sum must equal 2q - 2");
    // Multinomial (q-2)! / prod (d_i-1)! as a product of binomials.
    std::uint64_t r = 1;
    int placed = 0;
    for (int d : degrees) {
        placed += d - 1;
        r *= binomial_u64(placed, d - 1);
    }
    return r;
}

/// n! / prod_q (m_q! (q!)^{m_q}) for the profile {q: m_q}.
inline std::uint64_t count_partitions_by_profile(int n, const std::map<int, int>& profile) {
    int sum = 0;
    for (auto [q, m] : profile) {
        detail::require(q >= 1 && m >= 0, "count_partitions_by_profile: invalid profile entry");
        sum += q * m;
    }
    detail::require(sum == n, "count_partitions_by_profile: profile does not add up to n");
    // Place blocks one at a time, dividing out the m_q! orderings per size.
    unsigned __int128 r = 1;
    int remaining = n;
    for (auto [q, m] : profile) {
        for (int i = 0; i < m; ++i) {
            r *= binomial_u64(remaining, q);
            remaining -= q;
        }
        r /= factorial_u64(m);
    }
    return static_cast<std::uint64_t>(r);
}

/// Exact number of two-level spanning trees, 2^{n-1} n^{n-2}.
inline std::uint64_t count_two_level_trees(int n) {
    detail::require(n >= 1 && n <= 12, "count_two_level_trees: n must be in [1, 12]");
    if (n == 1) return 1;
    return (std::uint64_t{1} << (n - 1)) * static_cast<std::uint64_t>(ipow_checked(n, n - 2));
}

/// 2^{2n} n^{n-2} (with n^{n-2} = 1 at n = 1).
inline std::uint64_t two_level_tree_bound(int n) {
    detail::require(n >= 1 && n <= 12, "two_level_tree_bound: n must be in [1, 12]");
    const std::uint64_t tail = n == 1 ? 1 : static_cast<std::uint64_t>(ipow_checked(n, n - 2));
    return (std::uint64_t{1} << (2 * n)) * tail;
}

/// Number of detailed Fermionic trees hooking the blocks of a partition:
/// (sum |B|)^{|P|-2} prod |B|, and 1 for a single block.
inline std::uint64_t fermionic_forest_weight(const BlockPartition& partition) {
    const int nb = static_cast<int>(partition.blocks.size());
    detail::require(nb >= 1, "fermionic_forest_weight: empty partition");
    if (nb == 1) return 1;
    std::uint64_t total = 0, prod = 1;
    for (const auto& b : partition.blocks) {
        total += b.size();
        prod *= b.size();
    }
    return static_cast<std::uint64_t>(ipow_checked(static_cast<std::int64_t>(total), nb - 2)) * prod;
}

} // namespace mlve
