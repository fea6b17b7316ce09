#pragma once
// Invariant suites run by `mlve verify`. Each suite returns PASS, WARN (a
// documented discrepancy that is reported, not fixed) or FAIL with messages.

#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mlve/bounds.hpp"
#include "mlve/combinatorics.hpp"
#include "mlve/engine.hpp"
#include "mlve/grassmann.hpp"
#include "mlve/identities.hpp"
#include "mlve/interpolation.hpp"
#include "mlve/mayer.hpp"
#include "mlve/model.hpp"
#include "mlve/oracle.hpp"

namespace mlve {

enum class SuiteStatus { pass, warn, fail };

inline const char* to_string(SuiteStatus s) {
    switch (s) {
    case SuiteStatus::pass: return "PASS";
    case SuiteStatus::warn: return "WARN";
    default: return "FAIL";
    }
}

struct SuiteResult {
    explicit SuiteResult(std::string n = {}) : name(std::move(n)) {}

    std::string name;
    SuiteStatus status = SuiteStatus::pass;
    int checks = 0;
    std::vector<std::string> messages;

    void check(bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            status = SuiteStatus::fail;
            messages.push_back("failed: " + what);
        }
    }
    void warn(const std::string& what) {
        if (status == SuiteStatus::pass) status = SuiteStatus::warn;
        messages.push_back("warning: " + what);
    }
};

struct VerifyOptions {
    std::uint64_t seed = 20240501;
    int domination_max_order = 2; // n <= this in the domination suite
    int random_samples = 1000;
    bool inject_grassmann_sign_error = false;
};

namespace detail {

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

/// Random spanning jungle on n vertices: random tree, random colouring.
inline Jungle random_spanning_jungle(int n, std::mt19937_64& rng) {
    Jungle j{n, {}, {}};
    if (n == 1) return j;
    std::vector<int> seq(static_cast<std::size_t>(std::max(0, n - 2)));
    for (auto& x : seq) x = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const auto edges = n == 2 ? std::vector<Edge>{Edge(0, 1)} : pruefer_decode(seq, n);
    for (const auto& e : edges) (std::bernoulli_distribution(0.5)(rng) ? j.fermionic : j.bosonic).push_back(e);
    return j;
}

/// Random gas on 1..5 monomers, rescaled so the worst root has condition `target`.
inline PolymerGas random_convergent_gas(std::mt19937_64& rng, double target) {
    PolymerGas g;
    g.monomers = 1 + static_cast<int>(rng() % 5);
    const int np = 1 + static_cast<int>(rng() % 6);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < np; ++k) {
        const auto mask = 1 + static_cast<std::uint32_t>(rng() % ((1u << g.monomers) - 1));
        g.polymers.push_back({mask, U(rng)});
    }
    double worst = 0.0;
    for (int p0 = 0; p0 < g.monomers; ++p0) worst = std::max(worst, convergence_condition(g, p0));
    if (worst > 0.0)
        for (auto& p : g.polymers) p.activity *= target / worst;
    return g;
}

} // namespace detail

inline SuiteResult suite_model(const VerifyOptions& opt) {
    SuiteResult r("model");
    for (int d = 1; d <= 12; ++d) r.check(partition_weight_sum(d) == Rational(1), "partition weight identity d=" + std::to_string(d));
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst_forms = 0.0;
    for (int t = 0; t < opt.random_samples; ++t) {
        ModelParams p;
        p.lambda = cplx(U(rng), U(rng)) * 0.7071;
        p.M = 2 + static_cast<int>(rng() % 3);
        p.j_min = 1;
        p.j_max = 3;
        const int j = 1 + static_cast<int>(rng() % 3);
        const double sigma = 5.0 * U(rng);
        const cplx a = 1.0 + w_kernel(p, j, sigma), b = 1.0 + w_kernel_product(p, j, sigma);
        worst_forms = std::max(worst_forms, std::abs(a - b) / std::abs(b));
        ModelParams pr = p;
        pr.lambda = p.lambda.real();
        r.check(std::abs(std::exp(-v_kernel(pr, j, sigma))) <= 1.0 + 1e-15, "|exp(-V)| <= 1 at real coupling");
    }
    r.check(worst_forms < 1e-12, "sum and product forms agree (worst " + detail::fmt(worst_forms) + ")");
    ModelParams p;
    p.lambda = 0.4;
    const double h = 1e-5;
    for (int k = 1; k <= 3; ++k) {
        for (double s : {0.2, -0.7, 1.3}) {
            const cplx fd = (dv_derivative(p, 1, k, s + h) - dv_derivative(p, 1, k, s - h)) / (2 * h);
            const cplx ex = dv_derivative(p, 1, k + 1, s);
            r.check(std::abs(fd - ex) <= 1e-6 * std::max(1.0, std::abs(ex)), "dv_derivative k=" + std::to_string(k + 1) + " vs differences");
        }
    }
    for (int q = 1; q <= 3; ++q) {
        for (double s : {0.3, -1.1}) {
            const cplx fd = (dw_derivative(p, 2, q - 1, s + h) - dw_derivative(p, 2, q - 1, s - h)) / (2 * h);
            const cplx ex = dw_derivative(p, 2, q, s);
            r.check(std::abs(fd - ex) <= 1e-5 * std::max(1e-3, std::abs(ex)), "dw_derivative q=" + std::to_string(q) + " vs differences");
        }
    }
    return r;
}

inline SuiteResult suite_combinatorics(const VerifyOptions&) {
    SuiteResult r("combinatorics");
    for (int n = 1; n <= 7; ++n) {
        std::uint64_t c = 0;
        for_each_tree(n, [&](const Forest& f) {
            ++c;
            const auto d = f.degrees();
            if (n >= 2) r.check(std::accumulate(d.begin(), d.end(), 0) == 2 * n - 2, "degree sum");
        });
        r.check(c == (n == 1 ? 1u : static_cast<std::uint64_t>(ipow_checked(n, n - 2))), "Cayley count n=" + std::to_string(n));
    }
    for (int n = 1; n <= 6; ++n) {
        std::uint64_t c = 0;
        bool closed = true;
        for_each_jungle(n, true, [&](const Jungle& j) {
            ++c;
            // Fermionic edges contract to a tree on the Bosonic blocks.
            const auto bl = j.block_level_fermionic();
            const int nb = static_cast<int>(j.blocks().blocks.size());
            closed = closed && Forest{nb, bl}.is_spanning_tree() && j.is_valid();
        });
        r.check(c == count_two_level_trees(n), "two-level tree count n=" + std::to_string(n));
        r.check(count_two_level_trees(n) <= two_level_tree_bound(n), "two-level tree bound n=" + std::to_string(n));
        r.check(closed, "jungle closure n=" + std::to_string(n));
    }
    for (int q = 2; q <= 7; ++q) {
        std::map<std::vector<int>, std::uint64_t> by_deg;
        for_each_tree(q, [&](const Forest& f) { ++by_deg[f.degrees()]; });
        for (const auto& [deg, c] : by_deg) r.check(count_trees_with_degrees(deg) == c, "degree-sequence count q=" + std::to_string(q));
    }
    for (int n = 1; n <= 8; ++n) {
        std::map<std::map<int, int>, std::uint64_t> by_profile;
        for_each_set_partition(n, [&](const BlockPartition& p) {
            std::map<int, int> prof;
            for (const auto& b : p.blocks) ++prof[static_cast<int>(b.size())];
            ++by_profile[prof];
        });
        for (const auto& [prof, c] : by_profile) r.check(count_partitions_by_profile(n, prof) == c, "partition profile count n=" + std::to_string(n));
    }
    // Detailed Fermionic trees on a partition: spanning jungles with that Bosonic partition, per Bosonic forest.
    for (int n = 2; n <= 6; ++n) {
        std::map<std::vector<Edge>, std::uint64_t> per_forest;
        for_each_jungle(n, true, [&](const Jungle& j) { ++per_forest[j.bosonic]; });
        for (const auto& [bos, c] : per_forest) {
            const Jungle j{n, bos, {}};
            r.check(fermionic_forest_weight(j.blocks()) == c, "Fermionic forest weight n=" + std::to_string(n));
        }
    }
    for (int q = 2; q <= 8; ++q) r.check(coordination_sum(q) == binomial_u64(3 * q - 3, q - 2), "coordination sum q=" + std::to_string(q));
    for (int n = 1; n <= 8; ++n)
        r.check(profile_coefficient_sum(n) == Rational(static_cast<long long>(binomial_u64(2 * n - 1, n))), "profile coefficient identity n=" + std::to_string(n));
    return r;
}

inline SuiteResult suite_interpolation(const VerifyOptions& opt) {
    SuiteResult r("interpolation");
    std::mt19937_64 rng(opt.seed + 1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int n = 1; n <= 6; ++n) {
        const auto forests = enumerate_forests(n);
        bool ok = true;
        for (int t = 0; t < opt.random_samples; ++t) {
            const auto& f = forests[rng() % forests.size()];
            InterpolationPoint pt;
            for (std::size_t i = 0; i < f.edges.size(); ++i) pt.w.push_back(U(rng));
            ok = ok && is_interpolated_covariance(x_matrix(f, pt));
        }
        r.check(ok, "x_matrix in PS_n for n=" + std::to_string(n));
    }
    Eigen::Matrix3d bad;
    bad << 1, 1, 0, 1, 1, 1, 0, 1, 1;
    r.check(min_eigenvalue(bad) < -1e-3, "the non-positive path matrix has a negative eigenvalue");
    std::normal_distribution<double> N(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        std::map<Edge, double> c{{Edge(0, 1), N(rng)}, {Edge(0, 2), N(rng)}, {Edge(1, 2), N(rng)}};
        double f1 = 0.0;
        for (const auto& [e, v] : c) f1 += v;
        f1 = std::exp(f1);
        worst = std::max(worst, std::abs(forest_formula_eval(3, exp_family(c)) - f1) / std::max(1.0, std::abs(f1)));
    }
    r.check(worst < 1e-6, "forest formula on the exponential family (worst " + detail::fmt(worst) + ")");
    for (int n = 1; n <= 3; ++n) {
        const auto t = Polynomial::variable(1, 0);
        std::vector<Polynomial> fs(static_cast<std::size_t>(n), t * t);
        const auto res = replica_gaussian_eval(Eigen::MatrixXd::Identity(1, 1), fs);
        r.check(std::abs(res.left - res.right) < 1e-12, "replica Gaussian identity n=" + std::to_string(n));
    }
    return r;
}

inline SuiteResult suite_grassmann(const VerifyOptions& opt) {
    SuiteResult r("grassmann");
    std::mt19937_64 rng(opt.seed + 2);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int dim = 1; dim <= 5; ++dim) {
        Eigen::MatrixXd M(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) M(i, j) = U(rng);
        const auto E = GrassmannElement<double>::exp_bilinear(M);
        int failures = 0;
        std::string first;
        for (int k = 0; k <= dim; ++k) {
            // all ordered k-lists of distinct columns and rows
            std::vector<int> idx(static_cast<std::size_t>(dim));
            std::iota(idx.begin(), idx.end(), 0);
            std::vector<std::vector<int>> lists;
            auto gen = [&](auto&& self, std::vector<int>& cur, std::uint32_t used) -> void {
                if (static_cast<int>(cur.size()) == k) {
                    lists.push_back(cur);
                    return;
                }
                for (int i = 0; i < dim; ++i)
                    if (!(used >> i & 1u)) {
                        cur.push_back(i);
                        self(self, cur, used | 1u << i);
                        cur.pop_back();
                    }
            };
            std::vector<int> cur;
            gen(gen, cur, 0);
            for (const auto& a : lists)
                for (const auto& b : lists) {
                    double m = grassmann_minor(MinorSpec<double>{M, a, b});
                    if (opt.inject_grassmann_sign_error && k % 2 == 1) m = -m;
                    const double o = E.integrate_with(minor_monomial(a, b));
                    if (std::abs(m - o) > 1e-12 * std::max(1.0, std::abs(o))) {
                        if (failures++ == 0) {
                            std::ostringstream os;
                            os << "dim=" << dim << " cols=(";
                            for (int x : a) os << x << ' ';
                            os << ") rows=(";
                            for (int x : b) os << x << ' ';
                            os << ") minor=" << m << " oracle=" << o;
                            first = os.str();
                        }
                    }
                }
        }
        r.check(failures == 0, "minor formula equals Grassmann oracle, dim=" + std::to_string(dim) +
                                   (failures ? " (" + std::to_string(failures) + " cases, first " + first + ")" : ""));
    }
    return r;
}

inline SuiteResult suite_minor_bounds(const VerifyOptions& opt) {
    SuiteResult r("minor_bounds");
    std::mt19937_64 rng(opt.seed + 3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N(0.0, 1.0);
    double worst_eig = 0.0, worst_form = 0.0;
    int violations = 0;
    for (int t = 0; t < opt.random_samples; ++t) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const auto jg = detail::random_spanning_jungle(n, rng);
        std::vector<int> slices(static_cast<std::size_t>(n));
        for (auto& s : slices) s = 1 + static_cast<int>(rng() % 3);
        std::vector<double> w;
        for (std::size_t i = 0; i < jg.fermionic.size(); ++i) w.push_back(U(rng));
        const auto Y = lifted_y_matrix(jg, slices, w);
        worst_eig = std::min(worst_eig, min_eigenvalue(Y));
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = N(rng);
        worst_form = std::max(worst_form, std::abs(v.dot(Y * v) - layered_quadratic_form(jg, slices, w, v)));
        // unit diagonal holds for every vertex, so the minor checks apply directly
        const auto rep = check_minor_bound(Y, 4, rng());
        violations += rep.violations;
    }
    r.check(worst_eig >= -kPsdTolerance, "lifted Y is PSD (min eigenvalue " + detail::fmt(worst_eig) + ")");
    r.check(worst_form <= 1e-10, "layered sum of squares equals v^T Y v (worst " + detail::fmt(worst_form) + ")");
    r.check(violations == 0, "minor, Cauchy-Schwarz and Hadamard bounds (" + std::to_string(violations) + " violations)");
    return r;
}

inline SuiteResult suite_domination(const VerifyOptions& opt) {
    SuiteResult r("domination");
    for (double lam : {0.1, 0.5, 1.0}) {
        ModelParams p;
        p.lambda = lam;
        p.M = 10;
        p.j_min = 3;
        p.j_max = 3 + std::max(0, opt.domination_max_order - 1);
        MlveEngine e(p);
        double worst = 0.0;
        for (int n = 1; n <= opt.domination_max_order; ++n)
            for (const auto& jg : enumerate_jungles(n, true)) {
                std::vector<int> s(static_cast<std::size_t>(n));
                auto rec = [&](auto&& self, int i, std::uint32_t used) -> void {
                    if (i == n) {
                        const double v = std::abs(e.jungle_term(jg, s));
                        worst = std::max(worst, v / assemble_term_bound(jg, s, lam, p.M));
                        return;
                    }
                    for (int k = 0; k < p.num_slices(); ++k)
                        if (!(used >> k & 1u)) {
                            s[static_cast<std::size_t>(i)] = p.j_min + k;
                            self(self, i + 1, used | 1u << k);
                        }
                };
                rec(rec, 0, 0);
            }
        r.check(worst <= 1.0, "|term| <= bound at lambda=" + detail::fmt(lam) + " (worst ratio " + detail::fmt(worst) + ")");
    }
    return r;
}

inline SuiteResult suite_oracle(const VerifyOptions&) {
    SuiteResult r("oracle");
    ModelParams p;
    p.lambda = 0.2;
    const auto z = z_sigma_quadrature(p);
    r.check(z.reliable, "node doubling stable (delta " + detail::fmt(z.delta) + ")");
    r.check(std::abs(z.value.imag()) < 1e-12, "Z real for real coupling");
    const cplx zs = z_sigma_quadrature_fixed(p, kOracleNodes, Integrand::sliced);
    r.check(std::abs(zs - z.value) < 1e-12, "slice factorization identity");
    for (double s : {-3.0, -0.5, 0.7, 2.5})
        r.check(std::abs(z_integrand(p, s) - z_integrand(p, s, Integrand::sliced)) < 1e-12, "pointwise slice factorization");
    r.check(std::abs(logz_truncation(p, 1).total - first_order_oracle(p)) < 1e-8, "first order equals sum_j E[W_j]");
    for (double lam : {0.1, 0.3, 0.5}) {
        ModelParams q;
        q.lambda = lam;
        q.M = 10;
        q.j_max = 3;
        const auto zz = z_sigma_quadrature(q);
        r.check(zz.reliable && std::abs(zz.value) > 0.1, "Z bounded away from zero, lambda=" + detail::fmt(lam));
    }
    return r;
}

inline SuiteResult suite_stirling(const VerifyOptions&) {
    SuiteResult r("stirling");
    const auto rep = stirling_chain_check(1, 1000);
    r.check(rep.holds, "chain inequality for 1 <= q <= 1000 (worst log margin " + detail::fmt(static_cast<double>(rep.worst_margin)) + ")");
    return r;
}

inline SuiteResult suite_m_threshold(const VerifyOptions&) {
    SuiteResult r("m_threshold");
    const auto rep = m_threshold_check(1e8, 1, 1000);
    r.check(std::all_of(rep.violations.begin(), rep.violations.end(), [](int q) { return q == 1; }),
            "threshold holds for every q >= 2 at M = 1e8");
    if (!rep.violations.empty())
        r.warn("3^{3q} q^q M^{-q^2/8} = " + detail::fmt(rep.rows[0].value) + " > 1 at q = 1, M = 1e8");
    const auto rep16 = m_threshold_check(1e16, 1, 1000);
    r.check(rep16.violations.empty(), "threshold holds for every q at M = 1e16");
    for (double lam : {0.0, 0.5, 1.0}) {
        const auto s = lemma36_series(lam, 1e8, 1000, 50);
        r.check(s.tail_ok, "inner tail <= 1/(M^{1/8} - |lambda|^2) at lambda=" + detail::fmt(lam));
        r.check(s.converges, "S < 1 at M = 1e8, lambda=" + detail::fmt(lam));
    }
    return r;
}

inline SuiteResult suite_borel(const VerifyOptions& opt) {
    SuiteResult r("borel");
    std::mt19937_64 rng(opt.seed + 4);
    std::uniform_real_distribution<double> R(0.0, 1.2), G(-std::numbers::pi, std::numbers::pi);
    int disagree = 0;
    for (int t = 0; t < 10000; ++t) {
        const auto b = borel_domain(std::polar(R(rng), G(rng)));
        if (b.boundary) continue;
        if (b.inside_lambda != b.inside_disk || b.inside_disk != b.inside_inverse) ++disagree;
    }
    r.check(disagree == 0, "domain predicates agree on 1e4 samples");
    for (cplx lam : {std::polar(0.3, std::numbers::pi / 8), std::polar(0.5, 0.2), std::polar(0.4, -0.5),
                     std::polar(0.6, 0.1), std::polar(0.2, 0.6)}) {
        ModelParams p;
        p.lambda = lam;
        const auto z = z_sigma_quadrature(p);
        r.check(borel_domain(lam).inside_disk && z.reliable,
                "complex-coupling oracle stable inside the domain (delta " + detail::fmt(z.delta) + ")");
    }
    return r;
}

inline SuiteResult suite_mayer(const VerifyOptions& opt) {
    SuiteResult r("mayer");
    PolymerGas gas{2, {{0b01, 0.1}, {0b10, 0.1}, {0b11, 0.05}}};
    const cplx z = polymer_z_direct(gas);
    r.check(std::abs(z - (1.0 + 0.2 + 0.01 + 0.05)) < 1e-15, "direct enumeration of the two-monomer gas");
    MayerGraphWeights phi;
    const auto m = mayer_logz(gas, 4, &phi);
    r.check(std::abs(std::exp(m.total) - z) < 1e-3, "exp(mayer_logz(4)) within 1e-3 of Z");
    for (int n = 2; n <= 5; ++n)
        for (std::uint32_t g = 0; g < (1u << (n * (n - 1) / 2)); g += 7)
            r.check(std::abs(phi(n, g) - static_cast<double>(connected_subgraph_sum(n, g))) < 1e-9,
                    "tree-sum weight equals connected-subgraph sum, n=" + std::to_string(n));
    std::mt19937_64 rng(opt.seed + 5);
    std::uniform_real_distribution<double> U(-1.0, 1.0), T(0.05, 0.95);
    int bad = 0;
    std::string first;
    for (int t = 0; t < 100; ++t) {
        const auto rg = detail::random_convergent_gas(rng, T(rng));
        const cplx zd = polymer_z_direct(rg);
        const auto m4 = mayer_logz(rg, 4, &phi);
        // odd orders can overshoot, so compare n_max = 1, 2, 4
        std::vector<double> err;
        cplx partial = 0.0;
        for (const auto& c : m4.orders) {
            partial += c;
            err.push_back(std::abs(std::exp(partial) - zd));
        }
        const bool ok = err[1] <= err[0] * (1.0 + 1e-9) + 1e-15 && err[3] <= err[1] * (1.0 + 1e-9) + 1e-15 && err[3] < 1e-2;
        if (!ok && bad++ == 0) first = "gas #" + std::to_string(t) + " with " + std::to_string(rg.monomers) + " monomers";
    }
    r.check(bad == 0, "error decreases over n_max = 1, 2, 4 on 100 random gases satisfying the convergence condition (" +
                          std::to_string(bad) + " failures" + (bad ? ", first " + first : "") + ")");
    double worst_eps = 0.0;
    for (int n = 2; n <= 5; ++n) {
        const auto trees = enumerate_trees(n);
        for (int t = 0; t < 200; ++t) {
            const auto& tree = trees[rng() % trees.size()];
            std::vector<double> w;
            for (int i = 0; i + 1 < n; ++i) w.push_back(0.5 * (U(rng) + 1.0));
            const auto g = static_cast<std::uint32_t>(rng() % (1u << (n * (n - 1) / 2)));
            worst_eps = std::max(worst_eps, std::abs(mayer_epsilon(n, g, tree, w)));
        }
    }
    r.check(worst_eps <= 1.0, "|eps^T| <= 1 on sampled (T, w)");
    return r;
}

struct NamedSuite {
    const char* name;
    std::function<SuiteResult(const VerifyOptions&)> run;
};

inline const std::vector<NamedSuite>& verify_suites() {
    static const std::vector<NamedSuite> suites{
        {"model", suite_model},           {"combinatorics", suite_combinatorics}, {"interpolation", suite_interpolation},
        {"grassmann", suite_grassmann},   {"minor_bounds", suite_minor_bounds},   {"domination", suite_domination},
        {"oracle", suite_oracle},         {"stirling", suite_stirling},           {"m_threshold", suite_m_threshold},
        {"borel", suite_borel},           {"mayer", suite_mayer},
    };
    return suites;
}

} // namespace mlve
