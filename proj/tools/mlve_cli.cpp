// mlve command-line front end.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or config error,
// 3 numerical failure (unreliable oracle, budget exceeded).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>

#include "mlve/mlve.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    bool trace = false;
};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json load_config(const Common& c) {
    if (c.config_path.empty()) return json::object();
    if (!fs::exists(c.config_path)) throw UsageError("config file not found: " + c.config_path);
    std::ifstream in(c.config_path);
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw UsageError("config must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("config parse error: ") + e.what());
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("config key '") + key + "' has the wrong type");
    }
}

json section(const json& cfg, const char* key) {
    if (!cfg.contains(key)) return json::object();
    if (!cfg.at(key).is_object()) throw UsageError(std::string("config section '") + key + "' must be an object");
    return cfg.at(key);
}

mlve::cplx parse_complex(const json& v, const char* what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
    if (v.is_object() && v.contains("re")) return {v.at("re").get<double>(), get_or(v, "im", 0.0)};
    throw UsageError(std::string(what) + " must be a number, [re, im] or {\"re\", \"im\"}");
}

mlve::ModelParams model_params(const json& cfg) {
    const json m = section(cfg, "model");
    mlve::ModelParams p;
    p.lambda = m.contains("lambda") ? parse_complex(m.at("lambda"), "model.lambda") : mlve::cplx(0.2);
    p.M = get_or(m, "M", 2);
    p.j_min = get_or(m, "j_min", 1);
    p.j_max = get_or(m, "j_max", 3);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid model parameters: ") + e.what());
    }
    return p;
}

mlve::EngineOptions engine_options(const json& cfg, int threads) {
    const json e = section(cfg, "engine");
    mlve::EngineOptions o;
    o.gh_nodes_small = get_or(e, "gh_nodes_small", o.gh_nodes_small);
    o.gh_nodes_large = get_or(e, "gh_nodes_large", o.gh_nodes_large);
    o.gl_nodes = get_or(e, "gl_nodes", o.gl_nodes);
    o.eigen_cutoff = get_or(e, "eigen_cutoff", o.eigen_cutoff);
    o.prune = get_or(e, "prune", o.prune);
    o.conjugate_symmetry = get_or(e, "conjugate_symmetry", o.conjugate_symmetry);
    o.threads = threads;
    if (threads < 1) throw UsageError("--threads must be >= 1");
    return o;
}

json params_json(const mlve::ModelParams& p) {
    return {{"lambda", {p.lambda.real(), p.lambda.imag()}}, {"M", p.M}, {"j_min", p.j_min}, {"j_max", p.j_max}};
}

json edges_json(const std::vector<mlve::Edge>& es) {
    json a = json::array();
    for (const auto& e : es) a.push_back({e.a, e.b});
    return a;
}

/// Files are staged in memory and written only after the command succeeds.
class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
    std::ostringstream& file(const std::string& name) { return files_[name]; }
    void write_json(const std::string& name, json j) {
        j["schema_version"] = kSchemaVersion;
        files_[name] << j.dump(2) << '\n';
    }
    void flush() {
        fs::create_directories(dir_);
        for (const auto& [name, body] : files_) {
            std::ofstream out(fs::path(dir_) / name, std::ios::binary);
            out << body.str();
            if (!out) throw std::runtime_error("cannot write " + (fs::path(dir_) / name).string());
        }
    }

private:
    std::string dir_;
    std::map<std::string, std::ostringstream> files_;
};

int cmd_compare(const Common& c) {
    const json cfg = load_config(c);
    const auto p = model_params(cfg);
    const auto opt = engine_options(cfg, c.threads);
    const int n_max = get_or(cfg, "n_max", 3);
    if (n_max < 1 || n_max > mlve::kMaxEngineOrder)
        throw UsageError("n_max must be in [1, " + std::to_string(mlve::kMaxEngineOrder) + "]");
    const int nodes = get_or(section(cfg, "oracle"), "nodes", mlve::kOracleNodes);
    const double tol = get_or(section(cfg, "oracle"), "tolerance", mlve::kOracleTolerance);
    Outputs out(c.out_dir);

    const auto z = mlve::z_sigma_quadrature(p, nodes, mlve::Integrand::full, tol);
    if (!z.reliable) throw mlve::ReliabilityError("oracle not node-doubling stable (delta " + num(z.delta) + ")");
    const mlve::cplx logz = std::log(z.value);

    std::mutex mu;
    mlve::TraceCallback trace;
    if (c.trace) {
        trace = [&](const mlve::TermRecord& r) {
            json j{{"schema_version", kSchemaVersion},
                   {"n", r.n},
                   {"jungle_id", r.jungle_id},
                   {"bosonic", edges_json(r.jungle.bosonic)},
                   {"fermionic", edges_json(r.jungle.fermionic)},
                   {"slices", r.slices},
                   {"value", {r.value.real(), r.value.imag()}}};
            std::lock_guard<std::mutex> lk(mu);
            out.file("trace.jsonl") << j.dump() << '\n';
        };
    }
    const mlve::MlveEngine engine(p, opt);
    const auto res = engine.logz_truncation(n_max, logz, trace);

    auto& csv = out.file("compare.csv");
    csv << "n,order_re,order_im,S_re,S_im,abs_error\n";
    json rows = json::array();
    bool decreasing = true;
    for (int n = 1; n <= n_max; ++n) {
        const auto i = static_cast<std::size_t>(n - 1);
        csv << n << ',' << num(res.orders[i].real()) << ',' << num(res.orders[i].imag()) << ','
            << num(res.partial_sums[i].real()) << ',' << num(res.partial_sums[i].imag()) << ','
            << num(res.distances[i]) << '\n';
        rows.push_back({{"n", n}, {"S", {res.partial_sums[i].real(), res.partial_sums[i].imag()}}, {"abs_error", res.distances[i]}});
        if (i > 0 && res.distances[i] > res.distances[i - 1]) decreasing = false;
    }
    out.write_json("compare.json", {{"command", "compare"},
                                    {"params", params_json(p)},
                                    {"n_max", n_max},
                                    {"oracle", {{"Z", {z.value.real(), z.value.imag()}},
                                                {"logZ", {logz.real(), logz.imag()}},
                                                {"delta", z.delta},
                                                {"nodes", nodes}}},
                                    {"rows", rows},
                                    {"error_decreasing", decreasing}});
    out.flush();
    std::printf("log Z oracle = %.15g%+.15gi\n", logz.real(), logz.imag());
    for (int n = 1; n <= n_max; ++n)
        std::printf("S_%d = %.15g  |S_n - log Z| = %.3g\n", n, res.partial_sums[static_cast<std::size_t>(n - 1)].real(),
                    res.distances[static_cast<std::size_t>(n - 1)]);
    return 0;
}

int cmd_oracle(const Common& c) {
    const json cfg = load_config(c);
    const auto p = model_params(cfg);
    const int nodes = get_or(section(cfg, "oracle"), "nodes", mlve::kOracleNodes);
    const double tol = get_or(section(cfg, "oracle"), "tolerance", mlve::kOracleTolerance);
    const auto z = mlve::z_sigma_quadrature(p, nodes, mlve::Integrand::full, tol);
    if (!z.reliable) throw mlve::ReliabilityError("oracle not node-doubling stable (delta " + num(z.delta) + ")");
    const mlve::cplx logz = std::log(z.value);
    Outputs out(c.out_dir);
    out.file("oracle.csv") << "lambda_re,lambda_im,M,j_min,j_max,Z_re,Z_im,logZ_re,logZ_im,delta\n"
                           << num(p.lambda.real()) << ',' << num(p.lambda.imag()) << ',' << p.M << ',' << p.j_min << ','
                           << p.j_max << ',' << num(z.value.real()) << ',' << num(z.value.imag()) << ','
                           << num(logz.real()) << ',' << num(logz.imag()) << ',' << num(z.delta) << '\n';
    out.write_json("oracle.json", {{"command", "oracle"},
                                   {"params", params_json(p)},
                                   {"Z", {z.value.real(), z.value.imag()}},
                                   {"logZ", {logz.real(), logz.imag()}},
                                   {"delta", z.delta},
                                   {"nodes", nodes},
                                   {"reliable", z.reliable}});
    out.flush();
    std::printf("Z = %.15g%+.15gi\nlog Z = %.15g%+.15gi\n", z.value.real(), z.value.imag(), logz.real(), logz.imag());
    return 0;
}

int cmd_enumerate(const Common& c) {
    const json cfg = load_config(c);
    const json e = section(cfg, "enumerate");
    const int n_max = get_or(e, "n_max", 6);
    const bool edges = c.trace || get_or(e, "edges", false);
    if (n_max < 1 || n_max > mlve::kMaxJungleVertices) throw UsageError("enumerate.n_max must be in [1, 7]");
    Outputs out(c.out_dir);
    auto& csv = out.file("enumerate.csv");
    csv << "n,kind,count,closed_form\n";
    auto emit = [&](int n, const char* kind, std::size_t id, const json& body) {
        if (!edges) return;
        json j{{"schema_version", kSchemaVersion}, {"n", n}, {"kind", kind}, {"id", id}};
        j.update(body);
        out.file("enumerate.jsonl") << j.dump() << '\n';
    };
    for (int n = 1; n <= n_max; ++n) {
        std::size_t trees = 0, forests = 0, jungles = 0;
        mlve::for_each_tree(n, [&](const mlve::Forest& f) { emit(n, "tree", trees++, {{"edges", edges_json(f.edges)}}); });
        mlve::for_each_forest(n, [&](const mlve::Forest& f) { emit(n, "forest", forests++, {{"edges", edges_json(f.edges)}}); });
        mlve::for_each_jungle(n, true, [&](const mlve::Jungle& j) {
            emit(n, "spanning_jungle", jungles++, {{"bosonic", edges_json(j.bosonic)}, {"fermionic", edges_json(j.fermionic)}});
        });
        const auto cayley = n == 1 ? 1ull : static_cast<unsigned long long>(mlve::ipow_checked(n, n - 2));
        csv << n << ",tree," << trees << ',' << cayley << '\n';
        csv << n << ",forest," << forests << ",\n";
        csv << n << ",spanning_jungle," << jungles << ',' << mlve::count_two_level_trees(n) << '\n';
        std::printf("n=%d trees=%zu forests=%zu spanning_jungles=%zu\n", n, trees, forests, jungles);
    }
    out.flush();
    return 0;
}

int cmd_verify_bounds(const Common& c) {
    const json cfg = load_config(c);
    const json b = section(cfg, "bounds");
    const double M = get_or(b, "M", 1e8);
    const int q_max = get_or(b, "q_max", 1000);
    const int b_max = get_or(b, "b_max", 50);
    if (q_max < 1 || M <= 4.0) throw UsageError("bounds: need q_max >= 1 and M > 4");
    Outputs out(c.out_dir);

    const auto chain = mlve::stirling_chain_check(1, q_max);
    auto& sc = out.file("stirling_chain.csv");
    sc << "q,log_lhs,log_rhs,margin\n";
    for (const auto& r : chain.rows)
        sc << r.q << ',' << num(static_cast<double>(r.log_lhs)) << ',' << num(static_cast<double>(r.log_rhs)) << ','
           << num(static_cast<double>(r.margin())) << '\n';

    const auto thr = mlve::m_threshold_check(M, 1, q_max);
    auto& tc = out.file("m_threshold.csv");
    tc << "q,value,violates\n";
    for (const auto& r : thr.rows) tc << r.q << ',' << num(r.value) << ',' << (r.violates ? 1 : 0) << '\n';

    auto& lc = out.file("series.csv");
    lc << "lambda_abs,S,partial_sum,inner_tail,inner_tail_bound,tail_ok\n";
    bool tails_ok = true;
    for (int i = 0; i <= 10; ++i) {
        const double lam = 0.1 * i;
        const auto s = mlve::lemma36_series(lam, M, q_max, b_max);
        tails_ok = tails_ok && s.tail_ok;
        lc << num(lam) << ',' << num(s.S) << ',' << num(s.partial_sum) << ',' << num(s.inner_tail) << ','
           << num(s.inner_tail_bound) << ',' << (s.tail_ok ? 1 : 0) << '\n';
    }
    json warnings = json::array();
    for (int q : thr.violations) warnings.push_back({{"q", q}, {"value", thr.rows[static_cast<std::size_t>(q - 1)].value}});
    out.write_json("bounds.json", {{"command", "verify-bounds"},
                                   {"M", M},
                                   {"q_max", q_max},
                                   {"stirling_chain_holds", chain.holds},
                                   {"stirling_worst_margin", static_cast<double>(chain.worst_margin)},
                                   {"inner_tail_ok", tails_ok},
                                   {"m_threshold_violations", warnings}});
    out.flush();
    std::printf("[%s] stirling chain 1..%d\n", chain.holds ? "PASS" : "FAIL", q_max);
    std::printf("[%s] inner tail bound at M=%g\n", tails_ok ? "PASS" : "FAIL", M);
    for (const auto& w : warnings)
        std::printf("[WARN] m_threshold q=%d value=%.3g > 1\n", w["q"].get<int>(), w["value"].get<double>());
    return chain.holds && tails_ok ? 0 : 1;
}

int cmd_domain_map(const Common& c) {
    const json cfg = load_config(c);
    const json d = section(cfg, "domain_map");
    const double re_min = get_or(d, "re_min", -0.25), re_max = get_or(d, "re_max", 1.25);
    const double im_min = get_or(d, "im_min", -0.75), im_max = get_or(d, "im_max", 0.75);
    const int res = get_or(d, "resolution", 61);
    if (res < 2 || !(re_max > re_min) || !(im_max > im_min)) throw UsageError("domain_map: invalid grid");
    Outputs out(c.out_dir);
    auto& csv = out.file("domain_map.csv");
    csv << "re_g,im_g,inside\n";
    int inside = 0;
    for (int i = 0; i < res; ++i)
        for (int k = 0; k < res; ++k) {
            const double re = re_min + (re_max - re_min) * i / (res - 1);
            const double im = im_min + (im_max - im_min) * k / (res - 1);
            const bool in = mlve::borel_domain_g({re, im}).inside_disk;
            inside += in;
            csv << num(re) << ',' << num(im) << ',' << (in ? 1 : 0) << '\n';
        }
    out.flush();
    std::printf("%d of %d grid points inside\n", inside, res * res);
    return 0;
}

mlve::PolymerGas parse_gas(const json& g) {
    mlve::PolymerGas gas;
    gas.monomers = get_or(g, "monomers", 0);
    if (!g.contains("activities") || !g.at("activities").is_object())
        throw UsageError("gas spec needs an 'activities' object mapping \"i,j,...\" to an activity");
    for (const auto& [key, val] : g.at("activities").items()) {
        std::uint32_t mask = 0;
        std::stringstream ss(key);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            int m = -1;
            try {
                m = std::stoi(tok);
            } catch (const std::exception&) {
                throw UsageError("bad polymer key '" + key + "'");
            }
            if (m < 0 || m >= gas.monomers) throw UsageError("polymer '" + key + "' uses an unknown monomer");
            mask |= 1u << m;
        }
        gas.polymers.push_back({mask, parse_complex(val, "activity")});
    }
    try {
        gas.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return gas;
}

int cmd_mayer(const Common& c, const std::string& gas_path) {
    const json cfg = load_config(c);
    const json m = section(cfg, "mayer");
    json gas_spec;
    if (!gas_path.empty()) {
        if (!fs::exists(gas_path)) throw UsageError("gas file not found: " + gas_path);
        std::ifstream in(gas_path);
        try {
            gas_spec = json::parse(in);
        } catch (const json::parse_error& e) {
            throw UsageError(std::string("gas parse error: ") + e.what());
        }
    } else if (m.contains("gas")) {
        gas_spec = m.at("gas");
    } else {
        gas_spec = {{"monomers", 2}, {"activities", {{"0", 0.1}, {"1", 0.1}, {"0,1", 0.05}}}};
    }
    const auto gas = parse_gas(gas_spec);
    const int n_max = get_or(m, "n_max", 4);
    const mlve::cplx z = mlve::polymer_z_direct(gas);
    const auto res = mlve::mayer_logz(gas, n_max);
    Outputs out(c.out_dir);
    auto& csv = out.file("mayer.csv");
    csv << "n,order_re,order_im,partial_re,partial_im,exp_partial_abs_error\n";
    mlve::cplx partial = 0.0;
    for (std::size_t i = 0; i < res.orders.size(); ++i) {
        partial += res.orders[i];
        csv << i + 1 << ',' << num(res.orders[i].real()) << ',' << num(res.orders[i].imag()) << ',' << num(partial.real())
            << ',' << num(partial.imag()) << ',' << num(std::abs(std::exp(partial) - z)) << '\n';
    }
    json cond = json::array();
    for (int p0 = 0; p0 < gas.monomers; ++p0) cond.push_back(mlve::convergence_condition(gas, p0));
    out.write_json("mayer.json", {{"command", "mayer"},
                                  {"n_max", n_max},
                                  {"Z_direct", {z.real(), z.imag()}},
                                  {"logZ_direct", {std::log(z).real(), std::log(z).imag()}},
                                  {"mayer_logz", {res.total.real(), res.total.imag()}},
                                  {"exp_mayer_abs_error", std::abs(std::exp(res.total) - z)},
                                  {"convergence_condition", cond}});
    out.flush();
    std::printf("Z direct = %.15g  exp(mayer_logz) = %.15g  |diff| = %.3g\n", z.real(), std::exp(res.total).real(),
                std::abs(std::exp(res.total) - z));
    return 0;
}

int cmd_verify(const Common& c, const std::string& suite, const std::string& fault) {
    const json cfg = load_config(c);
    const json v = section(cfg, "verify");
    mlve::VerifyOptions opt;
    opt.seed = get_or(v, "seed", opt.seed);
    opt.random_samples = get_or(v, "samples", opt.random_samples);
    opt.domination_max_order = get_or(v, "domination_max_order", opt.domination_max_order);
    const std::string f = fault.empty() ? get_or(v, "inject_fault", std::string{}) : fault;
    if (!f.empty() && f != "grassmann-sign") throw UsageError("unknown fault '" + f + "'");
    opt.inject_grassmann_sign_error = f == "grassmann-sign";

    const auto& suites = mlve::verify_suites();
    if (!suite.empty() && std::none_of(suites.begin(), suites.end(), [&](const auto& s) { return suite == s.name; }))
        throw UsageError("unknown suite '" + suite + "'");
    Outputs out(c.out_dir);
    auto& csv = out.file("verify.csv");
    csv << "suite,status,checks\n";
    json results = json::array();
    int failures = 0, warnings = 0;
    for (const auto& s : suites) {
        if (!suite.empty() && suite != s.name) continue;
        const auto r = s.run(opt);
        std::printf("[%s] %s (%d checks)\n", mlve::to_string(r.status), r.name.c_str(), r.checks);
        for (const auto& msg : r.messages) std::printf("    %s\n", msg.c_str());
        std::fflush(stdout);
        failures += r.status == mlve::SuiteStatus::fail;
        warnings += r.status == mlve::SuiteStatus::warn;
        csv << r.name << ',' << mlve::to_string(r.status) << ',' << r.checks << '\n';
        results.push_back({{"suite", r.name}, {"status", mlve::to_string(r.status)}, {"checks", r.checks}, {"messages", r.messages}});
    }
    out.write_json("verify.json", {{"command", "verify"}, {"suites", results}, {"failures", failures}, {"warnings", warnings}});
    out.flush();
    std::printf("%d failed, %d warned\n", failures, warnings);
    return failures ? 1 : 0;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "JSON config file");
    sub->add_option("--out", c.out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", c.threads, "worker threads")->capture_default_str();
    sub->add_flag("--trace", c.trace, "write per-term JSON lines");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale loop vertex expansion toolkit"};
    app.require_subcommand(1);
    Common common;
    std::string suite, fault, gas_path;

    auto* compare = app.add_subcommand("compare", "expansion partial sums against the quadrature oracle");
    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    auto* enumerate = app.add_subcommand("enumerate", "count trees, forests and spanning jungles");
    auto* oracle = app.add_subcommand("oracle", "Z and log Z by quadrature");
    auto* bounds = app.add_subcommand("verify-bounds", "Stirling chain, large-M threshold and bound series");
    auto* domain = app.add_subcommand("domain-map", "Borel disk membership on a grid in g");
    auto* mayer = app.add_subcommand("mayer", "Mayer expansion of a polymer gas");
    for (auto* s : {compare, verify, enumerate, oracle, bounds, domain, mayer}) add_common(s, common);
    verify->add_option("--suite", suite, "run only this suite");
    verify->add_option("--inject-fault", fault, "fault injection (grassmann-sign)");
    mayer->add_option("--gas", gas_path, "gas spec JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*compare) return cmd_compare(common);
        if (*verify) return cmd_verify(common, suite, fault);
        if (*enumerate) return cmd_enumerate(common);
        if (*oracle) return cmd_oracle(common);
        if (*bounds) return cmd_verify_bounds(common);
        if (*domain) return cmd_domain_map(common);
        if (*mayer) return cmd_mayer(common, gas_path);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
