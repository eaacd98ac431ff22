#include "cli.hpp"

#include "lpg/error.hpp"
#include "lpg/harness.hpp"
#include "lpg/inference.hpp"
#include "lpg/io.hpp"
#include "lpg/rng.hpp"
#include "lpg/theory.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace lpg {

namespace {

constexpr std::size_t kLargeN = 2000;

struct Common {
    std::string config;
    std::string out = "-";
    std::vector<std::string> set;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    bool large = false;
    bool hollow = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "key = value configuration file");
    sub->add_option("--out", c.out, "output path, '-' for stdout");
    sub->add_option("--set", c.set, "configuration override key=value (repeatable)");
    sub->add_option("--seed", c.seed, "base seed");
    sub->add_option("--threads", c.threads, "worker threads");
    sub->add_flag("--large", c.large, "allow n above 2000");
    sub->add_flag("--hollow", c.hollow, "no self-loops");
}

ExperimentConfig load(const Common& c) {
    Settings s = c.config.empty() ? Settings{} : load_settings(c.config);
    for (const auto& kv : c.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        std::istringstream is(kv);
        const Settings one = parse_settings(is);
        for (const auto& [k, v] : one) s[k] = v;
    }
    if (c.seed) s["seed"] = std::to_string(*c.seed);
    if (c.threads) s["threads"] = std::to_string(*c.threads);
    if (c.hollow) s["hollow"] = "1";
    ExperimentConfig cfg = make_config(s);
    std::size_t biggest = cfg.n;
    for (std::size_t n : cfg.n_grid) biggest = std::max(biggest, n);
    if (biggest > kLargeN && !c.large) throw ConfigError("n above 2000 requires --large");
    return cfg;
}

class Output {
public:
    explicit Output(const std::string& path, bool binary = false) {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path, binary ? std::ios::binary : std::ios::out);
            if (!*file_) throw ConfigError("cannot open output " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

Adjacency read_graph(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw ConfigError("cannot open edge list " + path);
    char magic[5] = {};
    probe.read(magic, 5);
    if (probe.gcount() == 5 && std::string(magic, 5) == "LPGA1") {
        probe.seekg(0);
        return io::read_adjacency_binary(probe);
    }
    return io::read_edge_list(path);
}

struct Simulated {
    EdgeProbabilityMatrix p;
    Adjacency a;
    LatentSample latents;
};

Simulated simulate(const ExperimentConfig& cfg, double eps, std::size_t replicate) {
    LatentSample lat = experiment_latents(cfg, eps);
    EdgeProbabilityMatrix p = build_p(lat, cfg.kernel, cfg.rho);
    Adjacency a = sample_adjacency(p, replicate_seed(cfg.seed, replicate), cfg.hollow);
    return {std::move(p), std::move(a), std::move(lat)};
}

SpectralDecomposition top_pairs(const Adjacency& a, std::size_t k, std::uint64_t seed) {
    MatVec op = [&a](std::span<const double> x, std::span<double> y) { a.apply(x, y); };
    LanczosOptions lo;
    lo.seed = seed;
    return eig_topk(op, a.size(), std::min(k, a.size()), lo);
}

std::optional<std::size_t> parse_rank(const std::string& s) {
    if (s == "auto") return std::nullopt;
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || std::stoull(s) == 0)
        throw ConfigError("--rank expects auto or a positive integer");
    return static_cast<std::size_t>(std::stoull(s));
}

std::size_t resolve_rank(const std::optional<std::size_t>& fixed, const Adjacency& a, std::uint64_t seed,
                         SpectralDecomposition& d) {
    if (fixed) {
        d = top_pairs(a, *fixed, seed);
        return *fixed;
    }
    d = top_pairs(a, default_jmax(a.size()) + 1, seed);
    const std::vector<double> lam(d.values.data(), d.values.data() + d.values.size());
    return select_rank_test(lam, a.average_degree(), a.size()).value();
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Spectral inference for latent position random graphs"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common c;
    std::string edges, rank = "auto", rule = "test", format = "csv", method = "auto", backend = "mc";
    std::string records_out, weights_out, vectors_out, latents_out;
    std::size_t k = 10, i = 0, jmax = 0, replicate = 0, max_restarts = LanczosOptions{}.max_restarts;
    std::optional<std::size_t> j;
    std::optional<double> level, eps;
    double alpha_embed = 0.5, nu = 1.0, rho = 1.0, scale = 1.0;
    std::optional<std::size_t> draws;
    bool exclude_self = false, clip = false, binary = false, sweep = false;

    auto* simulate_cmd = app.add_subcommand("simulate", "sample one adjacency matrix and write its edge list");
    auto* spectrum_cmd = app.add_subcommand("spectrum", "top-k eigenpairs of A by modulus");
    auto* rank_cmd = app.add_subcommand("select-rank", "eigengap rank selection report");
    auto* estimate_cmd = app.add_subcommand("estimate-p", "rank-r estimate of P, or the estimation sweep");
    auto* test_cmd = app.add_subcommand("test-pair", "two-sample test of X_i = X_j");
    auto* power_cmd = app.add_subcommand("power-table", "rejection rates over an epsilon grid");
    auto* null_cmd = app.add_subcommand("null-histogram", "null replicates of T and the reference mixture");
    auto* decay_cmd = app.add_subcommand("eigendecay", "top eigenvalues of P and the log-log slope");
    auto* expansion_cmd = app.add_subcommand("verify-expansion", "first-order eigenvector expansion residuals");
    auto* certify_cmd = app.add_subcommand("certify-bound", "deterministic row-wise perturbation certificate");

    for (auto* s : {simulate_cmd, spectrum_cmd, rank_cmd, estimate_cmd, test_cmd, power_cmd, null_cmd, decay_cmd,
                    expansion_cmd, certify_cmd})
        add_common(s, c);
    for (auto* s : {spectrum_cmd, rank_cmd, estimate_cmd, test_cmd})
        s->add_option("--edges", edges, "edge list (text or LPGA1); otherwise simulate from --config");
    for (auto* s : {simulate_cmd, spectrum_cmd, rank_cmd, estimate_cmd, test_cmd, expansion_cmd, certify_cmd}) {
        s->add_option("--replicate", replicate, "replicate index when simulating");
        s->add_option("--epsilon", eps, "distance between X_0 and X_{n-1} when simulating");
    }
    simulate_cmd->add_flag("--binary", binary, "write LPGA1 instead of an edge list");
    simulate_cmd->add_option("--latents-out", latents_out, "also write the latent positions as CSV");
    spectrum_cmd->add_option("--k", k, "number of eigenpairs");
    spectrum_cmd->add_option("--method", method, "auto, dense or lanczos")->check(CLI::IsMember({"auto", "dense", "lanczos"}));
    spectrum_cmd->add_option("--max-restarts", max_restarts, "Lanczos restart budget");
    spectrum_cmd->add_option("--vectors-out", vectors_out, "write eigenvectors as LPGV1");
    rank_cmd->add_option("--rule", rule, "test or datadriven")->check(CLI::IsMember({"test", "datadriven"}));
    rank_cmd->add_option("--jmax", jmax, "largest j scanned (0: min(n-1, 64))");
    for (auto* s : {rank_cmd, expansion_cmd, certify_cmd}) s->add_option("--nu", nu, "probability exponent");
    rank_cmd->add_option("--rho", rho, "sparsity factor for the data-driven rule");
    for (auto* s : {estimate_cmd, test_cmd, expansion_cmd, certify_cmd})
        s->add_option("--rank", rank, "auto or a fixed rank");
    estimate_cmd->add_option("--format", format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));
    estimate_cmd->add_flag("--clip", clip, "clip entries to [0, 1]");
    estimate_cmd->add_flag("--sweep", sweep, "run the estimation sweep over n_grid");
    test_cmd->add_option("--i", i, "first vertex");
    test_cmd->add_option("--j", j, "second vertex (default n-1)");
    test_cmd->add_option("--alpha", level, "test level");
    for (auto* s : {test_cmd, power_cmd, null_cmd}) {
        s->add_option("--draws", draws, "Monte Carlo null draws");
        s->add_flag("--exclude-self", exclude_self, "drop k in {i, j} from D-hat and T");
        s->add_option("--backend", backend, "mc or exact")->check(CLI::IsMember({"mc", "exact"}));
    }
    power_cmd->add_option("--records", records_out, "per-replicate CSV");
    null_cmd->add_option("--weights-out", weights_out, "last replicate's mixture weights");
    expansion_cmd->add_option("--alpha", alpha_embed, "embedding power 0, 0.5 or 1");
    certify_cmd->add_option("--scale", scale, "certificate instance M = scale * P");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (exclude_self) c.set.push_back("exclude_self=1");
        if (draws) c.set.push_back("draws=" + std::to_string(*draws));
        if (backend != "mc") c.set.push_back("backend=" + backend);
        const ExperimentConfig cfg = load(c);
        const double epsilon = eps.value_or(cfg.epsilon.front());
        auto graph = [&]() -> Adjacency {
            if (!edges.empty()) return read_graph(edges);
            if (c.config.empty() && c.set.empty()) throw ConfigError("give --edges or --config");
            return simulate(cfg, epsilon, replicate).a;
        };

        if (simulate_cmd->parsed()) {
            const Simulated s = simulate(cfg, epsilon, replicate);
            Output out(c.out, binary);
            if (binary) io::write_adjacency_binary(out.stream(), s.a);
            else io::write_edge_list(out.stream(), s.a);
            if (!latents_out.empty()) {
                Output lat(latents_out);
                io::write_matrix_csv(lat.stream(), s.latents.coords);
            }
        } else if (spectrum_cmd->parsed()) {
            const Adjacency a = graph();
            const std::size_t kk = std::min(k, a.size());
            SpectralDecomposition d;
            if (method == "dense" || (method == "auto" && a.size() <= kDenseLimit && 4 * kk > a.size())) {
                d = eig_dense(a.dense(), kk);
            } else if (method == "lanczos") {
                MatVec op = [&a](std::span<const double> x, std::span<double> y) { a.apply(x, y); };
                LanczosOptions lo;
                lo.seed = cfg.seed;
                lo.max_restarts = max_restarts;
                d = eig_topk_lanczos(op, a.size(), kk, lo);
            } else {
                d = top_pairs(a, kk, cfg.seed);
            }
            Output out(c.out);
            io::write_decomposition_csv(out.stream(), d);
            if (!vectors_out.empty()) {
                Output v(vectors_out, true);
                io::write_vectors_binary(v.stream(), d.vectors);
            }
        } else if (rank_cmd->parsed()) {
            const Adjacency a = graph();
            const std::size_t scan = jmax ? std::min(jmax, a.size() - 1) : default_jmax(a.size());
            const SpectralDecomposition d = top_pairs(a, scan + 1, cfg.seed);
            const std::vector<double> lam(d.values.data(), d.values.data() + d.values.size());
            const RankReport r = rule == "test" ? select_rank_test(lam, a.average_degree(), a.size(), scan)
                                                : select_rank_datadriven(lam, nu, a.size(), rho, scan);
            Output out(c.out);
            io::write_rank_report_csv(out.stream(), r);
            std::cerr << "rhat " << r.value() << (r.fallback() ? " (fallback)" : "") << '\n';
        } else if (estimate_cmd->parsed()) {
            if (sweep) {
                ExperimentConfig sc = cfg;
                sc.fixed_rank = parse_rank(rank);
                if (!sc.fixed_rank) sc.fixed_rank = cfg.fixed_rank;
                const auto rows = run_estimation_sweep(sc, cfg.n_grid);
                Output out(c.out);
                write_estimation_csv(out.stream(), rows);
            } else {
                const Adjacency a = graph();
                SpectralDecomposition d;
                const std::size_t r = resolve_rank(parse_rank(rank), a, cfg.seed, d);
                const Eigen::MatrixXd p_hat = estimate_p(d, r, clip);
                Output out(c.out, format == "binary");
                if (format == "binary") io::write_packed_symmetric(out.stream(), p_hat);
                else io::write_matrix_csv(out.stream(), p_hat);
                std::cerr << "rank " << r << '\n';
            }
        } else if (test_cmd->parsed()) {
            const Adjacency a = graph();
            PairTestOptions o = pair_test_options(cfg, replicate_seed(cfg.seed, replicate));
            if (level) o.level = *level;
            if (!(o.level > 0 && o.level <= 1)) throw ConfigError("--alpha must lie in (0, 1]");
            if (rank != "auto") o.fixed_rank = parse_rank(rank);
            const std::size_t jj = j.value_or(a.size() - 1);
            if (i >= a.size() || jj >= a.size() || i == jj) throw ConfigError("--i and --j must be distinct vertices");
            const TestReport rep = run_pair_test(a, i, jj, o);
            Output out(c.out);
            out.stream() << "i,j,rhat,T,theta,sigma,cstar,pvalue,reject,degenerate\n"
                         << rep.i << ',' << rep.j << ',' << rep.rhat << ',' << io::fmt(rep.t) << ','
                         << io::fmt(rep.theta) << ',' << io::fmt(rep.sigma) << ',' << io::fmt(rep.c_star) << ','
                         << io::fmt(rep.p_value) << ',' << (rep.reject ? 1 : 0) << ',' << (rep.degenerate ? 1 : 0)
                         << '\n';
            if (rep.rank_fallback) std::cerr << "warning: no eigengap met the threshold; rhat = 1\n";
        } else if (power_cmd->parsed()) {
            const PowerTable t = run_power_table(cfg);
            Output out(c.out);
            write_power_csv(out.stream(), t);
            if (!records_out.empty()) {
                Output rec(records_out);
                write_records_csv(rec.stream(), t.records);
            }
        } else if (null_cmd->parsed()) {
            ExperimentConfig nc = cfg;
            nc.epsilon = {0.0};
            const NullHistogram h = run_null_histogram(nc);
            Output out(c.out);
            write_null_csv(out.stream(), h);
            if (!weights_out.empty()) {
                Output w(weights_out);
                write_weights_csv(w.stream(), h);
            }
            std::cerr << "rhat " << format_rank_frequencies(h.rhat) << " ks_reference " << io::fmt(h.ks_reference)
                      << " ks_pit " << io::fmt(h.ks_pit) << " degenerate " << h.degenerate << " failed " << h.failed
                      << '\n';
        } else if (decay_cmd->parsed()) {
            const EigendecayResult r = run_eigendecay(cfg);
            Output out(c.out);
            write_eigendecay_csv(out.stream(), r);
            std::cerr << "slope " << io::fmt(r.mean_slope) << " gap maxima";
            for (std::size_t m : r.gap_maxima) std::cerr << ' ' << m;
            std::cerr << '\n';
        } else if (expansion_cmd->parsed()) {
            const Simulated s = simulate(cfg, epsilon, replicate);
            SpectralDecomposition da;
            const std::size_t r = resolve_rank(parse_rank(rank), s.a, cfg.seed, da);
            MatVec pop = [&s](std::span<const double> x, std::span<double> y) { s.p.apply(x, y); };
            LanczosOptions lo;
            lo.seed = cfg.seed;
            const SpectralDecomposition dp = eig_topk(pop, cfg.n, std::min(r + 1, cfg.n), lo);
            ExpansionOptions eo;
            eo.nu = nu;
            eo.rho = cfg.rho;
            const ExpansionReport rep = verify_expansion(da, dp, s.p, s.a, r, alpha_embed, eo);
            Output out(c.out);
            out.stream() << "n,r,alpha,lhs,main,residual,identity_error,main_bound,main_bound_holds,residual_bound,"
                            "delta_r,lambda_r\n"
                         << cfg.n << ',' << r << ',' << io::fmt(rep.alpha) << ',' << io::fmt(rep.lhs_2toinf) << ','
                         << io::fmt(rep.main_term_2toinf) << ',' << io::fmt(rep.residual_2toinf) << ','
                         << io::fmt(rep.identity_error) << ',' << io::fmt(rep.main_bound) << ','
                         << (rep.main_bound_holds ? 1 : 0) << ','
                         << (rep.residual_bound ? io::fmt(*rep.residual_bound) : std::string("nan")) << ','
                         << io::fmt(rep.delta_r) << ',' << io::fmt(rep.lambda_r) << '\n';
        } else if (certify_cmd->parsed()) {
            if (cfg.n > 300) throw ConfigError("certify-bound needs n <= 300");
            const Simulated s = simulate(cfg, epsilon, replicate);
            const Eigen::MatrixXd p = s.p.dense();
            const Eigen::MatrixXd e = s.a.dense() - p;
            std::size_t r = 1;
            if (auto fixed = parse_rank(rank)) r = *fixed;
            else {
                SpectralDecomposition d;
                r = resolve_rank(std::nullopt, s.a, cfg.seed, d);
            }
            CertificateOptions co;
            co.nu = nu;
            co.rho = cfg.rho;
            const BoundCertificate bc = bound_certificate(scale * p, e, r, co);
            Output out(c.out);
            out.stream() << "n,r,scale,lhs,total,r0,r1,r2,y0,y1,psi_star,norm_e,delta_r,lambda_r,e0,e1,e2,certified\n"
                         << cfg.n << ',' << r << ',' << io::fmt(scale) << ',' << io::fmt(bc.lhs) << ','
                         << io::fmt(bc.total()) << ',' << io::fmt(bc.r0) << ',' << io::fmt(bc.r1) << ','
                         << io::fmt(bc.r2) << ',' << io::fmt(bc.y0) << ',' << io::fmt(bc.y1) << ','
                         << io::fmt(bc.psi_star) << ',' << io::fmt(bc.norm_e) << ',' << io::fmt(bc.delta_r) << ','
                         << io::fmt(bc.lambda_r) << ',' << bc.e0 << ',' << bc.e1 << ',' << bc.e2 << ','
                         << bc.certified() << '\n';
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace lpg
