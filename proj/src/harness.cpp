#include "lpg/harness.hpp"

#include "lpg/error.hpp"
#include "lpg/inference.hpp"
#include "lpg/io.hpp"
#include "lpg/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

namespace lpg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || !std::isfinite(x)) throw ConfigError("config " + key + ": not a number: '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("config " + key + ": not a nonnegative integer: '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError("config " + key + ": integer out of range");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    const std::string l = lower(v);
    if (l == "1" || l == "true" || l == "yes" || l == "on") return true;
    if (l == "0" || l == "false" || l == "no" || l == "off") return false;
    throw ConfigError("config " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::string s = v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

Eigen::MatrixXd parse_matrix(const std::string& key, const std::string& v) {
    std::vector<std::vector<double>> rows;
    std::istringstream is(v);
    for (std::string row; std::getline(is, row, ';');) {
        std::vector<double> r;
        for (const auto& tok : split_list(row)) r.push_back(to_double(key, tok));
        if (!r.empty()) rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ConfigError("config " + key + ": empty matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw ConfigError("config " + key + ": ragged matrix");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

const std::vector<std::string> kKnownKeys = {
    "kernel", "kernel.scale", "kernel.matrix", "latent", "latent.dim", "latent.file", "n", "rho",
    "replicates", "epsilon", "alpha", "seed", "threads", "rank_mode", "draws", "hollow", "exclude_self",
    "degree_with_loops", "backend", "top", "fit.lo", "fit.hi", "n_grid", "nu"};

}  // namespace

Settings parse_settings(std::istream& is, const std::string& base_dir) {
    Settings s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = lower(trim(line.substr(0, eq)));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (key == "latent.file" && !base_dir.empty() && std::filesystem::path(value).is_relative())
            value = (std::filesystem::path(base_dir) / value).string();
        s[key] = value;
    }
    return s;
}

Settings load_settings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    return parse_settings(in, std::filesystem::path(path).parent_path().string());
}

ExperimentConfig make_config(const Settings& s) {
    for (const auto& [k, v] : s)
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), k) == kKnownKeys.end())
            throw ConfigError("config: unknown key '" + k + "'");
    auto get = [&](const std::string& k) -> std::optional<std::string> {
        const auto it = s.find(k);
        if (it == s.end()) return std::nullopt;
        return it->second;
    };

    ExperimentConfig c;
    const std::string kernel = lower(get("kernel").value_or("laplace"));
    const auto scale = get("kernel.scale");
    if (kernel == "laplace" || kernel == "exponential") {
        c.kernel = LaplaceKernel{scale ? to_double("kernel.scale", *scale) : 1.0};
    } else if (kernel == "gaussian") {
        c.kernel = GaussianKernel{scale ? to_double("kernel.scale", *scale) : 1.0};
    } else if (kernel == "constant") {
        c.kernel = ConstantKernel{scale ? to_double("kernel.scale", *scale) : 1.0};
    } else if (kernel == "dot" || kernel == "dotproduct" || kernel == "dot_product") {
        const auto m = get("kernel.matrix");
        if (!m) throw ConfigError("config: kernel = dot needs kernel.matrix");
        c.kernel = DotProductKernel{parse_matrix("kernel.matrix", *m)};
    } else {
        throw ConfigError("config kernel: unknown kernel '" + kernel + "'");
    }
    if (const auto* l = std::get_if<LaplaceKernel>(&c.kernel); l && !(l->scale > 0))
        throw ConfigError("config kernel.scale must be positive");
    if (const auto* g = std::get_if<GaussianKernel>(&c.kernel); g && !(g->bandwidth2 > 0))
        throw ConfigError("config kernel.scale must be positive");

    const std::string latent = lower(get("latent").value_or("sphere"));
    const auto dim = get("latent.dim");
    const int d = dim ? static_cast<int>(to_u64("latent.dim", *dim)) : -1;
    if (latent == "sphere") {
        c.latent = UniformSphere{d > 0 ? d : 3};
    } else if (latent == "normal" || latent == "gaussian") {
        c.latent = StandardNormal{d > 0 ? d : 2};
    } else if (latent == "file" || latent == "pointcloud") {
        const auto f = get("latent.file");
        if (!f) throw ConfigError("config: latent = file needs latent.file");
        c.latent = PointCloud{io::read_point_cloud(*f)};
    } else {
        throw ConfigError("config latent: unknown distribution '" + latent + "'");
    }
    if (dim && d < 1) throw ConfigError("config latent.dim must be at least 1");

    if (auto v = get("n")) c.n = to_u64("n", *v);
    if (auto v = get("rho")) c.rho = to_double("rho", *v);
    if (auto v = get("replicates")) c.replicates = to_u64("replicates", *v);
    if (auto v = get("epsilon")) {
        c.epsilon.clear();
        for (const auto& tok : split_list(*v)) c.epsilon.push_back(to_double("epsilon", tok));
    }
    if (auto v = get("alpha")) c.alpha = to_double("alpha", *v);
    if (auto v = get("seed")) c.seed = to_u64("seed", *v);
    if (auto v = get("threads")) c.threads = to_u64("threads", *v);
    if (auto v = get("rank_mode")) {
        std::string m = lower(*v);
        if (m != "auto") {
            if (m.rfind("fixed(", 0) == 0 && m.back() == ')') m = m.substr(6, m.size() - 7);
            c.fixed_rank = to_u64("rank_mode", m);
            if (*c.fixed_rank == 0) throw ConfigError("config rank_mode: fixed rank must be positive");
        }
    }
    if (auto v = get("draws")) c.draws = to_u64("draws", *v);
    if (auto v = get("hollow")) c.hollow = to_bool("hollow", *v);
    if (auto v = get("exclude_self")) c.exclude_self = to_bool("exclude_self", *v);
    if (auto v = get("degree_with_loops")) c.degree_with_loops = to_bool("degree_with_loops", *v);
    if (auto v = get("backend")) {
        const std::string b = lower(*v);
        if (b == "mc" || b == "monte_carlo") c.backend = NullBackend::monte_carlo;
        else if (b == "exact" || b == "imhof") c.backend = NullBackend::exact;
        else throw ConfigError("config backend: expected mc or exact");
    }
    if (auto v = get("top")) c.top = to_u64("top", *v);
    if (auto v = get("fit.lo")) c.fit_lo = to_u64("fit.lo", *v);
    if (auto v = get("fit.hi")) c.fit_hi = to_u64("fit.hi", *v);
    if (auto v = get("n_grid")) {
        c.n_grid.clear();
        for (const auto& tok : split_list(*v)) c.n_grid.push_back(to_u64("n_grid", tok));
    }
    if (auto v = get("nu")) c.nu = to_double("nu", *v);

    if (c.n < 2) throw ConfigError("config n must be at least 2");
    if (!(c.rho > 0 && c.rho <= 1)) throw ConfigError("config rho must lie in (0, 1]");
    if (c.replicates < 1) throw ConfigError("config replicates must be at least 1");
    if (!(c.alpha > 0 && c.alpha < 1)) throw ConfigError("config alpha must lie in (0, 1)");
    if (c.threads < 1) c.threads = 1;
    if (c.draws < 10000) throw ConfigError("config draws must be at least 10000");
    if (c.epsilon.empty()) throw ConfigError("config epsilon list is empty");
    for (double e : c.epsilon) {
        if (e < 0) throw ConfigError("config epsilon values must be nonnegative");
        if (std::holds_alternative<UniformSphere>(c.latent) && e > 2) throw ConfigError("config epsilon exceeds the sphere diameter");
    }
    if (c.fit_lo < 1 || c.fit_hi <= c.fit_lo || c.fit_hi > c.top) throw ConfigError("config fit window must satisfy 1 <= fit.lo < fit.hi <= top");
    if (!std::is_sorted(c.n_grid.begin(), c.n_grid.end()) ||
        std::adjacent_find(c.n_grid.begin(), c.n_grid.end()) != c.n_grid.end())
        throw ConfigError("config n_grid must be strictly increasing");
    if (!(c.nu > 0)) throw ConfigError("config nu must be positive");
    return c;
}

// ---------------------------------------------------------------------------

LatentSample experiment_latents(const ExperimentConfig& cfg, double epsilon) {
    const LatentSample base = sample_latents(cfg.latent, cfg.n, cfg.seed);
    return place_pair_at_distance(base, 0, cfg.n - 1, epsilon, cfg.seed);
}

PairTestOptions pair_test_options(const ExperimentConfig& cfg, std::uint64_t seed) {
    PairTestOptions o;
    o.level = cfg.alpha;
    o.fixed_rank = cfg.fixed_rank;
    o.draws = cfg.draws;
    o.seed = seed;
    o.exclude_self = cfg.exclude_self;
    o.degree_with_loops = cfg.degree_with_loops;
    o.backend = cfg.backend;
    return o;
}

ReplicateRecord run_replicate(const ExperimentConfig& cfg, const EdgeProbabilityMatrix& p, double epsilon,
                              std::size_t index) {
    const auto start = std::chrono::steady_clock::now();
    ReplicateRecord rec;
    rec.replicate_index = index;
    rec.seed = replicate_seed(cfg.seed, index);
    rec.epsilon = epsilon;
    try {
        const Adjacency a = sample_adjacency(p, rec.seed, cfg.hollow);
        const TestReport rep = run_pair_test(a, 0, cfg.n - 1, pair_test_options(cfg, rec.seed));
        rec.rhat = rep.rhat;
        rec.rank_fallback = rep.rank_fallback;
        rec.t = rep.t;
        rec.c_star = rep.c_star;
        rec.p_value = rep.p_value;
        rec.reject = rep.reject;
        rec.degenerate = rep.degenerate;
        rec.weights = rep.weights;
        rec.sigma = rep.sigma;
    } catch (const std::exception& e) {
        rec.error = e.what();
        std::cerr << "replicate " << index << " (epsilon " << io::fmt(epsilon) << ") failed: " << e.what() << '\n';
    }
    rec.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::string format_rank_frequencies(const RankHistogram& h) {
    std::size_t total = 0;
    for (const auto& [r, c] : h) total += c;
    std::string out = "[";
    bool first = true;
    for (const auto& [r, c] : h) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%zu (%.2f)", first ? "" : ", ", r, static_cast<double>(c) / static_cast<double>(total));
        out += buf;
        first = false;
    }
    return out + "]";
}

PowerTable run_power_table(const ExperimentConfig& cfg) {
    PowerTable table;
    for (double eps : cfg.epsilon) {
        const EdgeProbabilityMatrix p = build_p(experiment_latents(cfg, eps), cfg.kernel, cfg.rho);
        auto recs = parallel_map(cfg.replicates, cfg.threads,
                                 [&](std::size_t k) { return run_replicate(cfg, p, eps, k); });
        PowerRow row;
        row.n = cfg.n;
        row.rho = cfg.rho;
        row.epsilon = eps;
        for (const auto& r : recs) {
            if (!r.error.empty()) {
                ++row.failed;
                continue;
            }
            ++row.replicates;
            row.rejections += r.reject;
            row.degenerate += r.degenerate;
            row.fallback += r.rank_fallback;
            ++row.rhat[r.rhat];
        }
        if (row.replicates) {
            row.rate = static_cast<double>(row.rejections) / static_cast<double>(row.replicates);
            row.se = std::sqrt(row.rate * (1 - row.rate) / static_cast<double>(row.replicates));
        }
        table.rows.push_back(row);
        for (auto& r : recs) table.records.push_back(std::move(r));
    }
    return table;
}

NullHistogram run_null_histogram(const ExperimentConfig& cfg) {
    NullHistogram h;
    const EdgeProbabilityMatrix p = build_p(experiment_latents(cfg, 0.0), cfg.kernel, cfg.rho);
    h.records = parallel_map(cfg.replicates, cfg.threads, [&](std::size_t k) { return run_replicate(cfg, p, 0.0, k); });
    std::vector<double> pit;
    for (const auto& r : h.records) {
        if (!r.error.empty()) {
            ++h.failed;
            continue;
        }
        ++h.rhat[r.rhat];
        if (r.degenerate) {
            ++h.degenerate;
            continue;
        }
        h.t_values.push_back(r.t);
        pit.push_back(r.p_value);
        h.last_weights = r.weights;
        h.last_sigma = r.sigma;
    }
    if (!h.t_values.empty()) {
        const NullCalibration ref(h.last_weights, h.last_sigma, cfg.draws, replicate_seed(cfg.seed, cfg.replicates));
        h.ks_reference = ks_two_sample(h.t_values, ref.draws());
        h.ks_pit = ks_uniform(pit);
    }
    return h;
}

double loglog_slope(const std::vector<double>& y, std::size_t lo, std::size_t hi) {
    if (lo < 1 || hi > y.size() || hi <= lo) throw std::invalid_argument("loglog_slope: bad window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(hi - lo + 1);
    for (std::size_t r = lo; r <= hi; ++r) {
        if (!(y[r - 1] > 0)) return std::numeric_limits<double>::quiet_NaN();
        const double x = std::log(static_cast<double>(r)), v = std::log(y[r - 1]);
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::vector<std::size_t> local_maxima(const std::vector<double>& g) {
    std::vector<std::size_t> out;
    double top = 0;
    for (double x : g) top = std::max(top, std::abs(x));
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] <= 1e-9 * top) continue;
        const bool left = k == 0 || g[k] > g[k - 1];
        const bool right = k + 1 == g.size() || g[k] > g[k + 1];
        if (left && right && k + 1 < g.size()) out.push_back(k + 1);
    }
    return out;
}

EigendecayResult run_eigendecay(const ExperimentConfig& cfg) {
    struct One {
        std::vector<double> values, gaps;
        double slope = 0;
        std::string error;
    };
    const std::size_t k = std::min(cfg.top + 1, cfg.n);
    auto runs = parallel_map(cfg.replicates, cfg.threads, [&](std::size_t r) {
        One o;
        try {
            const std::uint64_t seed = replicate_seed(cfg.seed, r);
            const EdgeProbabilityMatrix p = build_p(sample_latents(cfg.latent, cfg.n, seed), cfg.kernel, cfg.rho);
            MatVec op = [&p](std::span<const double> x, std::span<double> y) { p.apply(x, y); };
            LanczosOptions lo;
            lo.seed = seed;
            lo.tol = 1e-9;
            const SpectralDecomposition d = eig_topk(op, cfg.n, k, lo);
            const double n = static_cast<double>(cfg.n);
            for (std::size_t j = 0; j < cfg.top && j < d.size(); ++j) {
                o.values.push_back(d.values[static_cast<Eigen::Index>(j)] / n);
                const double next = j + 1 < d.size() ? std::abs(d.values[static_cast<Eigen::Index>(j + 1)]) : 0.0;
                o.gaps.push_back((std::abs(d.values[static_cast<Eigen::Index>(j)]) - next) / n);
            }
            // Values at rounding level carry no decay information.
            std::vector<double> guarded = o.values;
            for (double& v : guarded)
                if (v <= 1e-12 * std::abs(o.values.front())) v = 0;
            o.slope = guarded.size() >= cfg.fit_hi ? loglog_slope(guarded, cfg.fit_lo, cfg.fit_hi)
                                                   : std::numeric_limits<double>::quiet_NaN();
        } catch (const std::exception& e) {
            o.error = e.what();
            std::cerr << "eigendecay replicate " << r << " failed: " << e.what() << '\n';
        }
        return o;
    });

    EigendecayResult res;
    std::size_t ok = 0, slope_count = 0;
    double slope_sum = 0;
    for (auto& o : runs) {
        res.errors.push_back(o.error);
        res.lambda_over_n.push_back(o.values);
        res.gap_over_n.push_back(o.gaps);
        res.slopes.push_back(o.error.empty() ? o.slope : std::numeric_limits<double>::quiet_NaN());
        if (!o.error.empty()) continue;
        if (res.mean_gap.empty()) res.mean_gap.assign(o.gaps.size(), 0.0);
        for (std::size_t j = 0; j < o.gaps.size() && j < res.mean_gap.size(); ++j) res.mean_gap[j] += o.gaps[j];
        ++ok;
        if (std::isfinite(o.slope)) {
            slope_sum += o.slope;
            ++slope_count;
        }
    }
    for (double& g : res.mean_gap) g /= static_cast<double>(std::max<std::size_t>(ok, 1));
    res.mean_slope = slope_count ? slope_sum / static_cast<double>(slope_count) : std::numeric_limits<double>::quiet_NaN();
    res.gap_maxima = local_maxima(res.mean_gap);
    return res;
}

std::vector<EstimationRow> run_estimation_sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& n_grid) {
    std::vector<EstimationRow> rows;
    for (std::size_t n : n_grid) {
        struct One {
            double rank = 0, max_norm = 0, fro = 0, best = 0;
            bool ok = false;
        };
        auto runs = parallel_map(cfg.replicates, cfg.threads, [&](std::size_t r) {
            One o;
            try {
                const std::uint64_t seed = replicate_seed(cfg.seed, r);
                const EdgeProbabilityMatrix p = build_p(sample_latents(cfg.latent, n, seed), cfg.kernel, cfg.rho);
                const Adjacency a = sample_adjacency(p, seed, cfg.hollow);
                MatVec aop = [&a](std::span<const double> x, std::span<double> y) { a.apply(x, y); };
                LanczosOptions lo;
                lo.seed = seed;
                std::size_t rank;
                SpectralDecomposition da;
                if (cfg.fixed_rank) {
                    rank = std::min(*cfg.fixed_rank, n);
                    da = eig_topk(aop, n, rank, lo);
                } else {
                    da = eig_topk(aop, n, default_jmax(n) + 1, lo);
                    const std::vector<double> lam(da.values.data(), da.values.data() + da.values.size());
                    rank = select_rank_test(lam, a.average_degree(), n).value();
                }
                const Eigen::MatrixXd pd = p.dense();
                const EntrywiseError err = entrywise_error(estimate_p(da, rank), pd, cfg.rho);
                MatVec pop = [&p](std::span<const double> x, std::span<double> y) { p.apply(x, y); };
                const SpectralDecomposition dp = eig_topk(pop, n, rank, lo);
                o.rank = static_cast<double>(rank);
                o.max_norm = err.max_norm_scaled;
                o.fro = err.frobenius_scaled;
                o.best = best_rank_error(dp, pd, rank, cfg.rho);
                o.ok = true;
            } catch (const std::exception& e) {
                std::cerr << "estimation n=" << n << " replicate " << r << " failed: " << e.what() << '\n';
            }
            return o;
        });
        EstimationRow row;
        row.n = n;
        for (const auto& o : runs) {
            if (!o.ok) {
                ++row.failed;
                continue;
            }
            ++row.replicates;
            row.mean_rank += o.rank;
            row.max_norm_scaled += o.max_norm;
            row.frobenius_scaled += o.fro;
            row.best_rank_error += o.best;
        }
        if (row.replicates) {
            const double m = static_cast<double>(row.replicates);
            row.mean_rank /= m;
            row.max_norm_scaled /= m;
            row.frobenius_scaled /= m;
            row.best_rank_error /= m;
        }
        rows.push_back(row);
    }
    return rows;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_uniform(std::vector<double> u) {
    if (u.empty()) throw std::invalid_argument("ks_uniform: empty sample");
    std::sort(u.begin(), u.end());
    const double m = static_cast<double>(u.size());
    double d = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double x = std::clamp(u[k], 0.0, 1.0);
        d = std::max({d, static_cast<double>(k + 1) / m - x, x - static_cast<double>(k) / m});
    }
    return d;
}

// ---------------------------------------------------------------------------

void write_power_csv(std::ostream& os, const PowerTable& t) {
    os << "n,rho,epsilon,replicates,rejection_rate,se,rhat_freq,degenerate,fallback,failed\n";
    for (const auto& r : t.rows)
        os << r.n << ',' << io::fmt(r.rho) << ',' << io::fmt(r.epsilon) << ',' << r.replicates << ','
           << io::fmt(r.rate) << ',' << io::fmt(r.se) << ",\"" << format_rank_frequencies(r.rhat) << "\","
           << r.degenerate << ',' << r.fallback << ',' << r.failed << '\n';
}

void write_records_csv(std::ostream& os, const std::vector<ReplicateRecord>& records) {
    os << "replicate,seed,epsilon,rhat,fallback,T,cstar,pvalue,reject,degenerate,error\n";
    for (const auto& r : records)
        os << r.replicate_index << ',' << r.seed << ',' << io::fmt(r.epsilon) << ',' << r.rhat << ','
           << (r.rank_fallback ? 1 : 0) << ',' << io::fmt(r.t) << ',' << io::fmt(r.c_star) << ','
           << io::fmt(r.p_value) << ',' << (r.reject ? 1 : 0) << ',' << (r.degenerate ? 1 : 0) << ",\""
           << r.error << "\"\n";
}

void write_null_csv(std::ostream& os, const NullHistogram& h) {
    os << "replicate,rhat,T,pvalue\n";
    for (const auto& r : h.records) {
        if (!r.error.empty() || r.degenerate) continue;
        os << r.replicate_index << ',' << r.rhat << ',' << io::fmt(r.t) << ',' << io::fmt(r.p_value) << '\n';
    }
}

void write_weights_csv(std::ostream& os, const NullHistogram& h) {
    os << "s,weight,sigma\n";
    for (Eigen::Index s = 0; s < h.last_weights.size(); ++s)
        os << s + 1 << ',' << io::fmt(h.last_weights[s]) << ',' << io::fmt(h.last_sigma) << '\n';
}

void write_eigendecay_csv(std::ostream& os, const EigendecayResult& res) {
    os << "replicate,r,lambda_over_n,gap_over_n\n";
    for (std::size_t k = 0; k < res.lambda_over_n.size(); ++k)
        for (std::size_t j = 0; j < res.lambda_over_n[k].size(); ++j)
            os << k << ',' << j + 1 << ',' << io::fmt(res.lambda_over_n[k][j]) << ',' << io::fmt(res.gap_over_n[k][j])
               << '\n';
}

void write_estimation_csv(std::ostream& os, const std::vector<EstimationRow>& rows) {
    os << "n,replicates,rhat,max_norm_scaled,fro_scaled,best_rank_error,failed\n";
    for (const auto& r : rows)
        os << r.n << ',' << r.replicates << ',' << io::fmt(r.mean_rank) << ',' << io::fmt(r.max_norm_scaled) << ','
           << io::fmt(r.frobenius_scaled) << ',' << io::fmt(r.best_rank_error) << ',' << r.failed << '\n';
}

}  // namespace lpg
