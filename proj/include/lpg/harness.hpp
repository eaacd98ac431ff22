#pragma once

// Monte Carlo experiment drivers: eigenvalue decay of P, null histograms of T,
// size/power tables and the entrywise estimation sweep.

#include "lpg/lptest.hpp"
#include "lpg/model.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace lpg {

struct ExperimentConfig {
    KernelSpec kernel = LaplaceKernel{1.0};
    LatentDistribution latent = UniformSphere{3};
    std::size_t n = 1000;
    double rho = 0.4;
    std::size_t replicates = 500;
    std::vector<double> epsilon{0.0};
    double alpha = 0.05;                    // test level
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::optional<std::size_t> fixed_rank;  // rank_mode fixed(K); empty = auto
    std::size_t draws = 200000;
    bool hollow = false;
    bool exclude_self = false;
    bool degree_with_loops = true;
    NullBackend backend = NullBackend::monte_carlo;
    std::size_t top = 40;                   // eigendecay: eigenvalues kept
    std::size_t fit_lo = 2, fit_hi = 30;    // eigendecay: slope window in r
    std::vector<std::size_t> n_grid{500, 1000, 2000};
    double nu = 1.0;
};

using Settings = std::map<std::string, std::string>;

/// `key = value` lines; '#' starts a comment. Later keys override earlier ones.
/// Relative `latent.file` paths are resolved against `base_dir`.
Settings parse_settings(std::istream& is, const std::string& base_dir = "");
Settings load_settings(const std::string& path);

/// Builds and validates a configuration. Throws ConfigError on unknown keys or
/// bad values.
ExperimentConfig make_config(const Settings& settings);

/// Runs f(0), …, f(count − 1) on `threads` workers; results are stored by
/// index so the output does not depend on scheduling. The first exception is
/// rethrown after all workers finish.
template <class F>
auto parallel_map(std::size_t count, std::size_t threads, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
    std::vector<decltype(f(std::size_t{}))> out(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < count;) {
            try {
                out[k] = f(k);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

struct ReplicateRecord {
    std::size_t replicate_index = 0;
    std::uint64_t seed = 0;
    double epsilon = 0;
    std::size_t rhat = 0;
    bool rank_fallback = false;
    double t = 0, c_star = 0, p_value = 1;
    bool reject = false;
    bool degenerate = false;
    Eigen::VectorXd weights;
    double sigma = 0;
    double timing_ms = 0;
    std::string error;  // set when the replicate failed
};

/// Base latents for a configuration with X_{n−1} placed at distance ε from X_0.
LatentSample experiment_latents(const ExperimentConfig& cfg, double epsilon);

PairTestOptions pair_test_options(const ExperimentConfig& cfg, std::uint64_t seed);

/// One replicate: fresh A from the fixed P, then the full pair test on (0, n − 1).
ReplicateRecord run_replicate(const ExperimentConfig& cfg, const EdgeProbabilityMatrix& p, double epsilon,
                              std::size_t index);

using RankHistogram = std::map<std::size_t, std::size_t>;

/// "[3 (0.05), 6 (0.95)]", frequencies rounded to two decimals.
std::string format_rank_frequencies(const RankHistogram& h);

struct PowerRow {
    std::size_t n = 0;
    double rho = 0;
    double epsilon = 0;
    std::size_t replicates = 0;  // completed
    std::size_t rejections = 0;
    double rate = 0;
    double se = 0;               // √(p̂(1 − p̂)/R)
    RankHistogram rhat;
    std::size_t degenerate = 0;
    std::size_t fallback = 0;
    std::size_t failed = 0;
};

struct PowerTable {
    std::vector<PowerRow> rows;
    std::vector<ReplicateRecord> records;
};

PowerTable run_power_table(const ExperimentConfig& cfg);

struct NullHistogram {
    std::vector<ReplicateRecord> records;
    std::vector<double> t_values;  // non-degenerate replicates, replicate order
    RankHistogram rhat;
    Eigen::VectorXd last_weights;
    double last_sigma = 0;
    double ks_reference = 0;  // two-sample KS: T values vs draws from the last replicate's mixture
    double ks_pit = 0;        // KS of the per-replicate p-values against U(0, 1)
    std::size_t degenerate = 0;
    std::size_t failed = 0;
};

NullHistogram run_null_histogram(const ExperimentConfig& cfg);

struct EigendecayResult {
    std::vector<std::vector<double>> lambda_over_n;  // per replicate, r = 1..top
    std::vector<std::vector<double>> gap_over_n;     // |λ_r| − |λ_{r+1}|, over n
    std::vector<double> slopes;                      // NaN when the window has nonpositive values
    double mean_slope = 0;
    std::vector<double> mean_gap;
    std::vector<std::size_t> gap_maxima;             // local maxima of mean_gap, 1-based r
    std::vector<std::string> errors;                 // per replicate, empty when fine
};

EigendecayResult run_eigendecay(const ExperimentConfig& cfg);

/// Least-squares slope of log y against log r over r ∈ [lo, hi] (1-based).
double loglog_slope(const std::vector<double>& y, std::size_t lo, std::size_t hi);

/// Interior local maxima and r = 1 when it exceeds r = 2; 1-based. Gaps at
/// rounding level (≤ 1e-9 of the largest) are never maxima.
std::vector<std::size_t> local_maxima(const std::vector<double>& g);

struct EstimationRow {
    std::size_t n = 0;
    std::size_t replicates = 0;
    double mean_rank = 0;
    double max_norm_scaled = 0;
    double frobenius_scaled = 0;
    double best_rank_error = 0;  // ρ⁻¹‖P_r − P‖_max at the same r
    std::size_t failed = 0;
};

std::vector<EstimationRow> run_estimation_sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& n_grid);

double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_uniform(std::vector<double> u);

void write_power_csv(std::ostream& os, const PowerTable& t);
void write_records_csv(std::ostream& os, const std::vector<ReplicateRecord>& records);
void write_null_csv(std::ostream& os, const NullHistogram& h);
void write_weights_csv(std::ostream& os, const NullHistogram& h);
void write_eigendecay_csv(std::ostream& os, const EigendecayResult& r);
void write_estimation_csv(std::ostream& os, const std::vector<EstimationRow>& rows);

}  // namespace lpg
