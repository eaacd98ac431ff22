#pragma once

// Rank-adaptive two-sample test for equality of latent positions and its
// weighted chi-square null calibration.

#include "lpg/linalg.hpp"
#include "lpg/model.hpp"
#include "lpg/theory.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace lpg {

/// d̂_k = |a_ik − a_jk|. With exclude_self the entries k ∈ {i, j} are zeroed.
Eigen::VectorXd dhat(const Adjacency& a, std::size_t i, std::size_t j, bool exclude_self = false);

struct PairStatistic {
    double t = 0;       // (‖(A_i − A_j)ᵀÛ‖² − θ̂) / σ̂
    double theta = 0;   // ‖D̂Û‖²_F
    double sigma = 0;   // ‖ÛᵀD̂²Û‖_F
    double quadratic = 0;  // ‖(A_i − A_j)ᵀÛ‖²
    Eigen::VectorXd weights;  // eigenvalues of ÛᵀD̂²Û, descending
    bool degenerate = false;  // D̂Û = 0: T undefined
};

PairStatistic test_statistic(const Adjacency& a, const Eigen::MatrixXd& u_hat, std::size_t i, std::size_t j,
                             bool exclude_self = false);

/// Same statistic from a dense 0/1 matrix (small inputs and cross-checks).
PairStatistic test_statistic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& u_hat, std::size_t i, std::size_t j,
                             bool exclude_self = false);

/// Monte Carlo null: sorted draws of σ⁻¹ Σ_s w_s (Z_s² − 1).
class NullCalibration {
public:
    /// Requires draws ≥ 10⁴ and at least one positive weight.
    NullCalibration(const Eigen::VectorXd& weights, double sigma, std::size_t draws, std::uint64_t seed);

    /// Empirical (1 − level) quantile, level ∈ (0, 1]. level = 1 returns −∞.
    double critical_value(double level) const;
    /// (1 + #{draws ≥ t}) / (B + 1).
    double p_value(double t) const;
    double min_draw() const { return draws_.front(); }
    std::size_t size() const { return draws_.size(); }
    const std::vector<double>& draws() const { return draws_; }

private:
    std::vector<double> draws_;
};

struct CriticalValue {
    double c_star = 0;
    double min_draw = 0;
    std::shared_ptr<const NullCalibration> null;
};

CriticalValue null_critical_value(const Eigen::VectorXd& weights, double sigma, double level, std::size_t draws,
                                  std::uint64_t seed);

/// Exact law of σ⁻¹ Σ_s w_s (Z_s² − 1) for nonnegative weights: Imhof's
/// inversion of the characteristic function, or the χ²₁ law when only one
/// weight is positive.
class ExactNull {
public:
    ExactNull(const Eigen::VectorXd& weights, double sigma);

    double survival(double t) const;  // P(X > t)
    double cdf(double t) const { return 1.0 - survival(t); }
    double quantile(double p) const;  // inverse cdf, p ∈ (0, 1)

private:
    std::vector<double> w_;  // positive weights divided by σ
    double shift_ = 0;       // Σ w
};

enum class NullBackend { monte_carlo, exact };

struct PairTestOptions {
    double level = 0.05;
    std::optional<std::size_t> fixed_rank;  // rank_mode fixed(K)
    std::size_t draws = 200000;
    std::uint64_t seed = 0;
    bool exclude_self = false;
    bool degree_with_loops = true;          // self-loops count toward d_ave
    std::size_t jmax = 0;                   // 0 → min(n − 1, 64)
    double lanczos_tol = 1e-10;
    NullBackend backend = NullBackend::monte_carlo;
};

struct TestReport {
    std::size_t i = 0, j = 0;
    std::size_t rhat = 0;
    bool rank_fallback = false;  // no j met the threshold; r̂ = 1 used
    double t = 0, theta = 0, sigma = 0;
    Eigen::VectorXd weights;
    double c_star = 0;
    double p_value = 1;
    bool reject = false;
    bool degenerate = false;
    double average_degree = 0;
    RankReport rank;
    Eigen::VectorXd eigenvalues;  // the top-k values used for rank selection
};

/// d_ave → top-(jmax+1) eigenpairs of A → r̂ → Û → T → null quantile → decision.
TestReport run_pair_test(const Adjacency& a, std::size_t i, std::size_t j, const PairTestOptions& options = {});

/// Same pipeline on a precomputed decomposition of A (k ≥ r̂ pairs).
TestReport run_pair_test(const Adjacency& a, const SpectralDecomposition& decomp, std::size_t i, std::size_t j,
                         const PairTestOptions& options = {});

}  // namespace lpg
