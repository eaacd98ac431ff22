#pragma once

// Explicit constants, rank-selection rules, coherence diagnostics and the
// deterministic row-wise perturbation certificate.

#include "lpg/linalg.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lpg {

/// ς(ν, n) = 2√(2enρ) + (56√e + √(2ν))√(log n): high-probability bound on ‖A − P‖.
double varsigma(double nu, std::size_t n, double rho);

/// ϑ(c, r, n) = c log n + r log 9.
double vartheta(double c, std::size_t r, std::size_t n);

/// Default gap-scan horizon min(n − 1, 64).
std::size_t default_jmax(std::size_t n);

struct RankReport {
    std::optional<std::size_t> rhat;    // largest admissible j, if any
    std::vector<double> gaps;           // gaps[j-1] = |λ_j| − |λ_{j+1}|, j = 1..jmax
    std::vector<double> thresholds;     // gap threshold per j
    std::vector<double> level_thresholds;  // magnitude threshold per j (data-driven rule only)
    std::vector<bool> admissible;       // per j
    std::string rule;

    /// r̂, or 1 when no j qualifies (the test pipeline's fallback).
    std::size_t value() const noexcept { return rhat.value_or(1); }
    bool fallback() const noexcept { return !rhat.has_value(); }
    std::vector<std::size_t> admissible_set() const;
};

/// Both data-driven conditions on the moduli of λ̂ with ρ known:
///   |λ̂_r| − |λ̂_{r+1}| ≥ max{4ς, 16/3 (ν+2) log n} + 2ς
///   |λ̂_r| ≥ max{16 (ν+2) log n + 64ς²/gap_r, ϑ(ν+1, r, n)} + ς
/// r̂ is the largest admissible r. `jmax` = 0 picks default_jmax(n), further
/// capped at λ̂.size() − 1.
RankReport select_rank_datadriven(std::span<const double> lambda_hat, double nu, std::size_t n, double rho,
                                  std::size_t jmax = 0);

/// r̂ = argmax{j : |λ̂_j| − |λ̂_{j+1}| ≥ max(log^{7/4} n, √j √d log^{3/4} n, d^{3/4})}.
RankReport select_rank_test(std::span<const double> lambda_hat, double d_ave, std::size_t n,
                            std::size_t jmax = 0);

/// (n/r)‖U‖²_{2→∞}.
double coherence(const Eigen::MatrixXd& u);

struct CoherenceCheck {
    bool holds = false;
    double lhs = 0;  // ‖U |Λ|^{1/2}‖_{2→∞}
    double rhs = 0;  // √ρ
    std::optional<std::size_t> offending_row;
};

/// Checks ‖U_r |Λ_r|^{1/2}‖_{2→∞} ≤ √ρ (+1e-10) for the leading r pairs of P.
/// Throws std::invalid_argument if any of those eigenvalues is negative
/// beyond rounding (the check only applies to positive semidefinite P).
CoherenceCheck psd_coherence_check(const SpectralDecomposition& p_decomp, std::size_t r, double rho);

struct EigenvalueConsistency {
    double sup_deviation = 0;  // sup_j |λ_j/(nρ) − μ̂_j|
    double bound = 0;          // 2√(2c) √(log n / n)
    bool pass = false;
    double delta2 = 0;         // δ₂(λ/(nρ), μ̂)
};

EigenvalueConsistency eigenvalue_consistency(std::span<const double> lambda, std::span<const double> mu_hat,
                                             std::size_t n, double rho, double c);

// ---------------------------------------------------------------------------

struct CertificateOptions {
    double nu = 1.0;
    double rho = 1.0;                // sparsity entering α
    std::optional<double> alpha;     // overrides √(2(ν+2)) √(ρ log n)
    std::optional<double> beta;      // overrides (2/3)(ν+2) log n
    std::optional<bool> psd;         // default: detect from the spectrum of M
    bool check_loo = true;           // evaluate the leave-one-out event
};

struct BoundCertificate {
    // inputs
    double norm_e = 0, psi0 = 0, psi1 = 0, eta = 0, eta_tilde = 0, psi_star = 0;
    double alpha = 0, beta = 0, delta_r = 0, lambda_r = 0;
    bool psd = false;
    // events
    bool e0 = false, e1 = false, e2 = false;
    double e1_worst_ratio = 0;  // max_h lhs/rhs of the leave-one-out condition
    // terms
    double r0 = 0, r1 = 0, r2 = 0, y0 = 0, y1 = 0;
    // exact left-hand side ‖Û W − U − E U Λ⁻¹‖_{2→∞}
    double lhs = 0;

    double total() const noexcept { return r0 + r1 + r2 + y0 + y1; }
    bool events_hold() const noexcept { return e0 && e1 && e2; }
    bool certified() const noexcept { return events_hold() && lhs <= total(); }
};

/// Evaluates the deterministic row-wise bound for M̂ = M + E at rank r.
/// Needs n leave-one-out eigendecompositions, so n is capped at 300.
BoundCertificate bound_certificate(const Eigen::MatrixXd& m, const Eigen::MatrixXd& e, std::size_t r,
                                   const CertificateOptions& options = {});

}  // namespace lpg
