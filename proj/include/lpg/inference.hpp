#pragma once

// Spectral embeddings, edge-probability estimation, expansion residuals and
// row-wise normal-approximation diagnostics.

#include "lpg/linalg.hpp"
#include "lpg/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace lpg {

struct EmbeddingSet {
    double alpha = 0;        // 0, 1/2 or 1
    Eigen::MatrixXd matrix;  // Û |Λ̂|^α, n × r
};

/// Û |Λ̂|^α for α ∈ {0, 1/2, 1}; α = 1 keeps the sign of λ̂ so that A Û = Û Λ̂.
/// Throws std::invalid_argument for other α or r beyond the computed pairs.
EmbeddingSet embed(const SpectralDecomposition& decomp, std::size_t r, double alpha);

/// P̂_r = Û Λ̂ Ûᵀ, optionally clipped to [0, 1].
Eigen::MatrixXd estimate_p(const SpectralDecomposition& decomp, std::size_t r, bool clip = false);

struct EntrywiseError {
    double max_norm_scaled = 0;  // ρ⁻¹ ‖P̂ − P‖_max
    double frobenius_scaled = 0; // (nρ)⁻¹ ‖P̂ − P‖_F
};

EntrywiseError entrywise_error(const Eigen::MatrixXd& p_hat, const Eigen::MatrixXd& p, double rho);

/// ρ⁻¹ ‖P_r − P‖_max for the best rank-r approximation taken from a full
/// decomposition of P.
double best_rank_error(const SpectralDecomposition& p_full, const Eigen::MatrixXd& p, std::size_t r, double rho);

struct ExpansionOptions {
    double nu = 1.0;
    double rho = 1.0;
};

struct ExpansionReport {
    double alpha = 0;
    double lhs_2toinf = 0;        // ‖Û|Λ̂|^α W − U|Λ|^α‖_{2→∞}
    double main_term_2toinf = 0;  // EUΛ⁻¹, EU|Λ|^{-1/2}J or EU
    double residual_2toinf = 0;   // ‖Q‖_{2→∞}, Q the exact difference
    double identity_error = 0;    // max |lhs − main − Q|, rounding only
    double main_bound = 0;        // (11/2) √ρ √ϑ(ν+1, r, n) · |λ_r|^{α−1}
    bool main_bound_holds = false;
    std::optional<double> residual_bound;  // explicit-constant bound, PSD and α = 1/2 only
    double delta_r = 0;
    double lambda_r = 0;
    AlignmentResult alignment;
};

/// E = A − P given through the products E U; both decompositions must carry at
/// least r pairs (P needs r + 1 for δ_r). Sign patterns of Λ and Λ̂ must agree.
ExpansionReport verify_expansion(const SpectralDecomposition& a_decomp, const SpectralDecomposition& p_decomp,
                                 const Eigen::MatrixXd& eu, std::size_t r, double alpha,
                                 const ExpansionOptions& options = {});

/// Convenience overload forming E U = A U − P U.
ExpansionReport verify_expansion(const SpectralDecomposition& a_decomp, const SpectralDecomposition& p_decomp,
                                 const Eigen::MatrixXd& p, const Eigen::MatrixXd& a, std::size_t r, double alpha,
                                 const ExpansionOptions& options = {});

ExpansionReport verify_expansion(const SpectralDecomposition& a_decomp, const SpectralDecomposition& p_decomp,
                                 const EdgeProbabilityMatrix& p, const Adjacency& a, std::size_t r, double alpha,
                                 const ExpansionOptions& options = {});

struct RowwiseDiagnostics {
    std::size_t i = 0;
    Eigen::MatrixXd sigma;                  // Σ_i, r × r
    Eigen::VectorXd standardized_residual;  // (JΣ_iJ)^{-1/2} (Wᵀ|Λ̂|^{1/2}Û_i − |Λ|^{1/2}U_i)
    Eigen::VectorXd raw_residual;
};

/// Σ_i = |Λ|^{-1/2} (Σ_k p_ik(1 − p_ik) U_k U_kᵀ) |Λ|^{-1/2}. Throws
/// NumericalError if Σ_i is singular.
RowwiseDiagnostics rowwise_diagnostics(const EdgeProbabilityMatrix& p, const SpectralDecomposition& p_decomp,
                                       const SpectralDecomposition& a_decomp, std::size_t r, std::size_t i);

}  // namespace lpg
