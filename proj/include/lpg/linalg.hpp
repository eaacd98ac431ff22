#pragma once

// Symmetric eigensolvers, matrix norms and Procrustes alignment.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace lpg {

/// y = S x for a symmetric operator S. Must be pure and deterministic.
using MatVec = std::function<void(std::span<const double>, std::span<double>)>;

MatVec matvec_of(const Eigen::MatrixXd& s);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<double> as_span(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

enum class SolverMethod { dense, lanczos };

/// Eigenpairs ordered by decreasing |λ|; ties broken by signed value
/// (descending), then by original index.
struct SpectralDecomposition {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;    // n × k, orthonormal columns
    Eigen::VectorXd residuals;  // ‖S v_j − λ_j v_j‖
    SolverMethod method = SolverMethod::dense;

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors.rows()); }

    /// First r pairs.
    SpectralDecomposition leading(std::size_t r) const;
};

constexpr std::size_t kDenseLimit = 4000;

/// Full decomposition (tridiagonalization + implicit-shift QR). `keep`
/// truncates to the leading pairs before residuals are evaluated.
/// Throws std::invalid_argument on asymmetric input (max |S − Sᵀ| > 1e-12)
/// or n > kDenseLimit.
SpectralDecomposition eig_dense(const Eigen::MatrixXd& s,
                                std::optional<std::size_t> keep = std::nullopt);

struct LanczosOptions {
    double tol = 1e-10;           // residual_j ≤ tol · ‖S‖ (‖S‖ estimated by max |Ritz|)
    std::uint64_t seed = 0;       // start vector
    std::size_t max_restarts = 2000;
    std::size_t subspace = 0;     // 0 picks max(2k + 20, k + 32), capped by n
};

/// Top-k eigenpairs by modulus: thick-restart Lanczos with full
/// reorthogonalization. Requires 1 ≤ k ≤ n/4. Throws ConvergenceError with
/// the achieved residuals when the restart budget runs out.
SpectralDecomposition eig_topk_lanczos(const MatVec& op, std::size_t n, std::size_t k,
                                       const LanczosOptions& options = {});

/// Picks eig_dense for small problems and Lanczos otherwise.
SpectralDecomposition eig_topk(const MatVec& op, std::size_t n, std::size_t k,
                               const LanczosOptions& options = {});

struct MatrixNorms {
    double two_to_inf = 0;   // max_i ‖row_i‖₂
    double frobenius = 0;
    double max_abs = 0;
    double inf_row_sum = 0;  // max_i Σ_j |m_ij|
};

MatrixNorms matrix_norms(const Eigen::MatrixXd& m);

inline double two_to_inf(const Eigen::MatrixXd& m) {
    return m.rows() == 0 ? 0.0 : m.rowwise().norm().maxCoeff();
}

/// Largest singular value.
double operator_norm(const Eigen::MatrixXd& m);

/// |λ_1| of a symmetric operator, to relative accuracy tol.
double spectral_norm(const MatVec& op, std::size_t n, double tol = 1e-10, std::uint64_t seed = 0);

struct AlignmentResult {
    Eigen::MatrixXd w;               // r × r orthogonal, Û ≈ U W
    std::vector<std::size_t> positive;  // column indices of the + block
    std::vector<std::size_t> negative;  // column indices of the − block
    Eigen::VectorXd signs;           // diagonal of J, Λ = |Λ| J
    double frobenius_misfit = 0;     // ‖Û − U W‖_F
};

/// W = argmin over orthogonal W of ‖Û − U W‖_F (polar factor of UᵀÛ).
/// Null directions of UᵀÛ are completed by the orthogonal map closest to the
/// identity between the two null spaces.
AlignmentResult procrustes(const Eigen::MatrixXd& u, const Eigen::MatrixXd& u_hat);

/// W = diag(W⁺, W⁻) with each block solving Procrustes on the eigenvector
/// columns of one eigenvalue sign. Throws std::invalid_argument when the
/// sign patterns of Λ and Λ̂ differ.
AlignmentResult block_signed_procrustes(const Eigen::MatrixXd& u, const Eigen::VectorXd& lambda,
                                        const Eigen::MatrixXd& u_hat,
                                        const Eigen::VectorXd& lambda_hat);

/// Σ_k (v↓_k − w↓_k)² after zero-padding to a common length; the descending
/// sort is the optimal bijection for squared loss.
double delta2_distance(std::span<const double> v, std::span<const double> w);

/// Symmetric inverse square root with eigenvalues floored at floor_rel·trace.
Eigen::MatrixXd inverse_sqrt_psd(const Eigen::MatrixXd& s, double floor_rel = 1e-12);

}  // namespace lpg
