#include "lpg/inference.hpp"

#include "lpg/error.hpp"
#include "lpg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lpg {

namespace {

void require_pairs(const SpectralDecomposition& d, std::size_t r, const char* who) {
    if (r == 0 || r > d.size()) throw std::invalid_argument(std::string(who) + ": r exceeds the computed pairs");
}

Eigen::VectorXd scale_powers(const Eigen::VectorXd& lambda, double alpha) {
    if (alpha == 1.0) return lambda;
    return lambda.cwiseAbs().array().pow(alpha).matrix();
}

}  // namespace

EmbeddingSet embed(const SpectralDecomposition& decomp, std::size_t r, double alpha) {
    if (alpha != 0.0 && alpha != 0.5 && alpha != 1.0) throw std::invalid_argument("embed: alpha must be 0, 1/2 or 1");
    require_pairs(decomp, r, "embed");
    const auto ri = static_cast<Eigen::Index>(r);
    return {alpha, decomp.vectors.leftCols(ri) * scale_powers(decomp.values.head(ri), alpha).asDiagonal()};
}

Eigen::MatrixXd estimate_p(const SpectralDecomposition& decomp, std::size_t r, bool clip) {
    require_pairs(decomp, r, "estimate_p");
    const auto ri = static_cast<Eigen::Index>(r);
    const Eigen::MatrixXd u = decomp.vectors.leftCols(ri);
    Eigen::MatrixXd p_hat = u * decomp.values.head(ri).asDiagonal() * u.transpose();
    if (clip) p_hat = p_hat.cwiseMax(0.0).cwiseMin(1.0);
    return p_hat;
}

EntrywiseError entrywise_error(const Eigen::MatrixXd& p_hat, const Eigen::MatrixXd& p, double rho) {
    if (p_hat.rows() != p.rows() || p_hat.cols() != p.cols())
        throw std::invalid_argument("entrywise_error: shape mismatch");
    const Eigen::MatrixXd diff = p_hat - p;
    return {diff.cwiseAbs().maxCoeff() / rho, diff.norm() / (static_cast<double>(p.rows()) * rho)};
}

double best_rank_error(const SpectralDecomposition& p_full, const Eigen::MatrixXd& p, std::size_t r, double rho) {
    return entrywise_error(estimate_p(p_full, r), p, rho).max_norm_scaled;
}

ExpansionReport verify_expansion(const SpectralDecomposition& a_decomp, const SpectralDecomposition& p_decomp,
                                 const Eigen::MatrixXd& eu, std::size_t r, double alpha,
                                 const ExpansionOptions& options) {
    if (alpha != 0.0 && alpha != 0.5 && alpha != 1.0)
        throw std::invalid_argument("verify_expansion: alpha must be 0, 1/2 or 1");
    require_pairs(a_decomp, r, "verify_expansion");
    require_pairs(p_decomp, r, "verify_expansion");
    const auto ri = static_cast<Eigen::Index>(r);
    if (eu.cols() < ri || eu.rows() != p_decomp.vectors.rows())
        throw std::invalid_argument("verify_expansion: E U has the wrong shape");

    const Eigen::MatrixXd u = p_decomp.vectors.leftCols(ri);
    const Eigen::VectorXd lam = p_decomp.values.head(ri);
    const Eigen::MatrixXd u_hat = a_decomp.vectors.leftCols(ri);
    const Eigen::VectorXd lam_hat = a_decomp.values.head(ri);
    const Eigen::MatrixXd e_u = eu.leftCols(ri);

    ExpansionReport rep;
    rep.alpha = alpha;
    rep.alignment = block_signed_procrustes(u, lam, u_hat, lam_hat);
    const Eigen::MatrixXd wp = rep.alignment.w.transpose();  // Û Wp ≈ U

    const Eigen::MatrixXd lhs =
        u_hat * scale_powers(lam_hat, alpha).asDiagonal() * wp - u * scale_powers(lam, alpha).asDiagonal();
    Eigen::MatrixXd main;
    if (alpha == 0.0) {
        main = e_u * lam.cwiseInverse().asDiagonal();
    } else if (alpha == 0.5) {
        const Eigen::VectorXd d = rep.alignment.signs.cwiseQuotient(lam.cwiseAbs().cwiseSqrt());
        main = e_u * d.asDiagonal();
    } else {
        main = e_u;
    }
    const Eigen::MatrixXd q = lhs - main;
    rep.lhs_2toinf = two_to_inf(lhs);
    rep.main_term_2toinf = two_to_inf(main);
    rep.residual_2toinf = two_to_inf(q);
    rep.identity_error = (lhs - (main + q)).cwiseAbs().maxCoeff();

    const std::size_t n = static_cast<std::size_t>(u.rows());
    rep.lambda_r = std::abs(lam[ri - 1]);
    rep.delta_r = p_decomp.size() > r ? rep.lambda_r - std::abs(p_decomp.values[ri]) : rep.lambda_r;
    const double core = 5.5 * std::sqrt(options.rho) * std::sqrt(vartheta(options.nu + 1.0, r, n));
    rep.main_bound = core * std::pow(rep.lambda_r, alpha - 1.0);
    rep.main_bound_holds = rep.main_term_2toinf <= rep.main_bound;

    const bool psd = (lam.array() >= 0).all() && (lam_hat.array() >= 0).all();
    if (psd && alpha == 0.5 && rep.delta_r > 0) {
        const double nu = options.nu, rho = options.rho;
        const double s = varsigma(nu, n, rho);
        const double th = vartheta(nu + 2.0, r, n);
        const double logn = std::log(static_cast<double>(n));
        const double d = rep.delta_r, l = rep.lambda_r;
        rep.residual_bound = 74.0 * std::sqrt(rho) * s * s / (d * d) + 181.0 * rho * std::sqrt(th) / d +
                             80.0 * s * std::sqrt((nu + 2.0) * static_cast<double>(r) * rho * logn) / (d * std::sqrt(l)) +
                             std::sqrt(rho * th) / std::sqrt(l) * (176.0 * (nu + 2.0) * logn + 357.0 * s) / d;
    }
    return rep;
}

ExpansionReport verify_expansion(const SpectralDecomposition& a_decomp, const SpectralDecomposition& p_decomp,
                                 const Eigen::MatrixXd& p, const Eigen::MatrixXd& a, std::size_t r, double alpha,
                                 const ExpansionOptions& options) {
    require_pairs(p_decomp, r, "verify_expansion");
    const Eigen::MatrixXd u = p_decomp.vectors.leftCols(static_cast<Eigen::Index>(r));
    return verify_expansion(a_decomp, p_decomp, Eigen::MatrixXd(a * u - p * u), r, alpha, options);
}

ExpansionReport verify_expansion(const SpectralDecomposition& a_decomp, const SpectralDecomposition& p_decomp,
                                 const EdgeProbabilityMatrix& p, const Adjacency& a, std::size_t r, double alpha,
                                 const ExpansionOptions& options) {
    require_pairs(p_decomp, r, "verify_expansion");
    const auto ri = static_cast<Eigen::Index>(r);
    const Eigen::Index n = p_decomp.vectors.rows();
    Eigen::MatrixXd eu(n, ri);
    Eigen::VectorXd col(n), ya(n), yp(n);
    for (Eigen::Index c = 0; c < ri; ++c) {
        col = p_decomp.vectors.col(c);
        a.apply(as_span(col), as_span(ya));
        p.apply(as_span(col), as_span(yp));
        eu.col(c) = ya - yp;
    }
    return verify_expansion(a_decomp, p_decomp, eu, r, alpha, options);
}

RowwiseDiagnostics rowwise_diagnostics(const EdgeProbabilityMatrix& p, const SpectralDecomposition& p_decomp,
                                       const SpectralDecomposition& a_decomp, std::size_t r, std::size_t i) {
    require_pairs(p_decomp, r, "rowwise_diagnostics");
    require_pairs(a_decomp, r, "rowwise_diagnostics");
    if (i >= p.size()) throw std::invalid_argument("rowwise_diagnostics: vertex index out of range");
    const auto ri = static_cast<Eigen::Index>(r);
    const Eigen::Index n = static_cast<Eigen::Index>(p.size());
    const Eigen::MatrixXd u = p_decomp.vectors.leftCols(ri);
    const Eigen::VectorXd lam = p_decomp.values.head(ri);

    Eigen::VectorXd w(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double pik = p(i, static_cast<std::size_t>(k));
        w[k] = pik * (1.0 - pik);
    }
    const Eigen::VectorXd inv_root = lam.cwiseAbs().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd inner = u.transpose() * w.asDiagonal() * u;
    RowwiseDiagnostics out;
    out.i = i;
    out.sigma = inv_root.asDiagonal() * inner * inv_root.asDiagonal();
    out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.sigma, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 1e-14 * std::max(es.eigenvalues().maxCoeff(), 1e-300))
        throw NumericalError("rowwise_diagnostics: covariance is singular");

    const Eigen::VectorXd lam_hat = a_decomp.values.head(ri);
    const AlignmentResult al = block_signed_procrustes(u, lam, a_decomp.vectors.leftCols(ri), lam_hat);
    const Eigen::VectorXd row_hat = a_decomp.vectors.row(static_cast<Eigen::Index>(i)).head(ri).transpose();
    const Eigen::VectorXd row = u.row(static_cast<Eigen::Index>(i)).transpose();
    // Wᵀ|Λ̂|^{1/2}Û_i with the alignment Û Wᵀ ≈ U, i.e. W_paper = Wᵀ.
    out.raw_residual = al.w * lam_hat.cwiseAbs().cwiseSqrt().asDiagonal() * row_hat -
                       lam.cwiseAbs().cwiseSqrt().asDiagonal() * row;
    const Eigen::MatrixXd signed_sigma = al.signs.asDiagonal() * out.sigma * al.signs.asDiagonal();
    out.standardized_residual = inverse_sqrt_psd(signed_sigma) * out.raw_residual;
    return out;
}

}  // namespace lpg
