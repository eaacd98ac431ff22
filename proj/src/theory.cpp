#include "lpg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lpg {

double varsigma(double nu, std::size_t n, double rho) {
    if (n < 2) throw std::invalid_argument("varsigma: n must be at least 2");
    const double e = std::numbers::e;
    const double logn = std::log(static_cast<double>(n));
    return 2.0 * std::sqrt(2.0 * e * static_cast<double>(n) * rho) +
           (56.0 * std::sqrt(e) + std::sqrt(2.0 * nu)) * std::sqrt(logn);
}

double vartheta(double c, std::size_t r, std::size_t n) {
    if (n < 2) throw std::invalid_argument("vartheta: n must be at least 2");
    return c * std::log(static_cast<double>(n)) + static_cast<double>(r) * std::log(9.0);
}

std::size_t default_jmax(std::size_t n) { return std::min<std::size_t>(n > 0 ? n - 1 : 0, 64); }

std::vector<std::size_t> RankReport::admissible_set() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < admissible.size(); ++j)
        if (admissible[j]) out.push_back(j + 1);
    return out;
}

namespace {

std::size_t scan_limit(std::size_t supplied, std::size_t n, std::size_t jmax) {
    if (supplied < 2) throw std::invalid_argument("rank selection needs at least two eigenvalues");
    const std::size_t cap = jmax ? jmax : default_jmax(n);
    return std::min(cap, supplied - 1);
}

}  // namespace

RankReport select_rank_datadriven(std::span<const double> lambda_hat, double nu, std::size_t n, double rho,
                                  std::size_t jmax) {
    const std::size_t limit = scan_limit(lambda_hat.size(), n, jmax);
    const double s = varsigma(nu, n, rho);
    const double logn = std::log(static_cast<double>(n));
    const double gap_threshold = std::max(4.0 * s, 16.0 / 3.0 * (nu + 2.0) * logn) + 2.0 * s;

    RankReport rep;
    rep.rule = "datadriven";
    for (std::size_t j = 1; j <= limit; ++j) {
        const double lj = std::abs(lambda_hat[j - 1]);
        const double gap = lj - std::abs(lambda_hat[j]);
        const double level = gap > 0 ? std::max(16.0 * (nu + 2.0) * logn + 64.0 * s * s / gap, vartheta(nu + 1.0, j, n)) + s
                                     : std::numeric_limits<double>::infinity();
        const bool ok = gap >= gap_threshold && lj >= level;
        rep.gaps.push_back(gap);
        rep.thresholds.push_back(gap_threshold);
        rep.level_thresholds.push_back(level);
        rep.admissible.push_back(ok);
        if (ok) rep.rhat = j;
    }
    return rep;
}

RankReport select_rank_test(std::span<const double> lambda_hat, double d_ave, std::size_t n, std::size_t jmax) {
    if (d_ave < 0) throw std::invalid_argument("select_rank_test: negative average degree");
    const std::size_t limit = scan_limit(lambda_hat.size(), n, jmax);
    const double logn = std::log(static_cast<double>(n));
    const double floor_a = std::pow(logn, 1.75);
    const double floor_c = std::pow(d_ave, 0.75);
    const double slope = std::sqrt(d_ave) * std::pow(logn, 0.75);

    RankReport rep;
    rep.rule = "test";
    for (std::size_t j = 1; j <= limit; ++j) {
        const double gap = std::abs(lambda_hat[j - 1]) - std::abs(lambda_hat[j]);
        const double thr = std::max({floor_a, std::sqrt(static_cast<double>(j)) * slope, floor_c});
        const bool ok = gap >= thr;
        rep.gaps.push_back(gap);
        rep.thresholds.push_back(thr);
        rep.admissible.push_back(ok);
        if (ok) rep.rhat = j;
    }
    return rep;
}

double coherence(const Eigen::MatrixXd& u) {
    if (u.cols() == 0) throw std::invalid_argument("coherence: empty basis");
    const double t = two_to_inf(u);
    return static_cast<double>(u.rows()) / static_cast<double>(u.cols()) * t * t;
}

CoherenceCheck psd_coherence_check(const SpectralDecomposition& p_decomp, std::size_t r, double rho) {
    if (r == 0 || r > p_decomp.size()) throw std::invalid_argument("psd_coherence_check: r out of range");
    const double scale = std::abs(p_decomp.values[0]);
    for (Eigen::Index j = 0; j < p_decomp.values.size(); ++j)
        if (p_decomp.values[j] < -1e-9 * scale)
            throw std::invalid_argument("psd_coherence_check: matrix has a negative eigenvalue; check applies to "
                                        "positive semidefinite kernels only");
    const auto ri = static_cast<Eigen::Index>(r);
    const Eigen::VectorXd root = p_decomp.values.head(ri).cwiseAbs().cwiseSqrt();
    const Eigen::MatrixXd scaled = p_decomp.vectors.leftCols(ri) * root.asDiagonal();
    const Eigen::VectorXd rows = scaled.rowwise().norm();

    CoherenceCheck out;
    Eigen::Index arg = 0;
    out.lhs = rows.maxCoeff(&arg);
    out.rhs = std::sqrt(rho);
    out.holds = out.lhs <= out.rhs + 1e-10;
    if (!out.holds) out.offending_row = static_cast<std::size_t>(arg);
    return out;
}

EigenvalueConsistency eigenvalue_consistency(std::span<const double> lambda, std::span<const double> mu_hat,
                                             std::size_t n, double rho, double c) {
    EigenvalueConsistency out;
    const double scale = 1.0 / (static_cast<double>(n) * rho);
    std::vector<double> scaled(lambda.size());
    for (std::size_t j = 0; j < lambda.size(); ++j) scaled[j] = lambda[j] * scale;
    const std::size_t k = std::min(lambda.size(), mu_hat.size());
    for (std::size_t j = 0; j < k; ++j) out.sup_deviation = std::max(out.sup_deviation, std::abs(scaled[j] - mu_hat[j]));
    out.bound = 2.0 * std::sqrt(2.0 * c) * std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(n));
    out.pass = out.sup_deviation <= out.bound;
    out.delta2 = delta2_distance(scaled, mu_hat);
    return out;
}

// ---------------------------------------------------------------------------

BoundCertificate bound_certificate(const Eigen::MatrixXd& m, const Eigen::MatrixXd& e, std::size_t r,
                                   const CertificateOptions& options) {
    const Eigen::Index n = m.rows();
    if (m.cols() != n || e.rows() != n || e.cols() != n)
        throw std::invalid_argument("bound_certificate: M and E must be square and of equal size");
    if (n > 300) throw std::invalid_argument("bound_certificate: n exceeds 300");
    if (r < 1 || static_cast<Eigen::Index>(r) >= n) throw std::invalid_argument("bound_certificate: need 1 <= r < n");
    const auto ri = static_cast<Eigen::Index>(r);
    const double nd = static_cast<double>(n);
    const double logn = std::log(nd);

    const SpectralDecomposition dm = eig_dense(m);
    const Eigen::MatrixXd m_hat = m + e;
    const SpectralDecomposition dh = eig_dense(m_hat, r);

    const Eigen::MatrixXd u = dm.vectors.leftCols(ri);
    const Eigen::VectorXd lam = dm.values.head(ri);
    const Eigen::MatrixXd u_perp = dm.vectors.rightCols(n - ri);
    const Eigen::VectorXd lam_perp = dm.values.tail(n - ri);
    const Eigen::MatrixXd& u_hat = dh.vectors;

    BoundCertificate c;
    c.psd = options.psd.value_or(dm.values.minCoeff() >= -1e-10 * std::abs(dm.values[0]));
    c.alpha = options.alpha.value_or(std::sqrt(2.0 * (options.nu + 2.0)) * std::sqrt(options.rho * logn));
    c.beta = options.beta.value_or(2.0 / 3.0 * (options.nu + 2.0) * logn);
    c.lambda_r = std::abs(lam[ri - 1]);
    c.delta_r = c.lambda_r - std::abs(lam_perp[0]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
    c.norm_e = es.eigenvalues().cwiseAbs().maxCoeff();

    const Eigen::MatrixXd eu = e * u;
    const Eigen::MatrixXd proj_hat = u_hat - u * (u.transpose() * u_hat);
    c.psi0 = operator_norm(proj_hat);
    c.psi1 = operator_norm(u.transpose() * eu);
    const Eigen::MatrixXd perp_eu = u_perp.transpose() * eu;
    c.eta = operator_norm(lam_perp.asDiagonal() * perp_eu);
    const Eigen::VectorXd root_perp = lam_perp.cwiseMax(0.0).cwiseSqrt();
    c.eta_tilde = operator_norm(root_perp.asDiagonal() * perp_eu);
    c.psi_star = two_to_inf(eu * lam.cwiseInverse().asDiagonal());

    c.e0 = c.delta_r >= std::max(4.0 * c.norm_e, 8.0 * c.beta);
    c.e2 = c.delta_r > 0 && c.lambda_r >= 24.0 * c.beta + 64.0 * c.norm_e * c.norm_e / c.delta_r;

    if (options.check_loo) {
        c.e1 = true;
        for (Eigen::Index h = 0; h < n; ++h) {
            Eigen::MatrixXd loo = m_hat;
            loo.row(h) = m.row(h);
            loo.col(h) = m.col(h);
            const SpectralDecomposition dl = eig_dense(loo, r);
            const Eigen::MatrixXd v = dl.vectors - u * (u.transpose() * dl.vectors);
            const double lhs = (e.row(h) * v).norm();
            const double rhs = c.alpha * v.norm() + c.beta * two_to_inf(v);
            const double ratio = rhs > 0 ? lhs / rhs : (lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
            c.e1_worst_ratio = std::max(c.e1_worst_ratio, ratio);
            if (lhs > rhs) c.e1 = false;
        }
    }

    const double u2i = two_to_inf(u);
    const double lr = c.lambda_r, d = c.delta_r, ne = c.norm_e;
    c.r0 = u2i * c.psi0 * c.psi0;
    c.r1 = 2.0 * u2i * (c.psi1 + ne * c.psi0) / lr;
    if (c.psd) {
        const double up = two_to_inf(u_perp * root_perp.asDiagonal());
        c.r2 = std::pow(2.0, 2.5) * up * ne * c.psi0 / (std::sqrt(lr) * d) + 8.0 * up * c.eta_tilde / (lr * d);
    } else {
        const Eigen::MatrixXd ul = u_perp * lam_perp.asDiagonal();
        const double up = two_to_inf(ul);
        c.r2 = 8.0 * up * ne * c.psi0 / (lr * d) + 4.0 * two_to_inf(ul * perp_eu) / (lr * lr) +
               16.0 * up * c.eta / (lr * lr * d);
    }
    c.y0 = c.psi_star * ((c.psi1 + ne * c.psi0) / (2.0 * lr) + c.psi0 * c.psi0) +
           32.0 * c.alpha * std::sqrt(static_cast<double>(r)) * ne / (lr * d) +
           (ne * u2i + two_to_inf(eu)) * (16.0 * c.beta + 32.0 * ne) / (d * lr);
    c.y1 = (24.0 * c.beta + 64.0 * ne * ne / d) / lr * (c.psi_star + c.r1 + c.r2 + c.y0);
    if (!(d > 0)) {
        c.r1 = c.r2 = c.y0 = c.y1 = std::numeric_limits<double>::infinity();
    }

    // Exact left-hand side with the block-signed alignment (Û ≈ U W, so Û Wᵀ ≈ U).
    Eigen::MatrixXd w;
    try {
        w = block_signed_procrustes(u, lam, u_hat, dh.values).w;
    } catch (const std::invalid_argument&) {
        w = procrustes(u, u_hat).w;
    }
    c.lhs = two_to_inf(u_hat * w.transpose() - u - eu * lam.cwiseInverse().asDiagonal());
    return c;
}

}  // namespace lpg
