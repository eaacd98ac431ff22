#include "lpg/linalg.hpp"

#include "lpg/error.hpp"
#include "lpg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace lpg {

namespace {

// Indices of `values` sorted by decreasing modulus, then signed value, then index.
std::vector<Eigen::Index> modulus_order(const Eigen::VectorXd& values) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ma = std::abs(values[a]);
        const double mb = std::abs(values[b]);
        if (ma != mb) return ma > mb;
        return values[a] > values[b];
    });
    return idx;
}

// Flip each column so its largest-magnitude entry is positive.
void canonicalize_signs(Eigen::MatrixXd& v) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        Eigen::Index arg = 0;
        v.col(c).cwiseAbs().maxCoeff(&arg);
        if (v(arg, c) < 0) v.col(c) = -v.col(c);
    }
}

Eigen::VectorXd residual_norms(const MatVec& op, const Eigen::MatrixXd& vectors,
                               const Eigen::VectorXd& values) {
    const Eigen::Index n = vectors.rows();
    Eigen::VectorXd res(values.size());
    Eigen::VectorXd y(n);
    for (Eigen::Index j = 0; j < values.size(); ++j) {
        op(std::span<const double>(vectors.col(j).data(), static_cast<std::size_t>(n)),
           std::span<double>(y.data(), static_cast<std::size_t>(n)));
        res[j] = (y - values[j] * vectors.col(j)).norm();
    }
    return res;
}

}  // namespace

MatVec matvec_of(const Eigen::MatrixXd& s) {
    return [&s](std::span<const double> x, std::span<double> y) {
        const auto n = static_cast<Eigen::Index>(x.size());
        Eigen::Map<Eigen::VectorXd>(y.data(), n).noalias() = s * Eigen::Map<const Eigen::VectorXd>(x.data(), n);
    };
}

SpectralDecomposition SpectralDecomposition::leading(std::size_t r) const {
    if (r > size()) throw std::invalid_argument("SpectralDecomposition::leading: r exceeds computed pairs");
    const auto rr = static_cast<Eigen::Index>(r);
    return {values.head(rr), vectors.leftCols(rr), residuals.head(rr), method};
}

// ---------------------------------------------------------------------------

SpectralDecomposition eig_dense(const Eigen::MatrixXd& s, std::optional<std::size_t> keep) {
    if (s.rows() != s.cols()) throw std::invalid_argument("eig_dense: matrix must be square");
    const Eigen::Index n = s.rows();
    if (static_cast<std::size_t>(n) > kDenseLimit)
        throw std::invalid_argument("eig_dense: n = " + std::to_string(n) + " exceeds the dense limit");
    if (n > 0 && (s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("eig_dense: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success) throw NumericalError("eig_dense: QR iteration failed");

    const auto order = modulus_order(es.eigenvalues());
    const auto k = static_cast<Eigen::Index>(std::min<std::size_t>(keep.value_or(static_cast<std::size_t>(n)),
                                                                   static_cast<std::size_t>(n)));
    SpectralDecomposition out;
    out.method = SolverMethod::dense;
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        out.values[j] = es.eigenvalues()[order[static_cast<std::size_t>(j)]];
        out.vectors.col(j) = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
    }
    canonicalize_signs(out.vectors);
    out.residuals = (s * out.vectors - out.vectors * out.values.asDiagonal()).colwise().norm().transpose();
    return out;
}

// ---------------------------------------------------------------------------
// Thick-restart Lanczos. The projected matrix H = VᵀSV is kept explicitly:
// every new column is fully reorthogonalized (classical Gram-Schmidt, two
// passes) and its projection coefficients fill one row/column of H. After a
// restart H is diag(θ) bordered by the coupling to the residual vector.

SpectralDecomposition eig_topk_lanczos(const MatVec& op, std::size_t n, std::size_t k,
                                       const LanczosOptions& options) {
    if (k < 1 || 4 * k > n) throw std::invalid_argument("eig_topk_lanczos: need 1 <= k <= n/4");
    const std::size_t m = std::min(n, options.subspace ? std::max(options.subspace, k + 2)
                                                       : std::max(2 * k + 20, k + 32));
    const auto ni = static_cast<Eigen::Index>(n);
    const auto mi = static_cast<Eigen::Index>(m);
    const auto ki = static_cast<Eigen::Index>(k);

    CounterRng rng(options.seed, Stream::lanczos);
    std::normal_distribution<double> normal;
    auto random_vector = [&]() {
        Eigen::VectorXd v(ni);
        for (Eigen::Index i = 0; i < ni; ++i) v[i] = normal(rng);
        return v;
    };

    Eigen::MatrixXd basis(ni, mi + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(mi, mi);
    Eigen::VectorXd w(ni);

    basis.col(0) = random_vector().normalized();
    Eigen::Index start = 0;   // first column whose image has not been computed
    double beta = 0;          // coupling of the last basis column to the residual
    double norm_est = 0;
    Eigen::VectorXd last_res;

    for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
        Eigen::Index filled = mi;
        for (Eigen::Index j = start; j < mi; ++j) {
            op(std::span<const double>(basis.col(j).data(), n), std::span<double>(w.data(), n));
            const Eigen::Index cols = j + 1;
            Eigen::VectorXd coef = basis.leftCols(cols).transpose() * w;
            w.noalias() -= basis.leftCols(cols) * coef;
            const Eigen::VectorXd again = basis.leftCols(cols).transpose() * w;
            w.noalias() -= basis.leftCols(cols) * again;
            coef += again;
            for (Eigen::Index i = 0; i < cols; ++i) h(i, j) = h(j, i) = coef[i];

            beta = w.norm();
            const double scale = std::max(norm_est, h.topLeftCorner(cols, cols).cwiseAbs().maxCoeff());
            if (j + 1 == static_cast<Eigen::Index>(n)) {
                beta = 0;
                filled = j + 1;
                break;
            }
            if (beta <= 1e-13 * std::max(scale, 1e-300)) {
                // Invariant subspace: continue with a fresh direction, no coupling.
                beta = 0;
                Eigen::VectorXd v = random_vector();
                for (int pass = 0; pass < 2; ++pass) v -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * v);
                const double vn = v.norm();
                if (vn < 1e-10) {
                    filled = j + 1;
                    break;
                }
                basis.col(j + 1) = v / vn;
                if (j + 1 < mi) continue;
                // Residual column is a fresh direction with zero coupling.
                break;
            }
            basis.col(j + 1) = w / beta;
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(filled, filled));
        if (es.info() != Eigen::Success) throw NumericalError("eig_topk_lanczos: projected eigensolve failed");
        const auto order = modulus_order(es.eigenvalues());
        Eigen::VectorXd theta(filled);
        Eigen::MatrixXd y(filled, filled);
        for (Eigen::Index c = 0; c < filled; ++c) {
            theta[c] = es.eigenvalues()[order[static_cast<std::size_t>(c)]];
            y.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
        }
        norm_est = std::max(norm_est, std::abs(theta[0]));
        const double threshold = options.tol * std::max(norm_est, 1e-300);

        const Eigen::Index want = std::min(ki, filled);
        Eigen::VectorXd est = (beta * y.row(filled - 1).head(want)).cwiseAbs().transpose();
        if (filled < mi) est.setZero();  // exhausted the space: Ritz pairs are exact

        if (est.maxCoeff() <= threshold) {
            SpectralDecomposition out;
            out.method = SolverMethod::lanczos;
            out.values = theta.head(want);
            out.vectors = basis.leftCols(filled) * y.leftCols(want);
            // Re-orthonormalize against drift accumulated over restarts.
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.vectors);
            Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ni, want);
            const Eigen::VectorXd rdiag = qr.matrixQR().diagonal().head(want);
            for (Eigen::Index c = 0; c < want; ++c)
                if (rdiag[c] < 0) q.col(c) = -q.col(c);
            out.vectors = q;
            canonicalize_signs(out.vectors);
            out.residuals = residual_norms(op, out.vectors, out.values);
            last_res = out.residuals;
            if (out.residuals.maxCoeff() <= threshold) return out;
        } else {
            last_res = est;
        }

        // Thick restart: keep the leading p Ritz vectors plus the residual direction.
        const Eigen::Index p = std::min<Eigen::Index>(filled - 1, ki + (mi - ki) / 2);
        Eigen::MatrixXd kept = basis.leftCols(filled) * y.leftCols(p);
        const Eigen::VectorXd residual_dir = basis.col(filled);
        const Eigen::VectorXd coupling = beta * y.row(filled - 1).head(p).transpose();
        basis.leftCols(p) = kept;
        basis.col(p) = residual_dir;
        h.setZero();
        for (Eigen::Index i = 0; i < p; ++i) {
            h(i, i) = theta[i];
            h(i, p) = h(p, i) = coupling[i];
        }
        start = p;
    }

    throw ConvergenceError("eig_topk_lanczos: no convergence after " + std::to_string(options.max_restarts) +
                               " restarts",
                           std::vector<double>(last_res.data(), last_res.data() + last_res.size()));
}

SpectralDecomposition eig_topk(const MatVec& op, std::size_t n, std::size_t k, const LanczosOptions& options) {
    k = std::min(k, n);
    if (n <= 400 || 4 * k > n) {
        const auto ni = static_cast<Eigen::Index>(n);
        Eigen::MatrixXd s(ni, ni);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(ni);
        for (Eigen::Index c = 0; c < ni; ++c) {
            e[c] = 1;
            op(std::span<const double>(e.data(), n), std::span<double>(s.col(c).data(), n));
            e[c] = 0;
        }
        s = 0.5 * (s + s.transpose()).eval();
        return eig_dense(s, k);
    }
    return eig_topk_lanczos(op, n, k, options);
}

// ---------------------------------------------------------------------------

MatrixNorms matrix_norms(const Eigen::MatrixXd& m) {
    MatrixNorms out;
    if (m.size() == 0) return out;
    out.two_to_inf = two_to_inf(m);
    out.frobenius = m.norm();
    out.max_abs = m.cwiseAbs().maxCoeff();
    out.inf_row_sum = m.cwiseAbs().rowwise().sum().maxCoeff();
    return out;
}

double operator_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0;
    if (m.cols() <= m.rows()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.transpose() * m, Eigen::EigenvaluesOnly);
        return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m * m.transpose(), Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double spectral_norm(const MatVec& op, std::size_t n, double tol, std::uint64_t seed) {
    if (n == 0) return 0;
    LanczosOptions opts;
    opts.tol = tol;
    opts.seed = seed;
    const SpectralDecomposition d = eig_topk(op, n, 1, opts);
    return std::abs(d.values[0]);
}

// ---------------------------------------------------------------------------

AlignmentResult procrustes(const Eigen::MatrixXd& u, const Eigen::MatrixXd& u_hat) {
    if (u.cols() != u_hat.cols() || u.rows() != u_hat.rows())
        throw std::invalid_argument("procrustes: shape mismatch");
    const Eigen::Index r = u.cols();
    AlignmentResult out;
    out.signs = Eigen::VectorXd::Ones(r);
    out.positive.resize(static_cast<std::size_t>(r));
    std::iota(out.positive.begin(), out.positive.end(), std::size_t{0});
    if (r == 0) {
        out.w.resize(0, 0);
        return out;
    }

    const Eigen::MatrixXd cross = u.transpose() * u_hat;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = 1e-12 * std::max(1.0, sv[0]);
    Eigen::Index rank = 0;
    while (rank < r && sv[rank] > cutoff) ++rank;

    const Eigen::MatrixXd& left = svd.matrixU();
    const Eigen::MatrixXd& right = svd.matrixV();
    out.w = left.leftCols(rank) * right.leftCols(rank).transpose();
    if (rank < r) {
        // Null-space completion: the orthogonal map between the two null spaces
        // closest to the identity.
        const Eigen::MatrixXd nl = left.rightCols(r - rank);
        const Eigen::MatrixXd nr = right.rightCols(r - rank);
        const Eigen::MatrixXd c = nl.transpose() * nr;
        Eigen::JacobiSVD<Eigen::MatrixXd> csvd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::MatrixXd polar = csvd.matrixU() * csvd.matrixV().transpose();
        if (csvd.singularValues().size() > 0 &&
            csvd.singularValues()[csvd.singularValues().size() - 1] <= 1e-12)
            polar = Eigen::MatrixXd::Identity(r - rank, r - rank);
        out.w += nl * polar * nr.transpose();
    }
    out.frobenius_misfit = (u_hat - u * out.w).norm();
    return out;
}

AlignmentResult block_signed_procrustes(const Eigen::MatrixXd& u, const Eigen::VectorXd& lambda,
                                        const Eigen::MatrixXd& u_hat, const Eigen::VectorXd& lambda_hat) {
    const Eigen::Index r = u.cols();
    if (u_hat.cols() != r || lambda.size() != r || lambda_hat.size() != r || u.rows() != u_hat.rows())
        throw std::invalid_argument("block_signed_procrustes: shape mismatch");

    AlignmentResult out;
    out.signs.resize(r);
    for (Eigen::Index c = 0; c < r; ++c) {
        const bool pos = lambda[c] >= 0;
        if (pos != (lambda_hat[c] >= 0))
            throw std::invalid_argument("block_signed_procrustes: sign pattern of eigenvalues differs at column " +
                                        std::to_string(c));
        out.signs[c] = pos ? 1.0 : -1.0;
        (pos ? out.positive : out.negative).push_back(static_cast<std::size_t>(c));
    }

    out.w = Eigen::MatrixXd::Zero(r, r);
    for (const auto* block : {&out.positive, &out.negative}) {
        if (block->empty()) continue;
        const auto b = static_cast<Eigen::Index>(block->size());
        Eigen::MatrixXd ub(u.rows(), b), uhb(u.rows(), b);
        for (Eigen::Index c = 0; c < b; ++c) {
            ub.col(c) = u.col(static_cast<Eigen::Index>((*block)[static_cast<std::size_t>(c)]));
            uhb.col(c) = u_hat.col(static_cast<Eigen::Index>((*block)[static_cast<std::size_t>(c)]));
        }
        const AlignmentResult sub = procrustes(ub, uhb);
        for (Eigen::Index a = 0; a < b; ++a)
            for (Eigen::Index c = 0; c < b; ++c)
                out.w(static_cast<Eigen::Index>((*block)[static_cast<std::size_t>(a)]),
                      static_cast<Eigen::Index>((*block)[static_cast<std::size_t>(c)])) = sub.w(a, c);
    }
    out.frobenius_misfit = (u_hat - u * out.w).norm();
    return out;
}

double delta2_distance(std::span<const double> v, std::span<const double> w) {
    const std::size_t len = std::max(v.size(), w.size());
    std::vector<double> a(v.begin(), v.end()), b(w.begin(), w.end());
    a.resize(len, 0.0);
    b.resize(len, 0.0);
    std::sort(a.begin(), a.end(), std::greater<>());
    std::sort(b.begin(), b.end(), std::greater<>());
    double s = 0;
    for (std::size_t k = 0; k < len; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

Eigen::MatrixXd inverse_sqrt_psd(const Eigen::MatrixXd& s, double floor_rel) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
    const double floor = floor_rel * std::max(s.trace(), 0.0);
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(floor);
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = d[i] > 0 ? 1.0 / std::sqrt(d[i]) : 0.0;
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace lpg
