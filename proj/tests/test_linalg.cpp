#include <doctest.h>

#include "lpg/error.hpp"
#include "lpg/linalg.hpp"
#include "lpg/model.hpp"
#include "lpg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace lpg;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    CounterRng g(seed, Stream::latents);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(g);
    return m;
}

Eigen::MatrixXd random_orthogonal(Eigen::Index r, std::uint64_t seed) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(r, r, seed));
    return qr.householderQ() * Eigen::MatrixXd::Identity(r, r);
}

Eigen::MatrixXd random_orthonormal(Eigen::Index n, Eigen::Index r, std::uint64_t seed) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(n, r, seed));
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
}

void check_modulus_order(const SpectralDecomposition& d) {
    for (Eigen::Index j = 1; j < d.values.size(); ++j) REQUIRE(std::abs(d.values[j - 1]) >= std::abs(d.values[j]));
    const Eigen::MatrixXd g = d.vectors.transpose() * d.vectors;
    CHECK((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= 1e-10);
}

}  // namespace

TEST_CASE("dense eigensolver") {
    SUBCASE("diagonal") {
        Eigen::MatrixXd s = Eigen::Vector3d(3, -5, 1).asDiagonal();
        const auto d = eig_dense(s);
        CHECK(d.values[0] == -5);
        CHECK(d.values[1] == 3);
        CHECK(d.values[2] == 1);
        check_modulus_order(d);
    }
    SUBCASE("rank one") {
        const auto d = eig_dense(Eigen::MatrixXd::Constant(4, 4, 0.5));
        CHECK(d.values[0] == doctest::Approx(2));
        for (int j = 1; j < 4; ++j) CHECK(std::abs(d.values[j]) < 1e-14);
    }
    SUBCASE("ties broken by signed value") {
        Eigen::MatrixXd s = Eigen::Vector4d(-2, 1, 2, -1).asDiagonal();
        const auto d = eig_dense(s);
        CHECK(d.values[0] == 2);
        CHECK(d.values[1] == -2);
        CHECK(d.values[2] == 1);
        CHECK(d.values[3] == -1);
    }
    SUBCASE("reconstruction") {
        const Eigen::MatrixXd m = random_matrix(50, 50, 3);
        const Eigen::MatrixXd s = m + m.transpose();
        const auto d = eig_dense(s);
        check_modulus_order(d);
        const Eigen::MatrixXd rec = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
        CHECK((rec - s).cwiseAbs().maxCoeff() <= 1e-8 * operator_norm(s));
        CHECK(d.residuals.maxCoeff() <= 1e-10 * operator_norm(s));
    }
    SUBCASE("guards") {
        Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
        s(0, 1) = 1e-9;
        CHECK_THROWS_AS(eig_dense(s), std::invalid_argument);
    }
}

TEST_CASE("lanczos agrees with the dense oracle") {
    const auto lat = sample_latents(UniformSphere{3}, 500, 8);
    const auto p = build_p(lat, LaplaceKernel{1.0}, 0.4);
    const Eigen::MatrixXd pd = p.dense();
    const auto dense = eig_dense(pd);
    LanczosOptions opts;
    opts.seed = 5;
    const auto lz = eig_topk_lanczos(matvec_of(pd), 500, 10, opts);
    CHECK(lz.method == SolverMethod::lanczos);
    check_modulus_order(lz);
    for (int j = 0; j < 10; ++j) {
        // Only compare where the spectrum separates the pair.
        if (std::abs(dense.values[j]) - std::abs(dense.values[j + 1]) < 1e-6 * std::abs(dense.values[0]) ||
            (j > 0 && std::abs(dense.values[j - 1]) - std::abs(dense.values[j]) < 1e-6 * std::abs(dense.values[0])))
            continue;
        CHECK(std::abs(lz.values[j] - dense.values[j]) <= 1e-8 * std::abs(dense.values[j]));
    }
    CHECK(lz.residuals.maxCoeff() <= 1e-10 * std::abs(dense.values[0]) * 1.0001);

    const auto again = eig_topk_lanczos(matvec_of(pd), 500, 10, opts);
    CHECK(again.values == lz.values);
    CHECK(again.vectors == lz.vectors);

    // Packed-P and adjacency operators.
    MatVec op = [&p](std::span<const double> x, std::span<double> y) { p.apply(x, y); };
    const auto packed = eig_topk_lanczos(op, 500, 10, opts);
    CHECK(std::abs(packed.values[0] - dense.values[0]) <= 1e-9 * dense.values[0]);
    const auto a = sample_adjacency(p, 1);
    MatVec aop = [&a](std::span<const double> x, std::span<double> y) { a.apply(x, y); };
    const auto ad = eig_dense(a.dense());
    const auto al = eig_topk(aop, 500, 12, opts);
    for (int j = 0; j < 12; ++j)
        if (std::abs(ad.values[j]) - std::abs(ad.values[j + 1]) > 1e-6 * ad.values[0] &&
            (j == 0 || std::abs(ad.values[j - 1]) - std::abs(ad.values[j]) > 1e-6 * ad.values[0]))
            CHECK(std::abs(al.values[j] - ad.values[j]) <= 1e-8 * std::abs(ad.values[j]));
}

TEST_CASE("lanczos on a rank-one operator") {
    const std::size_t n = 400;
    const Eigen::MatrixXd s = Eigen::MatrixXd::Constant(n, n, 0.5);
    const auto d = eig_topk_lanczos(matvec_of(s), n, 3);
    CHECK(d.values[0] == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(std::abs(d.values[1]) < 1e-8);
    CHECK(std::abs(d.values[2]) < 1e-8);
    CHECK_THROWS_AS(eig_topk_lanczos(matvec_of(s), n, 101), std::invalid_argument);
}

TEST_CASE("lanczos reports non-convergence") {
    const Eigen::MatrixXd m = random_matrix(400, 400, 12);
    const Eigen::MatrixXd s = m + m.transpose();
    LanczosOptions opts;
    opts.max_restarts = 0;
    opts.subspace = 30;
    try {
        eig_topk_lanczos(matvec_of(s), 400, 20, opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.achieved_residuals().size() == 20);
    }
}

TEST_CASE("norms") {
    CHECK(matrix_norms(Eigen::MatrixXd::Identity(3, 3)).two_to_inf == 1);
    Eigen::MatrixXd m(2, 2);
    m << 3, 4, 0, 1;
    const auto nm = matrix_norms(m);
    CHECK(nm.two_to_inf == 5);
    CHECK(nm.max_abs == 4);
    CHECK(nm.inf_row_sum == 7);
    CHECK(nm.frobenius == doctest::Approx(std::sqrt(26.0)));

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::MatrixXd a = random_matrix(30, 8, 100 + seed), b = random_matrix(8, 5, 200 + seed);
        const double lhs = two_to_inf(a * b);
        const double inf_norm = a.cwiseAbs().rowwise().sum().maxCoeff();
        CHECK(lhs <= std::min(two_to_inf(a) * operator_norm(b), inf_norm * two_to_inf(b)) + 1e-12);
    }
}

TEST_CASE("spectral norm") {
    Eigen::MatrixXd s = Eigen::Vector3d(3, -5, 1).asDiagonal();
    CHECK(spectral_norm(matvec_of(s), 3) == doctest::Approx(5).epsilon(1e-10));
    const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(100, 100);
    CHECK(spectral_norm(matvec_of(z), 100) == 0);

    const auto lat = sample_latents(UniformSphere{3}, 300, 3);
    const auto p = build_p(lat, LaplaceKernel{1.0}, 0.4);
    const Eigen::MatrixXd e = sample_adjacency(p, 2).dense() - p.dense();
    const auto d = eig_dense(e, 1);
    CHECK(std::abs(spectral_norm(matvec_of(e), 300) - std::abs(d.values[0])) <= 1e-6);
}

TEST_CASE("weyl inequality for A and P") {
    const auto lat = sample_latents(UniformSphere{3}, 400, 6);
    const auto p = build_p(lat, LaplaceKernel{1.0}, 0.4);
    const Eigen::MatrixXd pd = p.dense(), ad = sample_adjacency(p, 4).dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sp(pd, Eigen::EigenvaluesOnly), sa(ad, Eigen::EigenvaluesOnly);
    const double norm_e = spectral_norm(matvec_of(ad - pd), 400);
    CHECK((sa.eigenvalues() - sp.eigenvalues()).cwiseAbs().maxCoeff() <= norm_e + 1e-8);
}

TEST_CASE("procrustes") {
    const Eigen::MatrixXd u = random_orthonormal(40, 4, 1);
    SUBCASE("identity") {
        const auto res = procrustes(u, u);
        CHECK((res.w - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("exact rotation") {
        const Eigen::MatrixXd r = random_orthogonal(4, 2);
        const auto res = procrustes(u, u * r);
        CHECK((res.w - r).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("optimality against random rotations") {
        const Eigen::MatrixXd uh = random_orthonormal(40, 4, 3);
        const auto res = procrustes(u, uh);
        CHECK((res.w.transpose() * res.w - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
        for (std::uint64_t k = 0; k < 100; ++k) {
            const Eigen::MatrixXd q = random_orthogonal(4, 1000 + k);
            CHECK(res.frobenius_misfit <= (uh - u * q).norm() + 1e-12);
        }
    }
    SUBCASE("degenerate cross product") {
        // Û shares one direction with U and is orthogonal in the other.
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 2), b = Eigen::MatrixXd::Zero(4, 2);
        a(0, 0) = 1;
        a(1, 1) = 1;
        b(0, 0) = 1;
        b(2, 1) = 1;
        const auto res = procrustes(a, b);
        CHECK((res.w.transpose() * res.w - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((res.w - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(procrustes(a, b).w == res.w);
    }
}

TEST_CASE("block signed procrustes") {
    const Eigen::MatrixXd u = random_orthonormal(30, 3, 4);
    SUBCASE("all positive reduces to procrustes") {
        const Eigen::MatrixXd uh = random_orthonormal(30, 3, 5);
        const Eigen::Vector3d l(3, 2, 1);
        const auto b = block_signed_procrustes(u, l, uh, l);
        const auto p = procrustes(u, uh);
        CHECK((b.w - p.w).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(b.negative.empty());
        CHECK(b.signs == Eigen::Vector3d(1, 1, 1));
    }
    SUBCASE("mixed signs identity") {
        const Eigen::Vector3d l(3, -2, 1);
        const auto b = block_signed_procrustes(u, l, u, l);
        CHECK((b.w - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(b.signs == Eigen::Vector3d(1, -1, 1));
        CHECK(b.positive == std::vector<std::size_t>{0, 2});
        CHECK(b.negative == std::vector<std::size_t>{1});
    }
    SUBCASE("block structure and mismatch") {
        const Eigen::MatrixXd uh = random_orthonormal(30, 3, 6);
        const Eigen::Vector3d l(3, -2, 1);
        const auto b = block_signed_procrustes(u, l, uh, l);
        CHECK(b.w(0, 1) == 0);
        CHECK(b.w(1, 2) == 0);
        CHECK_THROWS_AS(block_signed_procrustes(u, l, uh, Eigen::Vector3d(3, 2, 1)), std::invalid_argument);
    }
    SUBCASE("indefinite dot product instance") {
        // κ(x, y) = xᵀ diag(1, -1) y with |x₂| = 0.6 x₁ stays inside [0, 1].
        const std::size_t n = 300;
        CounterRng g(8, Stream::latents);
        Eigen::MatrixXd pts(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = g.uniform();
            pts(i, 0) = 0.6 + 0.2 * t;
            pts(i, 1) = (i % 2 ? 0.6 : -0.6) * pts(i, 0);
        }
        Eigen::Matrix2d m;
        m << 1, 0, 0, -1;
        const auto p = build_p(sample_latents(PointCloud{pts}, n, 0), DotProductKernel{m}, 1.0);
        const Eigen::MatrixXd pd = p.dense(), e = sample_adjacency(p, 3).dense() - pd;
        const auto dp = eig_dense(pd, 3), da = eig_dense(pd + e, 2);
        REQUIRE(dp.values[0] > 0);
        REQUIRE(dp.values[1] < 0);
        const auto b = block_signed_procrustes(dp.vectors.leftCols(2), dp.values.head(2), da.vectors, da.values);
        const double delta = std::abs(dp.values[1]) - std::abs(dp.values[2]);
        const double norm_e = spectral_norm(matvec_of(e), n);
        CHECK((da.vectors * b.w.transpose() - dp.vectors.leftCols(2)).norm() <= 2 * std::sqrt(4.0) * norm_e / delta);
    }
}

TEST_CASE("delta2 distance") {
    const std::vector<double> a{3, 1}, b{1, 3}, c{2, 0}, d{1, 1};
    CHECK(delta2_distance(a, b) == 0);
    CHECK(delta2_distance(c, d) == 2);
    CHECK(delta2_distance(a, a) == 0);
    const std::vector<double> e{1, 2, 3};
    const std::vector<double> f{3};
    CHECK(delta2_distance(e, f) == doctest::Approx(5));

    CounterRng g(3, Stream::latents);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t lv = 1 + g() % 7, lw = 1 + g() % 7;
        std::vector<double> v(lv), w(lw);
        for (auto& x : v) x = g.uniform() * 4 - 2;
        for (auto& x : w) x = g.uniform() * 4 - 2;
        std::vector<double> pv = v, pw = w;
        const std::size_t len = std::max(lv, lw);
        pv.resize(len, 0.0);
        pw.resize(len, 0.0);
        std::vector<std::size_t> perm(len);
        std::iota(perm.begin(), perm.end(), 0);
        double best = 1e300;
        do {
            double s = 0;
            for (std::size_t k = 0; k < len; ++k) s += (pv[k] - pw[perm[k]]) * (pv[k] - pw[perm[k]]);
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(delta2_distance(v, w) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("inverse square root") {
    const Eigen::MatrixXd m = random_matrix(5, 5, 2);
    const Eigen::MatrixXd s = m * m.transpose() + Eigen::MatrixXd::Identity(5, 5);
    const Eigen::MatrixXd r = inverse_sqrt_psd(s);
    CHECK((r * s * r - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
}
