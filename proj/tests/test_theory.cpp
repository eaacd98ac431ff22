#include <doctest.h>

#include "lpg/linalg.hpp"
#include "lpg/model.hpp"
#include "lpg/rng.hpp"
#include "lpg/theory.hpp"

#include <cmath>
#include <numbers>

using namespace lpg;

TEST_CASE("varsigma and vartheta") {
    const double logn = std::log(1000.0);
    CHECK(varsigma(0, 1000, 0) == doctest::Approx(56 * std::sqrt(std::numbers::e) * std::sqrt(logn)));
    CHECK(varsigma(1, 1000, 0.4) == doctest::Approx(339.7).epsilon(5e-4));
    CHECK(varsigma(2, 100, 0.5) > varsigma(1, 100, 0.5));
    CHECK(vartheta(0, 0, 50) == 0);
    CHECK(vartheta(2, 5, 1000) == doctest::Approx(24.80).epsilon(5e-4));
    CHECK(vartheta(1.3, 8, 77) - vartheta(1.3, 7, 77) == doctest::Approx(std::log(9.0)));
}

TEST_CASE("data-driven rank rule") {
    SUBCASE("extreme gap") {
        const std::vector<double> l{1e9, 0};
        const auto rep = select_rank_datadriven(l, 1, 10, 0.5);
        CHECK(rep.admissible_set() == std::vector<std::size_t>{1});
        CHECK(rep.rhat == 1u);
    }
    SUBCASE("equal eigenvalues") {
        const std::vector<double> l(10, 5.0);
        const auto rep = select_rank_datadriven(l, 1, 100, 0.5);
        CHECK(rep.admissible_set().empty());
        CHECK(!rep.rhat);
        CHECK(rep.fallback());
        CHECK(rep.value() == 1);
    }
    SUBCASE("matches a brute-force scan on an observed spectrum") {
        const auto lat = sample_latents(UniformSphere{3}, 2000, 3);
        const auto p = build_p(lat, LaplaceKernel{1.0}, 0.4);
        const auto a = sample_adjacency(p, 5);
        MatVec op = [&a](std::span<const double> x, std::span<double> y) { a.apply(x, y); };
        const auto d = eig_topk(op, 2000, 65);
        std::vector<double> l(d.values.data(), d.values.data() + d.values.size());
        const auto rep = select_rank_datadriven(l, 1, 2000, 0.4, 50);
        const double s = varsigma(1, 2000, 0.4), lg = std::log(2000.0);
        for (std::size_t r = 1; r <= 50; ++r) {
            const double gap = std::abs(l[r - 1]) - std::abs(l[r]);
            const bool c1 = gap >= std::max(4 * s, 16.0 / 3.0 * 3 * lg) + 2 * s;
            const bool c2 = std::abs(l[r - 1]) >= std::max(16 * 3 * lg + 64 * s * s / gap, vartheta(2, r, 2000)) + s;
            CHECK(rep.admissible[r - 1] == (c1 && c2));
        }
        // The required gap exceeds the whole spectrum at this size.
        CHECK(!rep.rhat);
    }
    SUBCASE("scan horizon is min(n - 1, 64)") {
        std::vector<double> l(100, 1.0);
        CHECK(select_rank_datadriven(l, 1, 1000, 0.5).gaps.size() == 64);
        CHECK(select_rank_test(l, 1, 20).gaps.size() == 19);
    }
}

TEST_CASE("test rank rule") {
    const std::vector<double> l{100, 1, 0.5};
    const auto rep = select_rank_test(l, 1.0, 3);
    CHECK(rep.rhat == 1u);
    CHECK(rep.gaps[0] == 99);
    for (std::size_t j = 1; j <= rep.thresholds.size(); ++j) {
        const double lg = std::log(3.0);
        CHECK(rep.thresholds[j - 1] ==
              doctest::Approx(std::max({std::pow(lg, 1.75), std::sqrt(double(j)) * std::pow(lg, 0.75), 1.0})));
    }
    SUBCASE("moduli are used for negative eigenvalues") {
        const std::vector<double> m{300, -200, 5, 4};
        const auto r = select_rank_test(m, 4.0, 1000);
        CHECK(r.gaps[0] == 100);
        CHECK(r.gaps[1] == 195);
        CHECK(r.rhat == 2u);
    }
    SUBCASE("truncation beyond rhat + 1 leaves rhat unchanged") {
        const std::vector<double> m{300, 200, 150, 40, 39, 38, 37};
        const auto full = select_rank_test(m, 4.0, 1000);
        REQUIRE(full.rhat);
        const std::vector<double> cut(m.begin(), m.begin() + static_cast<long>(*full.rhat) + 1);
        CHECK(select_rank_test(cut, 4.0, 1000).rhat == full.rhat);
    }
}

TEST_CASE("coherence") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(10, 3);
    CHECK(coherence(id) == doctest::Approx(10.0 / 3.0));
    const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(16, 1, 0.25);
    CHECK(coherence(flat) == doctest::Approx(1.0));
}

TEST_CASE("psd coherence check") {
    SUBCASE("rank one equality") {
        const auto s = sample_latents(StandardNormal{2}, 4, 1);
        const auto d = eig_dense(build_p(s, ConstantKernel{1.0}, 0.5).dense());
        const auto chk = psd_coherence_check(d, 1, 0.5);
        CHECK(chk.lhs == doctest::Approx(std::sqrt(0.5)));
        CHECK(chk.rhs == doctest::Approx(std::sqrt(0.5)));
        CHECK(chk.holds);
    }
    SUBCASE("gaussian kernel at every r up to 50") {
        const auto s = sample_latents(StandardNormal{2}, 500, 2);
        const auto d = eig_dense(build_p(s, GaussianKernel{0.4}, 0.4).dense());
        for (std::size_t r = 1; r <= 50; ++r) CHECK(psd_coherence_check(d, r, 0.4).holds);
    }
    SUBCASE("laplace kernel on the sphere") {
        const auto s = sample_latents(UniformSphere{3}, 400, 3);
        const auto d = eig_dense(build_p(s, LaplaceKernel{1.0}, 0.7).dense());
        for (std::size_t r : {1, 4, 9, 16, 40}) CHECK(psd_coherence_check(d, r, 0.7).holds);
    }
    SUBCASE("indefinite kernel is refused") {
        Eigen::MatrixXd pts(3, 2);
        pts << 0.8, 0.4, 0.8, -0.4, 0.6, 0.3;
        Eigen::Matrix2d m;
        m << 1, 0, 0, -1;
        const auto d = eig_dense(build_p(sample_latents(PointCloud{pts}, 3, 0), DotProductKernel{m}, 1.0).dense());
        CHECK_THROWS_AS(psd_coherence_check(d, 1, 1.0), std::invalid_argument);
    }
}

TEST_CASE("coherence versus the operator spectrum") {
    const auto s = sample_latents(UniformSphere{3}, 2000, 4);
    const auto p = build_p(s, LaplaceKernel{1.0}, 0.4);
    MatVec op = [&p](std::span<const double> x, std::span<double> y) { p.apply(x, y); };
    const auto d = eig_topk(op, 2000, 10);
    const auto mu = nystrom_spectrum(LaplaceKernel{1.0}, UniformSphere{3}, 2000, 10, 99);
    for (std::size_t r : {1, 4, 9}) {
        // The bound needs λ_r ≥ nρμ_r / 2, which is what admissibility of r buys.
        REQUIRE(d.values[static_cast<Eigen::Index>(r) - 1] >= 0.5 * 2000 * 0.4 * mu[r - 1]);
        CHECK(coherence(d.vectors.leftCols(static_cast<Eigen::Index>(r))) <= 2.0 / (double(r) * mu[r - 1]));
    }
}

TEST_CASE("eigenvalue consistency") {
    const auto s = sample_latents(StandardNormal{2}, 300, 1);
    const auto d = eig_dense(build_p(s, ConstantKernel{0.7}, 0.5).dense(), 3);
    const std::vector<double> mu{0.7, 0, 0};
    const std::vector<double> lam(d.values.data(), d.values.data() + 3);
    const auto rep = eigenvalue_consistency(lam, mu, 300, 0.5, 1.0);
    CHECK(rep.sup_deviation < 1e-12);
    CHECK(rep.pass);
    CHECK(rep.bound == doctest::Approx(2 * std::sqrt(2.0) * std::sqrt(std::log(300.0) / 300)));
}

TEST_CASE("bound certificate with zero noise") {
    const auto s = sample_latents(UniformSphere{3}, 60, 1);
    const Eigen::MatrixXd m = 50.0 * build_p(s, LaplaceKernel{1.0}, 0.4).dense();
    const auto c = bound_certificate(m, Eigen::MatrixXd::Zero(60, 60), 1);
    CHECK(c.psi0 < 1e-12);
    CHECK(c.psi1 == 0);
    CHECK(c.eta == 0);
    CHECK(c.psi_star == 0);
    CHECK(c.r0 < 1e-20);
    CHECK(c.r1 < 1e-12);
    CHECK(c.r2 < 1e-12);
    CHECK(c.lhs < 1e-12);
    CHECK(c.psd);
}
