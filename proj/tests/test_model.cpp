#include <doctest.h>

#include "lpg/linalg.hpp"
#include "lpg/model.hpp"
#include "lpg/rng.hpp"

#include <cmath>

using namespace lpg;

TEST_CASE("point cloud with matching n is returned verbatim") {
    Eigen::MatrixXd c(2, 1);
    c << 0, 1;
    const auto s = sample_latents(PointCloud{c}, 2, 9);
    CHECK(s.coords == c);
}

TEST_CASE("sphere samples have unit norm") {
    const auto s = sample_latents(UniformSphere{3}, 1000, 1);
    CHECK(s.coords.rows() == 1000);
    CHECK(s.support == Support::sphere);
    for (Eigen::Index i = 0; i < s.coords.rows(); ++i) REQUIRE(std::abs(s.coords.row(i).norm() - 1.0) <= 1e-12);
}

TEST_CASE("standard normal sample mean") {
    const auto s = sample_latents(StandardNormal{2}, 100000, 3);
    const Eigen::RowVectorXd mean = s.coords.colwise().mean();
    CHECK(std::abs(mean[0]) < 0.02);
    CHECK(std::abs(mean[1]) < 0.02);
    const auto t = sample_latents(StandardNormal{2}, 100000, 3);
    CHECK(s.coords == t.coords);
}

TEST_CASE("invalid latent dimension is rejected") {
    CHECK_THROWS(sample_latents(UniformSphere{0}, 10, 1));
    CHECK_THROWS(sample_latents(StandardNormal{2}, 1, 1));
}

TEST_CASE("pair placement") {
    const auto base = sample_latents(UniformSphere{3}, 20, 5);
    SUBCASE("eps zero copies the anchor") {
        const auto s = place_pair_at_distance(base, 0, 19, 0.0, 11);
        CHECK(s.coords.row(19) == s.coords.row(0));
        const auto p = build_p(s, LaplaceKernel{1.0}, 0.4);
        for (std::size_t k = 0; k < 20; ++k) CHECK(p(0, k) == p(19, k));
    }
    SUBCASE("sphere chord distance") {
        const auto s = place_pair_at_distance(base, 0, 19, 0.3, 11);
        CHECK(std::abs(s.coords.row(19).norm() - 1.0) <= 1e-12);
        CHECK(std::abs((s.coords.row(19) - s.coords.row(0)).norm() - 0.3) <= 1e-10);
        for (Eigen::Index i = 1; i < 19; ++i) CHECK(s.coords.row(i) == base.coords.row(i));
    }
    SUBCASE("sphere infeasible distance") {
        CHECK_THROWS(place_pair_at_distance(base, 0, 19, 2.5, 1));
        CHECK_THROWS(place_pair_at_distance(base, 3, 3, 0.1, 1));
    }
    SUBCASE("planar placement is deterministic") {
        const auto flat = sample_latents(StandardNormal{2}, 10, 5);
        const auto a = place_pair_at_distance(flat, 0, 9, 1.0, 77);
        const auto b = place_pair_at_distance(flat, 0, 9, 1.0, 77);
        CHECK(a.coords.row(9) == b.coords.row(9));
        CHECK(std::abs((a.coords.row(9) - a.coords.row(0)).norm() - 1.0) <= 1e-10);
    }
}

TEST_CASE("build_p closed forms") {
    SUBCASE("constant kernel") {
        const auto s = sample_latents(StandardNormal{2}, 4, 1);
        const auto p = build_p(s, ConstantKernel{1.0}, 0.5);
        CHECK(p.dense() == Eigen::MatrixXd::Constant(4, 4, 0.5));
        const auto d = eig_dense(p.dense());
        CHECK(d.values[0] == doctest::Approx(2.0));
        for (int k = 1; k < 4; ++k) CHECK(std::abs(d.values[k]) < 1e-12);
    }
    SUBCASE("laplace diagonal and log 2 distance") {
        Eigen::MatrixXd c(2, 1);
        c << 0, std::log(2.0);
        const auto p = build_p(sample_latents(PointCloud{c}, 2, 0), LaplaceKernel{1.0}, 1.0);
        CHECK(p(0, 0) == 1.0);
        CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
        const auto q = build_p(sample_latents(PointCloud{c}, 2, 0), LaplaceKernel{1.0}, 0.3);
        CHECK(q(1, 1) == 0.3);
    }
    SUBCASE("range violations") {
        Eigen::MatrixXd c(2, 2);
        c << 1, 0, 0, 1;
        const auto s = sample_latents(PointCloud{c}, 2, 0);
        CHECK_THROWS(build_p(s, DotProductKernel{2.0 * Eigen::MatrixXd::Identity(2, 2)}, 1.0));
        CHECK_THROWS(build_p(s, LaplaceKernel{1.0}, 0.0));
        CHECK_THROWS(build_p(s, LaplaceKernel{1.0}, 1.5));
    }
    SUBCASE("max entry bounded by rho and symmetric") {
        const auto s = sample_latents(UniformSphere{3}, 50, 2);
        const auto p = build_p(s, GaussianKernel{0.4}, 0.7);
        CHECK(p.max_entry() <= 0.7);
        const auto d = p.dense();
        CHECK(d == d.transpose());
    }
}

TEST_CASE("adjacency sampling") {
    SUBCASE("degenerate probabilities reproduce P") {
        Eigen::MatrixXd c(6, 1);
        c << 0, 0, 1, 1, 0, 1;
        const auto p = build_p(sample_latents(PointCloud{c}, 6, 0), DotProductKernel{Eigen::MatrixXd::Identity(1, 1)}, 1.0);
        const auto a = sample_adjacency(p, 3);
        CHECK(a.dense() == p.dense());
        const auto h = sample_adjacency(p, 3, true);
        CHECK(h.dense().diagonal().isZero());
    }
    SUBCASE("fair coin mean") {
        const auto s = sample_latents(StandardNormal{1}, 200, 0);
        const auto p = build_p(s, ConstantKernel{1.0}, 0.5);
        double hits = 0;
        for (std::uint64_t rep = 0; rep < 400; ++rep) hits += sample_adjacency(p, replicate_seed(99, rep))(1, 2);
        CHECK(std::abs(hits / 400 - 0.5) <= 0.08);
    }
    SUBCASE("determinism, symmetry and matvec") {
        const auto s = sample_latents(UniformSphere{3}, 130, 4);
        const auto p = build_p(s, LaplaceKernel{1.0}, 0.4);
        const auto a = sample_adjacency(p, 17);
        CHECK(a == sample_adjacency(p, 17));
        CHECK(!(a == sample_adjacency(p, 18)));
        const Eigen::MatrixXd d = a.dense();
        CHECK(d == d.transpose());
        Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(130, -1, 2), y(130), z(130);
        a.apply(as_span(x), as_span(y));
        CHECK((y - d * x).cwiseAbs().maxCoeff() < 1e-12);
        p.apply(as_span(x), as_span(z));
        CHECK((z - p.dense() * x).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(a.average_degree() == doctest::Approx(d.sum() / 130.0));
        const auto edges = a.edges();
        CHECK(Adjacency::from_edges(130, edges, false) == a);
    }
}

TEST_CASE("nystrom spectrum closed forms") {
    const auto c = nystrom_spectrum(ConstantKernel{0.3}, StandardNormal{2}, 50, 3, 1);
    CHECK(c[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(std::abs(c[1]) < 1e-10);
    Eigen::MatrixXd pts(2, 2);
    pts << 1, 0, 0, 1;
    const auto d = nystrom_spectrum(DotProductKernel{Eigen::MatrixXd::Identity(2, 2)}, PointCloud{pts}, 2, 2, 1);
    CHECK(d[0] == doctest::Approx(0.5));
    CHECK(d[1] == doctest::Approx(0.5));
}
