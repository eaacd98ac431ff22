#include "lpg/error.hpp"
#include "lpg/inference.hpp"
#include "lpg/linalg.hpp"
#include "lpg/lptest.hpp"
#include "lpg/model.hpp"
#include "lpg/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace lpg;

namespace {

KernelSpec make_kernel(const std::string& name, double scale) {
    if (name == "laplace") return LaplaceKernel{scale};
    if (name == "gaussian") return GaussianKernel{scale};
    if (name == "constant") return ConstantKernel{scale};
    throw std::invalid_argument("kernel must be laplace, gaussian or constant");
}

LatentSample as_sample(const Eigen::MatrixXd& x) {
    LatentSample s;
    s.coords = x;
    return s;
}

Adjacency from_dense(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("adjacency must be square");
    bool loops = false;
    for (Eigen::Index i = 0; i < a.rows(); ++i) loops = loops || a(i, i) != 0;
    Adjacency out(static_cast<std::size_t>(a.rows()), !loops);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            if (a(i, j) != a(j, i)) throw std::invalid_argument("adjacency must be symmetric");
            if (a(i, j) != 0 && a(i, j) != 1) throw std::invalid_argument("adjacency entries must be 0 or 1");
            if (a(i, j) != 0) out.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    return out;
}

py::dict report_dict(const RankReport& r) {
    py::dict d;
    d["rhat"] = r.value();
    d["fallback"] = r.fallback();
    d["gaps"] = r.gaps;
    d["thresholds"] = r.thresholds;
    d["admissible"] = r.admissible_set();
    return d;
}

}  // namespace

PYBIND11_MODULE(pylpg, m) {
    m.doc() = "Spectral inference for latent position random graphs";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def(
        "sample_latents",
        [](const std::string& kind, std::size_t n, int dim, std::uint64_t seed) {
            if (kind == "sphere") return sample_latents(UniformSphere{dim}, n, seed).coords;
            if (kind == "normal") return sample_latents(StandardNormal{dim}, n, seed).coords;
            throw std::invalid_argument("kind must be sphere or normal");
        },
        py::arg("kind"), py::arg("n"), py::arg("dim") = 3, py::arg("seed") = 0);

    m.def(
        "edge_probabilities",
        [](const Eigen::MatrixXd& x, const std::string& kernel, double scale, double rho) {
            return build_p(as_sample(x), make_kernel(kernel, scale), rho).dense();
        },
        py::arg("latents"), py::arg("kernel") = "laplace", py::arg("scale") = 1.0, py::arg("rho") = 1.0);

    m.def(
        "sample_adjacency",
        [](const Eigen::MatrixXd& x, const std::string& kernel, double scale, double rho, std::uint64_t seed,
           bool hollow) {
            return sample_adjacency(build_p(as_sample(x), make_kernel(kernel, scale), rho), seed, hollow).dense();
        },
        py::arg("latents"), py::arg("kernel") = "laplace", py::arg("scale") = 1.0, py::arg("rho") = 1.0,
        py::arg("seed") = 0, py::arg("hollow") = false);

    m.def(
        "spectrum",
        [](const Eigen::MatrixXd& s, std::size_t k, std::uint64_t seed) {
            if (s.rows() != s.cols()) throw std::invalid_argument("matrix must be square");
            const auto n = static_cast<std::size_t>(s.rows());
            MatVec op = [&s](std::span<const double> x, std::span<double> y) {
                Eigen::Map<Eigen::VectorXd>(y.data(), s.rows()) =
                    s * Eigen::Map<const Eigen::VectorXd>(x.data(), s.rows());
            };
            LanczosOptions lo;
            lo.seed = seed;
            const SpectralDecomposition d = n <= 400 ? eig_dense(s, k) : eig_topk(op, n, k, lo);
            return py::make_tuple(d.values, d.vectors, d.residuals);
        },
        py::arg("matrix"), py::arg("k"), py::arg("seed") = 0,
        "Top-k eigenpairs by decreasing modulus: (values, vectors, residuals).");

    m.def(
        "select_rank_test",
        [](const std::vector<double>& lam, double d_ave, std::size_t n, std::size_t jmax) {
            return report_dict(select_rank_test(lam, d_ave, n, jmax));
        },
        py::arg("eigenvalues"), py::arg("d_ave"), py::arg("n"), py::arg("jmax") = 0);

    m.def("varsigma", &varsigma, py::arg("nu"), py::arg("n"), py::arg("rho"));
    m.def("vartheta", &vartheta, py::arg("c"), py::arg("r"), py::arg("n"));
    m.def("two_to_inf", [](const Eigen::MatrixXd& x) { return two_to_inf(x); });
    m.def(
        "procrustes", [](const Eigen::MatrixXd& u, const Eigen::MatrixXd& u_hat) { return procrustes(u, u_hat).w; },
        py::arg("u"), py::arg("u_hat"), "Orthogonal W minimising ||u_hat - u W||_F.");

    m.def(
        "estimate_p",
        [](const Eigen::MatrixXd& a, std::size_t r, bool clip) { return estimate_p(eig_dense(a, r), r, clip); },
        py::arg("adjacency"), py::arg("r"), py::arg("clip") = false);

    m.def(
        "null_critical_value",
        [](const Eigen::VectorXd& w, double sigma, double level, std::size_t draws, std::uint64_t seed) {
            return null_critical_value(w, sigma, level, draws, seed).c_star;
        },
        py::arg("weights"), py::arg("sigma"), py::arg("level") = 0.05, py::arg("draws") = 200000,
        py::arg("seed") = 0);

    m.def(
        "test_pair",
        [](const Eigen::MatrixXd& a, std::size_t i, std::size_t j, double level, std::optional<std::size_t> rank,
           std::size_t draws, std::uint64_t seed) {
            PairTestOptions o;
            o.level = level;
            o.fixed_rank = rank;
            o.draws = draws;
            o.seed = seed;
            const TestReport r = run_pair_test(from_dense(a), i, j, o);
            py::dict d;
            d["i"] = r.i;
            d["j"] = r.j;
            d["rhat"] = r.rhat;
            d["T"] = r.t;
            d["theta"] = r.theta;
            d["sigma"] = r.sigma;
            d["weights"] = r.weights;
            d["cstar"] = r.c_star;
            d["pvalue"] = r.p_value;
            d["reject"] = r.reject;
            d["degenerate"] = r.degenerate;
            d["fallback"] = r.rank_fallback;
            return d;
        },
        py::arg("adjacency"), py::arg("i"), py::arg("j"), py::arg("level") = 0.05, py::arg("rank") = py::none(),
        py::arg("draws") = 200000, py::arg("seed") = 0);
}
