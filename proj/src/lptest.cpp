#include "lpg/lptest.hpp"

#include "lpg/error.hpp"
#include "lpg/rng.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace lpg {

Eigen::VectorXd dhat(const Adjacency& a, std::size_t i, std::size_t j, bool exclude_self) {
    if (i == j) throw std::invalid_argument("dhat: i and j must differ");
    if (i >= a.size() || j >= a.size()) throw std::invalid_argument("dhat: vertex index out of range");
    Eigen::VectorXd d = (a.row(i) - a.row(j)).cwiseAbs();
    if (exclude_self) d[static_cast<Eigen::Index>(i)] = d[static_cast<Eigen::Index>(j)] = 0;
    return d;
}

namespace {

PairStatistic statistic_from_rows(const Eigen::VectorXd& diff, const Eigen::MatrixXd& u_hat) {
    // d̂_k = |a_ik − a_jk| = |diff_k| and d̂_k² = d̂_k for 0/1 data.
    const Eigen::VectorXd d = diff.cwiseAbs();
    PairStatistic s;
    const Eigen::MatrixXd du = d.asDiagonal() * u_hat;
    s.theta = du.squaredNorm();
    const Eigen::MatrixXd g = du.transpose() * du;
    s.sigma = g.norm();
    s.quadratic = (u_hat.transpose() * diff).squaredNorm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    s.weights = es.eigenvalues().reverse();
    s.degenerate = !(s.sigma > 0);
    s.t = s.degenerate ? std::numeric_limits<double>::quiet_NaN() : (s.quadratic - s.theta) / s.sigma;
    return s;
}

}  // namespace

PairStatistic test_statistic(const Adjacency& a, const Eigen::MatrixXd& u_hat, std::size_t i, std::size_t j,
                             bool exclude_self) {
    if (static_cast<std::size_t>(u_hat.rows()) != a.size())
        throw std::invalid_argument("test_statistic: Û must have one row per vertex");
    if (i == j) throw std::invalid_argument("test_statistic: i and j must differ");
    Eigen::VectorXd diff = a.row(i) - a.row(j);
    if (exclude_self) diff[static_cast<Eigen::Index>(i)] = diff[static_cast<Eigen::Index>(j)] = 0;
    return statistic_from_rows(diff, u_hat);
}

PairStatistic test_statistic(const Eigen::MatrixXd& a, const Eigen::MatrixXd& u_hat, std::size_t i, std::size_t j,
                             bool exclude_self) {
    if (u_hat.rows() != a.rows() || a.rows() != a.cols())
        throw std::invalid_argument("test_statistic: shape mismatch");
    if (i == j) throw std::invalid_argument("test_statistic: i and j must differ");
    Eigen::VectorXd diff = (a.row(static_cast<Eigen::Index>(i)) - a.row(static_cast<Eigen::Index>(j))).transpose();
    if (exclude_self) diff[static_cast<Eigen::Index>(i)] = diff[static_cast<Eigen::Index>(j)] = 0;
    return statistic_from_rows(diff, u_hat);
}

// ---------------------------------------------------------------------------

NullCalibration::NullCalibration(const Eigen::VectorXd& weights, double sigma, std::size_t draws, std::uint64_t seed) {
    if (draws < 10000) throw std::invalid_argument("null calibration needs at least 10^4 draws");
    if (!(sigma > 0)) throw std::invalid_argument("null calibration needs a positive scale");
    std::vector<double> w;
    for (Eigen::Index s = 0; s < weights.size(); ++s)
        if (weights[s] != 0) w.push_back(weights[s] / sigma);
    if (w.empty()) throw std::invalid_argument("null calibration: all weights are zero");

    CounterRng rng(seed, Stream::null_draws);
    std::normal_distribution<double> normal;
    draws_.resize(draws);
    for (auto& x : draws_) {
        double acc = 0;
        for (double ws : w) {
            const double z = normal(rng);
            acc += ws * (z * z - 1.0);
        }
        x = acc;
    }
    std::sort(draws_.begin(), draws_.end());
}

double NullCalibration::critical_value(double level) const {
    if (!(level > 0 && level <= 1)) throw std::invalid_argument("critical_value: level must lie in (0, 1]");
    if (level == 1.0) return -std::numeric_limits<double>::infinity();
    const auto b = static_cast<double>(draws_.size());
    auto idx = static_cast<std::size_t>(std::ceil((1.0 - level) * b - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, draws_.size());
    return draws_[idx - 1];
}

double NullCalibration::p_value(double t) const {
    const auto first = std::lower_bound(draws_.begin(), draws_.end(), t);
    const auto above = static_cast<double>(draws_.end() - first);
    return (1.0 + above) / (static_cast<double>(draws_.size()) + 1.0);
}

CriticalValue null_critical_value(const Eigen::VectorXd& weights, double sigma, double level, std::size_t draws,
                                  std::uint64_t seed) {
    auto null = std::make_shared<const NullCalibration>(weights, sigma, draws, seed);
    return {null->critical_value(level), null->min_draw(), null};
}

// ---------------------------------------------------------------------------

ExactNull::ExactNull(const Eigen::VectorXd& weights, double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("ExactNull: scale must be positive");
    const double tiny = 1e-14 * std::max(weights.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index s = 0; s < weights.size(); ++s) {
        if (weights[s] < -tiny) throw std::invalid_argument("ExactNull: weights must be nonnegative");
        if (weights[s] > tiny) w_.push_back(weights[s] / sigma);
    }
    if (w_.empty()) throw std::invalid_argument("ExactNull: all weights are zero");
    std::sort(w_.begin(), w_.end(), std::greater<>());
    for (double x : w_) shift_ += x;
}

double ExactNull::survival(double t) const {
    const double x = t + shift_;  // P(Σ w Z² > x)
    if (x <= 0) return 1.0;
    if (w_.size() == 1) return boost::math::cdf(boost::math::complement(boost::math::chi_squared(1.0), x / w_[0]));

    const auto m = static_cast<double>(w_.size());
    auto theta = [&](double u) {
        double s = 0;
        for (double l : w_) s += std::atan(l * u);
        return 0.5 * s - 0.5 * x * u;
    };
    auto log_rho = [&](double u) {
        double s = 0;
        for (double l : w_) s += std::log1p(l * l * u * u);
        return 0.25 * s;
    };
    auto integrand = [&](double u) {
        if (u == 0) return 0.5 * (shift_ - x);
        return std::sin(theta(u)) / (u * std::exp(log_rho(u)));
    };

    // Truncation: past U the envelope 1/(u ρ(u)) ≤ 1/(u^{1+m/2} Π√w) and the
    // phase speed tends to x/2, so the oscillating tail is below
    // 2/(x · U^{1+m/2} Π√w) in magnitude.
    double log_prod = 0;
    for (double l : w_) log_prod += 0.5 * std::log(l);
    const double tol = 1e-11;
    const double log_u = (std::log(2.0 / (x * tol)) - log_prod) / (1.0 + 0.5 * m);
    const double upper = std::max(1.0, std::exp(log_u));
    const double speed = 0.5 * (shift_ + x);
    const double width = std::numbers::pi / speed;

    double integral = 0;
    for (double a = 0; a < upper; a += width)
        integral += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a, std::min(a + width, upper));
    return std::clamp(0.5 + integral / std::numbers::pi, 0.0, 1.0);
}

double ExactNull::quantile(double p) const {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("ExactNull::quantile: p must lie in (0, 1)");
    auto f = [&](double t) { return cdf(t) - p; };
    // Survival near t = −Σw needs a very long integration range; bracket from 0.
    double lo = 0.0, hi = 1.0;
    while (f(hi) < 0) hi *= 2;
    while (f(lo) > 0) lo = -shift_ + 0.5 * (lo + shift_);
    std::uintmax_t iters = 200;
    const auto root =
        boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(40), iters);
    return 0.5 * (root.first + root.second);
}

// ---------------------------------------------------------------------------

TestReport run_pair_test(const Adjacency& a, const SpectralDecomposition& decomp, std::size_t i, std::size_t j,
                         const PairTestOptions& options) {
    if (i == j) throw std::invalid_argument("run_pair_test: i and j must differ");
    if (i >= a.size() || j >= a.size()) throw std::invalid_argument("run_pair_test: vertex index out of range");
    if (!(options.level > 0 && options.level <= 1)) throw std::invalid_argument("run_pair_test: level must lie in (0, 1]");
    const std::size_t n = a.size();

    TestReport rep;
    rep.i = i;
    rep.j = j;
    rep.average_degree = a.average_degree();
    if (!options.degree_with_loops && !a.hollow()) {
        std::size_t loops = 0;
        for (std::size_t v = 0; v < n; ++v) loops += a(v, v);
        rep.average_degree -= static_cast<double>(loops) / static_cast<double>(n);
    }
    rep.eigenvalues = decomp.values;
    if (options.fixed_rank) {
        rep.rhat = *options.fixed_rank;
    } else {
        const std::vector<double> lam(decomp.values.data(), decomp.values.data() + decomp.values.size());
        rep.rank = select_rank_test(lam, rep.average_degree, n, options.jmax);
        rep.rhat = rep.rank.value();
        rep.rank_fallback = rep.rank.fallback();
    }
    if (rep.rhat == 0 || rep.rhat > decomp.size()) throw std::invalid_argument("run_pair_test: rank exceeds computed pairs");

    const Eigen::MatrixXd u_hat = decomp.vectors.leftCols(static_cast<Eigen::Index>(rep.rhat));
    const PairStatistic st = test_statistic(a, u_hat, i, j, options.exclude_self);
    rep.t = st.t;
    rep.theta = st.theta;
    rep.sigma = st.sigma;
    rep.weights = st.weights;
    rep.degenerate = st.degenerate;
    if (rep.degenerate) {
        rep.c_star = std::numeric_limits<double>::quiet_NaN();
        rep.p_value = 1.0;
        rep.reject = false;
        return rep;
    }
    if (options.backend == NullBackend::monte_carlo) {
        const CriticalValue cv = null_critical_value(st.weights, st.sigma, options.level, options.draws, options.seed);
        rep.c_star = cv.c_star;
        rep.p_value = cv.null->p_value(st.t);
    } else {
        const ExactNull ex(st.weights, st.sigma);
        rep.c_star = options.level == 1.0 ? -std::numeric_limits<double>::infinity() : ex.quantile(1.0 - options.level);
        rep.p_value = ex.survival(st.t);
    }
    rep.reject = st.t > rep.c_star;
    return rep;
}

TestReport run_pair_test(const Adjacency& a, std::size_t i, std::size_t j, const PairTestOptions& options) {
    const std::size_t n = a.size();
    const std::size_t jmax = options.jmax ? std::min(options.jmax, n - 1) : default_jmax(n);
    std::size_t k = options.fixed_rank ? *options.fixed_rank : jmax + 1;
    k = std::min(k, n);
    LanczosOptions lo;
    lo.tol = options.lanczos_tol;
    lo.seed = options.seed;
    MatVec op = [&a](std::span<const double> x, std::span<double> y) { a.apply(x, y); };
    const SpectralDecomposition d = eig_topk(op, n, k, lo);
    return run_pair_test(a, d, i, j, options);
}

}  // namespace lpg
