#include "lpg/model.hpp"

#include "lpg/linalg.hpp"
#include "lpg/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

namespace lpg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double squared_distance(std::span<const double> x, std::span<const double> y) {
    double s = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return s;
}

constexpr double kRangeSlack = 1e-12;

Eigen::VectorXd random_unit(int dim, CounterRng& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(dim);
    do {
        for (int k = 0; k < dim; ++k) v[k] = normal(rng);
    } while (v.norm() == 0.0);
    return v / v.norm();
}

}  // namespace

// ---------------------------------------------------------------------------

double kernel_value(const KernelSpec& kernel, std::span<const double> x,
                    std::span<const double> y) {
    return std::visit(
        overloaded{
            [&](const LaplaceKernel& k) { return std::exp(-std::sqrt(squared_distance(x, y)) / k.scale); },
            [&](const GaussianKernel& k) { return std::exp(-squared_distance(x, y) / k.bandwidth2); },
            [&](const DotProductKernel& k) {
                const auto n = static_cast<Eigen::Index>(x.size());
                Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
                Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
                return xv.dot(k.matrix * yv);
            },
            [&](const ConstantKernel& k) { return k.value; },
        },
        kernel);
}

bool kernel_is_psd(const KernelSpec& kernel) {
    if (const auto* dp = std::get_if<DotProductKernel>(&kernel)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dp->matrix, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() >= -1e-12;
    }
    if (const auto* c = std::get_if<ConstantKernel>(&kernel)) return c->value >= 0;
    return true;
}

std::string kernel_name(const KernelSpec& kernel) {
    return std::visit(overloaded{
                          [](const LaplaceKernel&) { return std::string("laplace"); },
                          [](const GaussianKernel&) { return std::string("gaussian"); },
                          [](const DotProductKernel&) { return std::string("dotproduct"); },
                          [](const ConstantKernel&) { return std::string("constant"); },
                      },
                      kernel);
}

int latent_dim(const LatentDistribution& dist) {
    return std::visit(overloaded{
                          [](const UniformSphere& s) { return s.dim; },
                          [](const StandardNormal& s) { return s.dim; },
                          [](const PointCloud& p) { return static_cast<int>(p.coords.cols()); },
                      },
                      dist);
}

// ---------------------------------------------------------------------------

LatentSample sample_latents(const LatentDistribution& dist, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("sample_latents: need n >= 2");
    const int dim = latent_dim(dist);
    if (dim < 1) throw std::invalid_argument("sample_latents: latent dimension must be >= 1");

    CounterRng rng(seed, Stream::latents);
    LatentSample out;
    out.seed = seed;
    out.coords.resize(static_cast<Eigen::Index>(n), dim);

    std::visit(overloaded{
                   [&](const UniformSphere&) {
                       out.support = Support::sphere;
                       for (std::size_t i = 0; i < n; ++i) {
                           out.coords.row(static_cast<Eigen::Index>(i)) = random_unit(dim, rng).transpose();
                       }
                   },
                   [&](const StandardNormal&) {
                       std::normal_distribution<double> normal;
                       for (std::size_t i = 0; i < n; ++i)
                           for (int k = 0; k < dim; ++k)
                               out.coords(static_cast<Eigen::Index>(i), k) = normal(rng);
                   },
                   [&](const PointCloud& cloud) {
                       if (cloud.coords.rows() == 0) throw std::invalid_argument("sample_latents: empty point cloud");
                       if (!cloud.coords.allFinite())
                           throw std::invalid_argument("sample_latents: point cloud has non-finite entries");
                       if (static_cast<std::size_t>(cloud.coords.rows()) == n) {
                           out.coords = cloud.coords;
                           return;
                       }
                       std::uniform_int_distribution<Eigen::Index> pick(0, cloud.coords.rows() - 1);
                       for (std::size_t i = 0; i < n; ++i)
                           out.coords.row(static_cast<Eigen::Index>(i)) = cloud.coords.row(pick(rng));
                   },
               },
               dist);
    return out;
}

LatentSample place_pair_at_distance(const LatentSample& sample, std::size_t i, std::size_t j,
                                    double eps, std::uint64_t seed) {
    const std::size_t n = sample.size();
    if (i >= n || j >= n) throw std::out_of_range("place_pair_at_distance: index out of range");
    if (i == j) throw std::invalid_argument("place_pair_at_distance: need i != j");
    if (!(eps >= 0)) throw std::invalid_argument("place_pair_at_distance: eps must be >= 0");
    if (sample.support == Support::sphere && eps > 2.0)
        throw std::invalid_argument("place_pair_at_distance: chord length > 2 is infeasible on the unit sphere");

    LatentSample out = sample;
    const auto ii = static_cast<Eigen::Index>(i);
    const auto jj = static_cast<Eigen::Index>(j);
    const Eigen::VectorXd anchor = sample.coords.row(ii).transpose();
    if (eps == 0.0) {
        out.coords.row(jj) = anchor.transpose();
        return out;
    }

    CounterRng rng(seed, Stream::placement);
    const int dim = static_cast<int>(anchor.size());
    if (sample.support == Support::sphere) {
        if (dim < 2) throw std::invalid_argument("place_pair_at_distance: sphere needs dim >= 2");
        Eigen::VectorXd tangent;
        do {
            tangent = random_unit(dim, rng);
            tangent -= tangent.dot(anchor) * anchor;
        } while (tangent.norm() < 1e-8);
        tangent.normalize();
        const double angle = 2.0 * std::asin(eps / 2.0);
        out.coords.row(jj) = (std::cos(angle) * anchor + std::sin(angle) * tangent).transpose();
    } else {
        out.coords.row(jj) = (anchor + eps * random_unit(dim, rng)).transpose();
    }
    return out;
}

// ---------------------------------------------------------------------------

EdgeProbabilityMatrix::EdgeProbabilityMatrix(std::size_t n, double rho, std::vector<double> packed)
    : n_(n), rho_(rho), packed_(std::move(packed)) {
    if (packed_.size() != n * (n + 1) / 2)
        throw std::invalid_argument("EdgeProbabilityMatrix: packed size does not match n");
}

void EdgeProbabilityMatrix::apply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    const double* p = packed_.data();
    for (std::size_t i = 0; i < n_; ++i) {
        const double xi = x[i];
        double acc = 0;
        for (std::size_t j = 0; j < i; ++j) {
            acc += p[j] * x[j];
            y[j] += p[j] * xi;
        }
        y[i] += acc + p[i] * xi;
        p += i + 1;
    }
}

Eigen::MatrixXd EdgeProbabilityMatrix::dense() const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd m(n, n);
    std::size_t t = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j, ++t) m(i, j) = m(j, i) = packed_[t];
    return m;
}

double EdgeProbabilityMatrix::max_entry() const {
    return packed_.empty() ? 0.0 : *std::max_element(packed_.begin(), packed_.end());
}

EdgeProbabilityMatrix build_p(const LatentSample& sample, const KernelSpec& kernel, double rho) {
    if (!(rho > 0 && rho <= 1)) throw std::invalid_argument("build_p: rho must lie in (0, 1]");
    const std::size_t n = sample.size();
    const auto d = static_cast<std::size_t>(sample.coords.cols());
    // Row-major copy so rows are contiguous spans.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x = sample.coords;
    std::vector<double> packed(n * (n + 1) / 2);
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> xi(x.data() + i * d, d);
        for (std::size_t j = 0; j <= i; ++j, ++t) {
            double k = kernel_value(kernel, xi, std::span<const double>(x.data() + j * d, d));
            if (!(k >= -kRangeSlack && k <= 1 + kRangeSlack))
                throw std::invalid_argument("build_p: kernel value " + std::to_string(k) +
                                            " outside [0, 1] for pair (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ")");
            packed[t] = rho * std::clamp(k, 0.0, 1.0);
        }
    }
    return EdgeProbabilityMatrix(n, rho, std::move(packed));
}

// ---------------------------------------------------------------------------

Adjacency::Adjacency(std::size_t n, bool hollow)
    : n_(n), hollow_(hollow), words_((n * (n + 1) / 2 + 63) / 64, 0) {}

void Adjacency::set(std::size_t i, std::size_t j, bool value) noexcept {
    const std::size_t p = bit_index(i, j);
    const std::uint64_t mask = std::uint64_t{1} << (p & 63);
    if (value)
        words_[p >> 6] |= mask;
    else
        words_[p >> 6] &= ~mask;
}

std::size_t Adjacency::edge_count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

double Adjacency::average_degree() const {
    std::size_t diag = 0;
    for (std::size_t i = 0; i < n_; ++i) diag += (*this)(i, i) ? 1 : 0;
    const std::size_t total = edge_count();
    return static_cast<double>(2 * (total - diag) + diag) / static_cast<double>(n_);
}

void Adjacency::apply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    const std::uint64_t* words = words_.data();
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t base = i * (i + 1) / 2;
        const std::size_t end = base + i + 1;
        const double xi = x[i];
        double acc = 0;
        std::size_t pos = base;
        while (pos < end) {
            const std::size_t off = pos & 63;
            const std::size_t span = std::min<std::size_t>(64 - off, end - pos);
            std::uint64_t word = words[pos >> 6] >> off;
            if (span < 64) word &= (std::uint64_t{1} << span) - 1;
            const std::size_t j0 = pos - base;
            while (word) {
                const std::size_t j = j0 + static_cast<std::size_t>(std::countr_zero(word));
                acc += x[j];
                if (j != i) y[j] += xi;
                word &= word - 1;
            }
            pos += span;
        }
        y[i] += acc;
    }
}

Eigen::VectorXd Adjacency::row(std::size_t i) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j) r[static_cast<Eigen::Index>(j)] = (*this)(i, j) ? 1.0 : 0.0;
    return r;
}

Eigen::MatrixXd Adjacency::dense() const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            if ((*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) m(i, j) = m(j, i) = 1.0;
    return m;
}

std::vector<std::pair<std::size_t, std::size_t>> Adjacency::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edge_count());
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j)
            if ((*this)(i, j)) out.emplace_back(i, j);
    return out;
}

Adjacency Adjacency::from_edges(std::size_t n,
                                std::span<const std::pair<std::size_t, std::size_t>> edges,
                                bool hollow) {
    Adjacency a(n, hollow);
    for (const auto& [i, j] : edges) {
        if (i >= n || j >= n) throw std::out_of_range("Adjacency::from_edges: vertex index out of range");
        if (hollow && i == j) continue;
        a.set(i, j);
    }
    return a;
}

Adjacency sample_adjacency(const EdgeProbabilityMatrix& p, std::uint64_t seed, bool hollow) {
    const std::size_t n = p.size();
    Adjacency a(n, hollow);
    auto words = a.words();
    const auto key = philox_key(seed);
    const auto stream = static_cast<std::uint32_t>(Stream::adjacency);
    const auto probs = p.packed();
    std::array<std::uint32_t, 4> block{};
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j, ++t) {
            // Two pairs per Philox block: pair t uses words 2(t mod 2), 2(t mod 2)+1.
            if ((t & 1) == 0) {
                const std::uint64_t c = t >> 1;
                block = philox4x32({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                                    stream, 0u},
                                   key);
            }
            if (hollow && i == j) continue;
            const std::size_t w = (t & 1) * 2;
            if (unit_double(block[w], block[w + 1]) < probs[t]) words[t >> 6] |= std::uint64_t{1} << (t & 63);
        }
    }
    return a;
}

// ---------------------------------------------------------------------------

std::vector<double> nystrom_spectrum(const KernelSpec& kernel, const LatentDistribution& dist,
                                     std::size_t m, std::size_t k, std::uint64_t seed) {
    if (k < 1 || m < k) throw std::invalid_argument("nystrom_spectrum: need m >= k >= 1");
    const LatentSample sample = sample_latents(dist, m, seed);
    // The Gram matrix is P with ρ = 1.
    const EdgeProbabilityMatrix gram = build_p(sample, kernel, 1.0);
    const MatVec op = [&gram](std::span<const double> x, std::span<double> y) { gram.apply(x, y); };
    LanczosOptions opts;
    opts.seed = seed;
    const SpectralDecomposition dec = eig_topk(op, m, k, opts);
    std::vector<double> mu(k);
    for (std::size_t j = 0; j < k; ++j) mu[j] = dec.values[static_cast<Eigen::Index>(j)] / static_cast<double>(m);
    return mu;
}

}  // namespace lpg
