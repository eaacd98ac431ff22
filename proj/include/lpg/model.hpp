#pragma once

// Latent position graph model: kernels, latent distributions, the edge
// probability matrix P = ρ κ(X_i, X_j) and Bernoulli adjacency sampling.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace lpg {

// ---------------------------------------------------------------------------
// Kernels

/// κ(x, y) = exp(-‖x - y‖ / scale)
struct LaplaceKernel {
    double scale = 1.0;
};

/// κ(x, y) = exp(-‖x - y‖² / bandwidth2)
struct GaussianKernel {
    double bandwidth2 = 1.0;
};

/// κ(x, y) = xᵀ M y. The caller is responsible for keeping values in [0, 1]
/// on the support; build_p rejects anything outside.
struct DotProductKernel {
    Eigen::MatrixXd matrix;
};

/// κ(x, y) = c
struct ConstantKernel {
    double value = 1.0;
};

using KernelSpec = std::variant<LaplaceKernel, GaussianKernel, DotProductKernel, ConstantKernel>;

/// Raw kernel value; no range check.
double kernel_value(const KernelSpec& kernel, std::span<const double> x, std::span<const double> y);

/// True for kernels that are positive semidefinite for every latent sample.
/// DotProduct is PSD iff its matrix is.
bool kernel_is_psd(const KernelSpec& kernel);

std::string kernel_name(const KernelSpec& kernel);

// ---------------------------------------------------------------------------
// Latent distributions

struct UniformSphere {
    int dim = 3;
};

struct StandardNormal {
    int dim = 2;
};

/// Explicit coordinates, one row per point. Sampling n == rows returns the
/// rows verbatim; any other n draws rows uniformly with replacement.
struct PointCloud {
    Eigen::MatrixXd coords;
};

using LatentDistribution = std::variant<UniformSphere, StandardNormal, PointCloud>;

enum class Support { sphere, euclidean };

int latent_dim(const LatentDistribution& dist);

struct LatentSample {
    Eigen::MatrixXd coords;  // n × d, row i is X_i
    std::uint64_t seed = 0;
    Support support = Support::euclidean;

    std::size_t size() const noexcept { return static_cast<std::size_t>(coords.rows()); }
};

/// Draws n i.i.d. latent positions. Bit-reproducible for a fixed seed.
LatentSample sample_latents(const LatentDistribution& dist, std::size_t n, std::uint64_t seed);

/// Returns a copy of `sample` with X_j moved to distance eps from X_i. On the
/// sphere X_j follows the geodesic from X_i along a uniformly random tangent
/// direction until the chord length is eps; in flat space X_j = X_i + eps·u
/// for a uniformly random unit u.
LatentSample place_pair_at_distance(const LatentSample& sample, std::size_t i, std::size_t j,
                                    double eps, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Edge probabilities

/// Symmetric n × n matrix stored once per unordered pair (packed lower
/// triangle, diagonal included).
class EdgeProbabilityMatrix {
public:
    EdgeProbabilityMatrix(std::size_t n, double rho, std::vector<double> packed);

    std::size_t size() const noexcept { return n_; }
    double rho() const noexcept { return rho_; }

    double operator()(std::size_t i, std::size_t j) const noexcept {
        return packed_[i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i];
    }

    std::span<const double> packed() const noexcept { return packed_; }

    /// y = P x
    void apply(std::span<const double> x, std::span<double> y) const;

    Eigen::MatrixXd dense() const;
    double max_entry() const;

private:
    std::size_t n_;
    double rho_;
    std::vector<double> packed_;
};

/// P_ij = ρ κ(X_i, X_j). Throws std::invalid_argument when ρ ∉ (0, 1] or a
/// kernel value falls outside [0, 1].
EdgeProbabilityMatrix build_p(const LatentSample& sample, const KernelSpec& kernel, double rho);

// ---------------------------------------------------------------------------
// Adjacency

/// Symmetric binary matrix, bit-packed lower triangle including the diagonal.
/// Bit (i, j), j ≤ i, lives at position i(i+1)/2 + j.
class Adjacency {
public:
    Adjacency(std::size_t n, bool hollow);

    std::size_t size() const noexcept { return n_; }
    bool hollow() const noexcept { return hollow_; }

    bool operator()(std::size_t i, std::size_t j) const noexcept {
        const std::size_t p = bit_index(i, j);
        return (words_[p >> 6] >> (p & 63)) & 1u;
    }

    void set(std::size_t i, std::size_t j, bool value = true) noexcept;

    std::span<const std::uint64_t> words() const noexcept { return words_; }
    std::span<std::uint64_t> words() noexcept { return words_; }

    /// n⁻¹ Σ_i Σ_j a_ij; a self-loop contributes once.
    double average_degree() const;
    std::size_t edge_count() const;  // unordered pairs incl. self-loops

    /// y = A x, iterating set bits only.
    void apply(std::span<const double> x, std::span<double> y) const;

    Eigen::VectorXd row(std::size_t i) const;
    Eigen::MatrixXd dense() const;

    /// Unordered edges (i ≤ j), lexicographically sorted.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

    static Adjacency from_edges(std::size_t n,
                                std::span<const std::pair<std::size_t, std::size_t>> edges,
                                bool hollow);

    static std::size_t bit_index(std::size_t i, std::size_t j) noexcept {
        return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
    }

    friend bool operator==(const Adjacency&, const Adjacency&) = default;

private:
    std::size_t n_;
    bool hollow_;
    std::vector<std::uint64_t> words_;
};

/// Independent Bernoulli(P_ij) for i ≤ j, symmetrized. Pair (i, j) always
/// consumes the same Philox counter, so the draw is reproducible per seed.
/// `hollow` zeroes the diagonal.
Adjacency sample_adjacency(const EdgeProbabilityMatrix& p, std::uint64_t seed, bool hollow = false);

/// Top-k eigenvalues (by modulus) of the m × m kernel Gram matrix divided by
/// m: Nyström estimates of the integral operator spectrum.
std::vector<double> nystrom_spectrum(const KernelSpec& kernel, const LatentDistribution& dist,
                                     std::size_t m, std::size_t k, std::uint64_t seed);

}  // namespace lpg
