#pragma once

// File formats: edge lists, packed adjacency and eigenvector dumps, latent
// point clouds and small CSV helpers.

#include "lpg/linalg.hpp"
#include "lpg/model.hpp"
#include "lpg/theory.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace lpg::io {

/// Six significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string fmt(double x);

/// Header `n <count> hollow <0|1>` then one sorted `i j` line per edge (i ≤ j,
/// 0-based).
void write_edge_list(std::ostream& os, const Adjacency& a);
/// Accepts the header form above or a bare edge list (n = largest index + 1).
/// Lines starting with '#' are ignored. Throws ConfigError on malformed input.
Adjacency read_edge_list(std::istream& is);
Adjacency read_edge_list(const std::string& path);

/// Magic `LPGA1`, u64 n, u8 hollow, then the lower-triangle bit words.
void write_adjacency_binary(std::ostream& os, const Adjacency& a);
Adjacency read_adjacency_binary(std::istream& is);

/// CSV `index,eigenvalue,residual`.
void write_decomposition_csv(std::ostream& os, const SpectralDecomposition& d);
/// Magic `LPGV1`, u64 rows, u64 cols, column-major doubles.
void write_vectors_binary(std::ostream& os, const Eigen::MatrixXd& v);
Eigen::MatrixXd read_vectors_binary(std::istream& is);

/// CSV `j,gap,threshold,admissible`.
void write_rank_report_csv(std::ostream& os, const RankReport& r);

/// Dense matrix as CSV without header.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);
/// Magic `LPGP1`, u64 n, packed lower triangle (diagonal included) as doubles.
void write_packed_symmetric(std::ostream& os, const Eigen::MatrixXd& m);

/// One row per vertex, comma or whitespace separated. A first row that does
/// not parse as numbers is treated as a header.
Eigen::MatrixXd read_point_cloud(const std::string& path);

}  // namespace lpg::io
