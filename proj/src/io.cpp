#include "lpg/io.hpp"

#include "lpg/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lpg::io {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void write_edge_list(std::ostream& os, const Adjacency& a) {
    os << "n " << a.size() << " hollow " << (a.hollow() ? 1 : 0) << '\n';
    for (const auto& [i, j] : a.edges()) os << i << ' ' << j << '\n';
}

Adjacency read_edge_list(std::istream& is) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t n = 0;
    bool have_header = false, hollow = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        if (line[first] == 'n') {
            std::string tag, htag;
            int h = 0;
            if (have_header || !edges.empty() || !(ls >> tag >> n >> htag >> h) || tag != "n" || htag != "hollow" ||
                (h != 0 && h != 1))
                throw ConfigError("edge list line " + std::to_string(lineno) + ": malformed header");
            have_header = true;
            hollow = h == 1;
            continue;
        }
        long long i = -1, j = -1;
        std::string rest;
        if (!(ls >> i >> j) || i < 0 || j < 0 || (ls >> rest))
            throw ConfigError("edge list line " + std::to_string(lineno) + ": expected two vertex indices");
        auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
        if (a > b) std::swap(a, b);
        edges.emplace_back(a, b);
    }
    if (!have_header) {
        for (const auto& e : edges) n = std::max(n, e.second + 1);
        hollow = std::none_of(edges.begin(), edges.end(), [](const auto& e) { return e.first == e.second; });
    }
    for (const auto& e : edges) {
        if (e.second >= n) throw ConfigError("edge list: vertex index exceeds n");
        if (hollow && e.first == e.second) throw ConfigError("edge list: self-loop in a hollow graph");
    }
    if (n == 0) throw ConfigError("edge list: empty graph");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Adjacency::from_edges(n, edges, hollow);
}

Adjacency read_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open edge list " + path);
    return read_edge_list(in);
}

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw ConfigError("binary input truncated");
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
    return v;
}

void put_f64(std::ostream& os, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    put_u64(os, bits);
}

double get_f64(std::istream& is) {
    const std::uint64_t bits = get_u64(is);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

void expect_magic(std::istream& is, const char* magic) {
    char buf[5];
    if (!is.read(buf, 5) || std::string(buf, 5) != magic)
        throw ConfigError(std::string("binary input: expected magic ") + magic);
}

}  // namespace

void write_adjacency_binary(std::ostream& os, const Adjacency& a) {
    os.write("LPGA1", 5);
    put_u64(os, a.size());
    const char h = a.hollow() ? 1 : 0;
    os.write(&h, 1);
    for (std::uint64_t w : a.words()) put_u64(os, w);
}

Adjacency read_adjacency_binary(std::istream& is) {
    expect_magic(is, "LPGA1");
    const std::uint64_t n = get_u64(is);
    char h = 0;
    if (!is.read(&h, 1) || (h != 0 && h != 1)) throw ConfigError("LPGA1: bad hollow flag");
    Adjacency a(n, h == 1);
    for (auto& w : a.words()) w = get_u64(is);
    return a;
}

void write_decomposition_csv(std::ostream& os, const SpectralDecomposition& d) {
    os << "index,eigenvalue,residual\n";
    for (Eigen::Index k = 0; k < d.values.size(); ++k) {
        const double res = k < d.residuals.size() ? d.residuals[k] : 0.0;
        os << k + 1 << ',' << fmt(d.values[k]) << ',' << fmt(res) << '\n';
    }
}

void write_vectors_binary(std::ostream& os, const Eigen::MatrixXd& v) {
    os.write("LPGV1", 5);
    put_u64(os, static_cast<std::uint64_t>(v.rows()));
    put_u64(os, static_cast<std::uint64_t>(v.cols()));
    for (Eigen::Index c = 0; c < v.cols(); ++c)
        for (Eigen::Index r = 0; r < v.rows(); ++r) put_f64(os, v(r, c));
}

Eigen::MatrixXd read_vectors_binary(std::istream& is) {
    expect_magic(is, "LPGV1");
    const auto rows = static_cast<Eigen::Index>(get_u64(is));
    const auto cols = static_cast<Eigen::Index>(get_u64(is));
    Eigen::MatrixXd v(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) v(r, c) = get_f64(is);
    return v;
}

void write_rank_report_csv(std::ostream& os, const RankReport& r) {
    os << "j,gap,threshold,admissible\n";
    for (std::size_t j = 0; j < r.gaps.size(); ++j)
        os << j + 1 << ',' << fmt(r.gaps[j]) << ',' << fmt(r.thresholds[j]) << ',' << (r.admissible[j] ? 1 : 0) << '\n';
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << fmt(m(i, j));
        }
        os << '\n';
    }
}

void write_packed_symmetric(std::ostream& os, const Eigen::MatrixXd& m) {
    os.write("LPGP1", 5);
    put_u64(os, static_cast<std::uint64_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j <= i; ++j) put_f64(os, m(i, j));
}

Eigen::MatrixXd read_point_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open latent file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        bool numeric = true;
        while (ls >> tok) {
            char* end = nullptr;
            const double x = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0') {
                numeric = false;
                break;
            }
            row.push_back(x);
        }
        if (!numeric) {
            if (rows.empty() && lineno == 1) continue;
            throw ConfigError(path + " line " + std::to_string(lineno) + ": non-numeric entry");
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError(path + " line " + std::to_string(lineno) + ": inconsistent column count");
        for (double x : row)
            if (!std::isfinite(x)) throw ConfigError(path + " line " + std::to_string(lineno) + ": non-finite value");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(path + ": no points");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

}  // namespace lpg::io
