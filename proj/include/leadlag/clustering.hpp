#pragma once

// Spectral clustering of directed lead-lag networks: naive symmetrization,
// degree-discounted bibliometric symmetrization, DI-SIM co-clustering and
// Hermitian clustering with degree normalization. All public entry points
// return labels canonicalized by leadingness (0 = most leading).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "leadlag/common.hpp"
#include "leadlag/network.hpp"

namespace leadlag {

struct SpectralConfig {
    int k = 2;
    int n_eigenvectors = 0;  // 0 means "use k"
    double eig_tolerance = 1e-8;
    int kmeans_restarts = 10;
    int kmeans_max_iters = 300;
    std::uint64_t seed = 0;
    double degree_floor = 1e-8;
    std::optional<double> disim_tau;  // default: average row sum of A

    int eigenvector_count() const { return n_eigenvectors > 0 ? n_eigenvectors : k; }

    void validate() const {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        if (n_eigenvectors < 0) throw std::invalid_argument("n_eigenvectors must be >= 1");
        if (!(eig_tolerance > 0.0)) throw std::invalid_argument("eigenvalue tolerance must be > 0");
        if (kmeans_restarts < 1 || kmeans_max_iters < 1) throw std::invalid_argument("k-means restarts/iterations must be >= 1");
    }
};

enum class Algorithm { Naive, Bibliometric, DisimLeft, DisimRight, HermitianRW };

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Naive: return "naive";
        case Algorithm::Bibliometric: return "bibliometric";
        case Algorithm::DisimLeft: return "disim-left";
        case Algorithm::DisimRight: return "disim-right";
        case Algorithm::HermitianRW: return "hermitian-rw";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "naive") return Algorithm::Naive;
    if (s == "bibliometric") return Algorithm::Bibliometric;
    if (s == "disim-left") return Algorithm::DisimLeft;
    if (s == "disim-right") return Algorithm::DisimRight;
    if (s == "hermitian-rw" || s == "hermitian") return Algorithm::HermitianRW;
    throw std::invalid_argument("unknown clustering algorithm '" + s + "'");
}

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

struct KMeansResult {
    Clustering clustering;
    double wcss = 0.0;
};

namespace detail {

inline std::size_t nearest(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& x, double& dist) {
    std::size_t best = 0;
    dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const double d = (centers.row(c) - x).squaredNorm();
        if (d < dist) {
            dist = d;
            best = static_cast<std::size_t>(c);
        }
    }
    return best;
}

inline KMeansResult kmeans_once(const Eigen::MatrixXd& X, int k, int max_iters, std::uint64_t seed) {
    const auto n = X.rows();
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd centers(k, X.cols());

    // k-means++ seeding
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = X.row(pick(rng));
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (X.row(i) - centers.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            double acc = 0.0;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[static_cast<std::size_t>(i)];
                if (u < acc && d2[static_cast<std::size_t>(i)] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centers.row(c) = X.row(chosen);
        for (Eigen::Index i = 0; i < n; ++i)
            d2[static_cast<std::size_t>(i)] =
                std::min(d2[static_cast<std::size_t>(i)], (X.row(i) - centers.row(c)).squaredNorm());
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = static_cast<int>(nearest(centers, X.row(i), dist[static_cast<std::size_t>(i)]));
            if (c != labels[static_cast<std::size_t>(i)]) {
                labels[static_cast<std::size_t>(i)] = c;
                changed = true;
            }
        }
        // Empty clusters take the point farthest from its center, among clusters with > 1 member.
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int l : labels) ++counts[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] > 1 &&
                    dist[static_cast<std::size_t>(i)] > far_d) {
                    far_d = dist[static_cast<std::size_t>(i)];
                    far = i;
                }
            if (far < 0 || far_d <= 0.0) continue;  // fewer distinct points than clusters
            --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
            labels[static_cast<std::size_t>(far)] = c;
            dist[static_cast<std::size_t>(far)] = 0.0;
            counts[static_cast<std::size_t>(c)] = 1;
            changed = true;
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, X.cols());
        for (Eigen::Index i = 0; i < n; ++i) sums.row(labels[static_cast<std::size_t>(i)]) += X.row(i);
        for (int c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        if (!changed) break;
    }
    KMeansResult r;
    r.clustering.k = k;
    r.clustering.labels = labels;
    for (Eigen::Index i = 0; i < n; ++i)
        r.wcss += (X.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    return r;
}

}  // namespace detail

/// k-means++ seeded Lloyd iterations; best of `kmeans_restarts` by WCSS,
/// ties resolved by the lower restart index.
inline KMeansResult kmeans_detailed(const Eigen::MatrixXd& points, int k, const SpectralConfig& config) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (k > points.rows())
        throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " exceeds point count " + std::to_string(points.rows()));
    if (k == 1) {
        KMeansResult r;
        r.clustering.k = 1;
        r.clustering.labels.assign(static_cast<std::size_t>(points.rows()), 0);
        const Eigen::RowVectorXd mean = points.colwise().mean();
        for (Eigen::Index i = 0; i < points.rows(); ++i) r.wcss += (points.row(i) - mean).squaredNorm();
        return r;
    }
    std::optional<KMeansResult> best;
    for (int r = 0; r < config.kmeans_restarts; ++r) {
        auto run = detail::kmeans_once(points, k, config.kmeans_max_iters,
                                       derive_seed(config.seed, 0x6b6d65616e73ULL, static_cast<std::uint64_t>(r)));
        if (!best || run.wcss < best->wcss) best = std::move(run);
    }
    return *best;
}

inline Clustering kmeans(const Eigen::MatrixXd& points, int k, const SpectralConfig& config) {
    return kmeans_detailed(points, k, config).clustering;
}

// ---------------------------------------------------------------------------
// Spectral building blocks
// ---------------------------------------------------------------------------

inline Eigen::VectorXd floored(const Eigen::VectorXd& d, double floor) { return d.cwiseMax(floor); }

/// Random-walk Laplacian eigenvectors 2..n+1 of an undirected weight matrix,
/// computed through the symmetric normalized Laplacian.
inline Eigen::MatrixXd rw_laplacian_embedding(const Eigen::MatrixXd& W, int n_vectors, double degree_floor) {
    const auto p = W.rows();
    const Eigen::VectorXd inv_sqrt = floored(W.rowwise().sum(), degree_floor).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(p, p) - inv_sqrt.asDiagonal() * W * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (L + L.transpose()));
    const auto m = std::min<Eigen::Index>(n_vectors, std::max<Eigen::Index>(p - 1, 1));
    if (p == 1) return Eigen::MatrixXd::Zero(1, 1);
    return inv_sqrt.asDiagonal() * es.eigenvectors().middleCols(1, m);
}

/// D_o^{-1/2} A D_i^{-1/2} A^T D_o^{-1/2} + D_i^{-1/2} A^T D_o^{-1/2} A D_i^{-1/2}
inline Eigen::MatrixXd bibliometric_matrix(const Eigen::MatrixXd& A, double degree_floor) {
    const Eigen::VectorXd out_is = floored(A.rowwise().sum(), degree_floor).cwiseSqrt().cwiseInverse();
    const Eigen::VectorXd in_is = floored(A.colwise().sum().transpose(), degree_floor).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd M = out_is.asDiagonal() * A * in_is.asDiagonal();
    return M * M.transpose() + M.transpose() * M;
}

struct DisimDecomposition {
    Eigen::MatrixXd left;   // U
    Eigen::MatrixXd right;  // V
    Eigen::VectorXd singular_values;
    double tau = 0.0;
};

/// SVD of L_tau = (D_o + tau I)^{-1/2} A (D_i + tau I)^{-1/2}.
inline DisimDecomposition disim_decomposition(const Eigen::MatrixXd& A, std::optional<double> tau_override,
                                              double degree_floor) {
    DisimDecomposition d;
    const Eigen::VectorXd out_deg = A.rowwise().sum();
    const Eigen::VectorXd in_deg = A.colwise().sum().transpose();
    d.tau = tau_override ? *tau_override : out_deg.mean();
    const Eigen::VectorXd out_is = floored(out_deg.array() + d.tau, degree_floor).cwiseSqrt().cwiseInverse();
    const Eigen::VectorXd in_is = floored(in_deg.array() + d.tau, degree_floor).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd L = out_is.asDiagonal() * A * in_is.asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
    d.left = svd.matrixU();
    d.right = svd.matrixV();
    d.singular_values = svd.singularValues();
    return d;
}

/// i(A - A^T), optionally scaled to D^{-1/2} (.) D^{-1/2} with D_l = sum_m |A_lm - A_ml|.
inline Eigen::MatrixXcd hermitian_adjacency(const Eigen::MatrixXd& A, bool normalize, double degree_floor = 1e-8) {
    const Eigen::MatrixXd skew = A - A.transpose();
    Eigen::MatrixXcd H = std::complex<double>(0.0, 1.0) * skew.cast<std::complex<double>>();
    if (normalize) {
        const Eigen::VectorXd inv_sqrt = floored(skew.cwiseAbs().rowwise().sum(), degree_floor).cwiseSqrt().cwiseInverse();
        H = inv_sqrt.cast<std::complex<double>>().asDiagonal() * H * inv_sqrt.cast<std::complex<double>>().asDiagonal();
    }
    return H;
}

struct HermitianSpectrum {
    Eigen::VectorXd eigenvalues;  // sorted by |lambda| descending
    Eigen::MatrixXcd eigenvectors;
};

inline HermitianSpectrum hermitian_spectrum(const Eigen::MatrixXcd& H, bool vectors = true) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw DataError("Hermitian eigensolver failed to converge");
    const auto p = H.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd& ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return std::abs(ev(a)) > std::abs(ev(b)); });
    HermitianSpectrum s;
    s.eigenvalues.resize(p);
    if (vectors) s.eigenvectors.resize(p, p);
    for (Eigen::Index r = 0; r < p; ++r) {
        s.eigenvalues(r) = ev(order[static_cast<std::size_t>(r)]);
        if (vectors) s.eigenvectors.col(r) = es.eigenvectors().col(order[static_cast<std::size_t>(r)]);
    }
    return s;
}

/// Largest |eigenvalue| of i(A - A^T).
inline double largest_hermitian_eigenvalue(const Eigen::MatrixXd& A) {
    if (A.rows() == 0) return 0.0;
    const auto s = hermitian_spectrum(hermitian_adjacency(A, false), false);
    return std::abs(s.eigenvalues(0));
}

// ---------------------------------------------------------------------------
// Algorithms
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int> raw_naive(const Eigen::MatrixXd& A, int k, const SpectralConfig& cfg) {
    if (k == 1) return std::vector<int>(static_cast<std::size_t>(A.rows()), 0);
    const Eigen::MatrixXd W = A + A.transpose();
    return kmeans(rw_laplacian_embedding(W, cfg.eigenvector_count(), cfg.degree_floor), k, cfg).labels;
}

inline std::vector<int> raw_bibliometric(const Eigen::MatrixXd& A, int k, const SpectralConfig& cfg) {
    if (k == 1) return std::vector<int>(static_cast<std::size_t>(A.rows()), 0);
    const Eigen::MatrixXd W = bibliometric_matrix(A, cfg.degree_floor);
    return kmeans(rw_laplacian_embedding(0.5 * (W + W.transpose()), cfg.eigenvector_count(), cfg.degree_floor), k, cfg).labels;
}

inline std::vector<int> raw_disim(const Eigen::MatrixXd& A, int k, const SpectralConfig& cfg, bool left) {
    if (k == 1) return std::vector<int>(static_cast<std::size_t>(A.rows()), 0);
    const auto d = disim_decomposition(A, cfg.disim_tau, cfg.degree_floor);
    const auto m = std::min<Eigen::Index>(cfg.eigenvector_count(), d.singular_values.size());
    Eigen::MatrixXd emb = (left ? d.left : d.right).leftCols(m);
    for (Eigen::Index r = 0; r < emb.rows(); ++r) {
        const double norm = emb.row(r).norm();
        if (norm > 0.0) emb.row(r) /= norm;
    }
    return kmeans(emb, k, cfg).labels;
}

inline std::vector<int> raw_hermitian(const Eigen::MatrixXd& A, int k, const SpectralConfig& cfg) {
    if (k == 1) return std::vector<int>(static_cast<std::size_t>(A.rows()), 0);
    const auto s = hermitian_spectrum(hermitian_adjacency(A, true, cfg.degree_floor));
    Eigen::Index above = 0;
    while (above < s.eigenvalues.size() && std::abs(s.eigenvalues(above)) > cfg.eig_tolerance) ++above;
    if (above == 0) throw DataError("no directed structure detected (all eigenvalues below tolerance)");
    const auto l = std::min<Eigen::Index>(cfg.eigenvector_count(), above);
    Eigen::MatrixXd emb(A.rows(), 2 * l);
    emb.leftCols(l) = s.eigenvectors.leftCols(l).real();
    emb.rightCols(l) = s.eigenvectors.leftCols(l).imag();
    return kmeans(emb, k, cfg).labels;
}

inline std::vector<int> raw_labels(Algorithm algo, const Eigen::MatrixXd& A, int k, const SpectralConfig& cfg) {
    switch (algo) {
        case Algorithm::Naive: return raw_naive(A, k, cfg);
        case Algorithm::Bibliometric: return raw_bibliometric(A, k, cfg);
        case Algorithm::DisimLeft: return raw_disim(A, k, cfg, true);
        case Algorithm::DisimRight: return raw_disim(A, k, cfg, false);
        case Algorithm::HermitianRW: return raw_hermitian(A, k, cfg);
    }
    return {};
}

}  // namespace detail

/// Weakly connected components, numbered by smallest member.
inline std::vector<std::vector<std::size_t>> weak_components(const Eigen::MatrixXd& A) {
    const auto p = static_cast<std::size_t>(A.rows());
    std::vector<int> comp(p, -1);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < p; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(out.size());
        out.emplace_back();
        std::vector<std::size_t> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            out.back().push_back(u);
            for (std::size_t v = 0; v < p; ++v)
                if (comp[v] < 0 && (A(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) != 0.0 ||
                                    A(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) != 0.0)) {
                    comp[v] = id;
                    stack.push_back(v);
                }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    return out;
}

/// Splits k across components proportionally to size, at least 1 each and
/// never more than the component size (largest remainder rounding).
inline std::vector<int> allocate_clusters(const std::vector<std::size_t>& sizes, int k) {
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    std::vector<int> alloc(sizes.size());
    std::vector<double> rem(sizes.size());
    int used = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        const double exact = static_cast<double>(k) * static_cast<double>(sizes[c]) / static_cast<double>(total);
        alloc[c] = std::clamp(static_cast<int>(std::floor(exact)), 1, static_cast<int>(sizes[c]));
        rem[c] = exact - std::floor(exact);
        used += alloc[c];
    }
    while (used > k) {
        std::size_t best = sizes.size();
        for (std::size_t c = 0; c < sizes.size(); ++c)
            if (alloc[c] > 1 && (best == sizes.size() || alloc[c] > alloc[best])) best = c;
        --alloc[best];
        --used;
    }
    while (used < k) {
        std::size_t best = sizes.size();
        for (std::size_t c = 0; c < sizes.size(); ++c)
            if (alloc[c] < static_cast<int>(sizes[c]) && (best == sizes.size() || rem[c] > rem[best])) best = c;
        ++alloc[best];
        rem[best] = -1.0;
        ++used;
    }
    return alloc;
}

/// Runs `algo` on A with k clusters. Disconnected graphs with no more
/// components than k are clustered per component with a proportional share of k.
inline Clustering cluster_network(const DirectedNetwork& net, Algorithm algo, const SpectralConfig& config) {
    config.validate();
    const auto p = static_cast<int>(net.size());
    if (config.k > p) throw std::invalid_argument("k=" + std::to_string(config.k) + " exceeds node count " + std::to_string(p));
    if (config.k == 1) return Clustering{std::vector<int>(static_cast<std::size_t>(p), 0), 1};
    const auto comps = weak_components(net.adjacency);
    Clustering raw;
    raw.k = config.k;
    if (comps.size() <= 1 || static_cast<int>(comps.size()) > config.k) {
        raw.labels = detail::raw_labels(algo, net.adjacency, config.k, config);
    } else {
        std::vector<std::size_t> sizes;
        for (const auto& c : comps) sizes.push_back(c.size());
        const auto alloc = allocate_clusters(sizes, config.k);
        raw.labels.assign(static_cast<std::size_t>(p), 0);
        int offset = 0;
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const auto& nodes = comps[c];
            const auto m = static_cast<Eigen::Index>(nodes.size());
            std::vector<int> sub(nodes.size(), 0);
            if (alloc[c] > 1) {
                Eigen::MatrixXd subA(m, m);
                for (Eigen::Index a = 0; a < m; ++a)
                    for (Eigen::Index b = 0; b < m; ++b)
                        subA(a, b) = net.adjacency(static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(a)]),
                                                   static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(b)]));
                SpectralConfig sc = config;
                sc.k = alloc[c];
                if (config.n_eigenvectors == 0) sc.n_eigenvectors = alloc[c];
                sc.seed = derive_seed(config.seed, 0x636f6d70ULL, c);
                sub = detail::raw_labels(algo, subA, alloc[c], sc);
            }
            for (std::size_t a = 0; a < nodes.size(); ++a) raw.labels[nodes[a]] = offset + sub[a];
            offset += alloc[c];
        }
    }
    return canonicalize(net, raw);
}

inline Clustering cluster_naive(const DirectedNetwork& A, const SpectralConfig& c) { return cluster_network(A, Algorithm::Naive, c); }
inline Clustering cluster_bibliometric(const DirectedNetwork& A, const SpectralConfig& c) {
    return cluster_network(A, Algorithm::Bibliometric, c);
}

enum class DisimSide { Left, Right };

inline Clustering cluster_disim(const DirectedNetwork& A, const SpectralConfig& c, DisimSide side) {
    return cluster_network(A, side == DisimSide::Left ? Algorithm::DisimLeft : Algorithm::DisimRight, c);
}

inline Clustering cluster_hermitian_rw(const DirectedNetwork& A, const SpectralConfig& c) {
    return cluster_network(A, Algorithm::HermitianRW, c);
}

}  // namespace leadlag
