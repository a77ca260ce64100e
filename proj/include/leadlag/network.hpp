#pragma once

// Directed lead-lag network, cluster meta-flow and leadingness ranking.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "leadlag/common.hpp"
#include "leadlag/metrics.hpp"

namespace leadlag {

/// A_ij = max(S_ij, 0); at most one orientation of each pair carries weight.
struct DirectedNetwork {
    Eigen::MatrixXd adjacency;
    std::vector<std::string> series_ids;

    std::size_t size() const { return static_cast<std::size_t>(adjacency.rows()); }
};

/// Assignment of p nodes to labels 0..k-1.
struct Clustering {
    std::vector<int> labels;
    int k = 1;

    std::size_t size() const { return labels.size(); }

    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
        return sizes;
    }

    void validate(std::size_t p) const {
        if (k < 1) throw std::invalid_argument("clustering needs k >= 1");
        if (labels.size() != p)
            throw std::invalid_argument("clustering covers " + std::to_string(labels.size()) + " nodes, expected " +
                                        std::to_string(p));
        for (int l : labels)
            if (l < 0 || l >= k) throw std::invalid_argument("cluster label " + std::to_string(l) + " out of range");
    }
};

struct MetaFlowGraph {
    Eigen::MatrixXd flow;  // k x k, skew-symmetric
    std::vector<std::size_t> cluster_sizes;
};

struct LeadingnessRanking {
    std::vector<double> cluster_scores;  // L(i) in original labels
    std::vector<double> node_rowsums;    // sum_m (A_lm - A_ml)
    std::vector<int> rank_permutation;   // rank_permutation[r] = original label at rank r
    std::vector<int> rank_of;            // inverse: rank_of[label] = rank
};

inline bool is_skew_symmetric(const Eigen::MatrixXd& S) {
    if (S.rows() != S.cols()) return false;
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
        if (S(i, i) != 0.0) return false;
        for (Eigen::Index j = i + 1; j < S.cols(); ++j)
            if (S(i, j) != -S(j, i)) return false;
    }
    return true;
}

inline DirectedNetwork build_network(const LeadLagMatrix& S) {
    if (!is_skew_symmetric(S.scores)) throw std::invalid_argument("build_network: lead-lag matrix is not skew-symmetric");
    return {S.scores.cwiseMax(0.0), S.series_ids};
}

/// Empirical quantile with linear interpolation between order statistics.
inline double empirical_quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("empirical_quantile of empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile must be in [0, 1]");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

/// Keeps only pairs whose |S_ij| exceeds the given quantile of the
/// off-diagonal magnitudes; the rest are zeroed in both orientations.
inline LeadLagMatrix magnitude_filter(const LeadLagMatrix& S, double quantile) {
    const auto p = S.scores.rows();
    std::vector<double> mags;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j) mags.push_back(std::abs(S.scores(i, j)));
    if (mags.empty()) return S;
    const double c = empirical_quantile(mags, quantile);
    LeadLagMatrix out = S;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
            if (!(std::abs(S.scores(i, j)) > c)) out.scores(i, j) = out.scores(j, i) = 0.0;
    return out;
}

namespace detail {

inline std::vector<std::vector<std::size_t>> members(const Clustering& c, std::size_t p) {
    c.validate(p);
    std::vector<std::vector<std::size_t>> m(static_cast<std::size_t>(c.k));
    for (std::size_t l = 0; l < p; ++l) m[static_cast<std::size_t>(c.labels[l])].push_back(l);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i].empty()) throw std::invalid_argument("cluster " + std::to_string(i) + " is empty");
    return m;
}

}  // namespace detail

/// F_ij = (1 / |C_i||C_j|) sum_{l in C_i, m in C_j} (A_lm - A_ml).
inline MetaFlowGraph meta_flow(const DirectedNetwork& A, const Clustering& clustering) {
    const auto groups = detail::members(clustering, A.size());
    const auto k = static_cast<Eigen::Index>(groups.size());
    MetaFlowGraph g;
    g.flow = Eigen::MatrixXd::Zero(k, k);
    for (const auto& m : groups) g.cluster_sizes.push_back(m.size());
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = a + 1; b < k; ++b) {
            double sum = 0.0;
            for (auto l : groups[static_cast<std::size_t>(a)])
                for (auto m : groups[static_cast<std::size_t>(b)])
                    sum += A.adjacency(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)) -
                           A.adjacency(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l));
            const double f = sum / static_cast<double>(groups[static_cast<std::size_t>(a)].size() *
                                                       groups[static_cast<std::size_t>(b)].size());
            g.flow(a, b) = f;
            g.flow(b, a) = -f;
        }
    return g;
}

/// L(i) = mean over l in C_i of the row sums of A - A^T; clusters ranked in
/// descending L(i), ties broken by the smaller original label.
inline LeadingnessRanking leadingness(const DirectedNetwork& A, const Clustering& clustering) {
    const auto groups = detail::members(clustering, A.size());
    LeadingnessRanking r;
    const Eigen::VectorXd rows = A.adjacency.rowwise().sum() - A.adjacency.colwise().sum().transpose();
    r.node_rowsums.assign(rows.data(), rows.data() + rows.size());
    for (const auto& m : groups) {
        double s = 0.0;
        for (auto l : m) s += r.node_rowsums[l];
        r.cluster_scores.push_back(s / static_cast<double>(m.size()));
    }
    r.rank_permutation.resize(groups.size());
    std::iota(r.rank_permutation.begin(), r.rank_permutation.end(), 0);
    std::stable_sort(r.rank_permutation.begin(), r.rank_permutation.end(), [&](int a, int b) {
        return r.cluster_scores[static_cast<std::size_t>(a)] > r.cluster_scores[static_cast<std::size_t>(b)];
    });
    r.rank_of.resize(groups.size());
    for (std::size_t rank = 0; rank < groups.size(); ++rank)
        r.rank_of[static_cast<std::size_t>(r.rank_permutation[rank])] = static_cast<int>(rank);
    return r;
}

/// Drops unused labels, then relabels so 0 is the most leading cluster.
inline Clustering canonicalize(const DirectedNetwork& A, const Clustering& raw) {
    raw.validate(A.size());
    std::vector<int> remap(static_cast<std::size_t>(raw.k), -1);
    for (int l : raw.labels) remap[static_cast<std::size_t>(l)] = 0;
    int next = 0;
    for (auto& slot : remap)
        if (slot == 0) slot = next++;
    Clustering compact;
    compact.k = next;
    compact.labels.resize(raw.labels.size());
    for (std::size_t i = 0; i < raw.labels.size(); ++i) compact.labels[i] = remap[static_cast<std::size_t>(raw.labels[i])];
    const auto rank = leadingness(A, compact);
    for (auto& l : compact.labels) l = rank.rank_of[static_cast<std::size_t>(l)];
    return compact;
}

/// Retains each unordered pair independently with `probability`; dropped
/// pairs are zeroed in both orientations.
inline LeadLagMatrix subsample_edges(const LeadLagMatrix& S, double probability, std::uint64_t seed) {
    if (!(probability > 0.0 && probability <= 1.0)) throw std::invalid_argument("probability must be in (0, 1]");
    if (probability == 1.0) return S;
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(probability);
    LeadLagMatrix out = S;
    const auto p = S.scores.rows();
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
            if (!keep(rng)) out.scores(i, j) = out.scores(j, i) = 0.0;
    return out;
}

}  // namespace leadlag
