#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leadlag/clustering.hpp"
#include "leadlag/common.hpp"
#include "leadlag/metrics.hpp"
#include "leadlag/network.hpp"
#include "leadlag/panel.hpp"

namespace leadlag {

/// Fraction of ground-truth-directed pairs whose score sign matches; a zero
/// score earns half credit.
inline double edge_accuracy(const Eigen::MatrixXd& S, const Eigen::MatrixXi& truth) {
    if (S.rows() != truth.rows() || S.cols() != truth.cols()) throw std::invalid_argument("edge_accuracy: dimension mismatch");
    double credit = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        for (Eigen::Index j = i + 1; j < S.cols(); ++j) {
            const int t = truth(i, j);
            if (t == 0) continue;
            ++pairs;
            const double s = S(i, j);
            if (s == 0.0)
                credit += 0.5;
            else if ((s > 0.0) == (t > 0))
                credit += 1.0;
        }
    if (pairs == 0) throw std::invalid_argument("edge_accuracy: ground truth has no directed pairs");
    return credit / static_cast<double>(pairs);
}

inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: label vectors differ in length");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < n; ++i) {
        joint[{a[i], b[i]}] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
    }
    auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, sa = 0.0, sb = 0.0;
    for (const auto& [key, c] : joint) index += c2(c);
    for (const auto& [key, c] : ra) sa += c2(c);
    for (const auto& [key, c] : rb) sb += c2(c);
    const double expected = sa * sb / c2(static_cast<double>(n));
    const double max_index = 0.5 * (sa + sb);
    if (max_index == expected) return 1.0;  // both partitions trivial and identical
    return (index - expected) / (max_index - expected);
}

inline double adjusted_rand_index(const Clustering& a, const Clustering& b) {
    return adjusted_rand_index(std::span<const int>(a.labels), std::span<const int>(b.labels));
}

/// Entry (i, j) = |A_i intersect B_j| / |A_i union B_j|.
inline Eigen::MatrixXd jaccard_matrix(const Clustering& a, const Clustering& b) {
    if (a.size() != b.size()) throw std::invalid_argument("jaccard_matrix: clusterings differ in length");
    if (a.size() == 0) throw std::invalid_argument("jaccard_matrix: empty clustering");
    a.validate(a.size());
    b.validate(b.size());
    Eigen::MatrixXd inter = Eigen::MatrixXd::Zero(a.k, b.k);
    for (std::size_t i = 0; i < a.size(); ++i) inter(a.labels[i], b.labels[i]) += 1.0;
    const auto sa = a.cluster_sizes();
    const auto sb = b.cluster_sizes();
    Eigen::MatrixXd out(a.k, b.k);
    for (int i = 0; i < a.k; ++i)
        for (int j = 0; j < b.k; ++j) {
            const double uni = static_cast<double>(sa[static_cast<std::size_t>(i)] + sb[static_cast<std::size_t>(j)]) - inter(i, j);
            out(i, j) = uni > 0.0 ? inter(i, j) / uni : 0.0;
        }
    return out;
}

/// Average ranks (1-based), ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double spearman_attribute_correlation(std::span<const double> rowsums, std::span<const double> attribute) {
    if (rowsums.size() != attribute.size()) throw std::invalid_argument("spearman: length mismatch");
    if (rowsums.size() < 3) throw std::invalid_argument("spearman: need at least 3 observations");
    const auto r1 = average_ranks(rowsums);
    const auto r2 = average_ranks(attribute);
    return pearson(r1, r2);
}

struct MeanCI {
    double mean = 0.0;
    double sd = 0.0;
    double half_width = 0.0;  // 1.96 sd / sqrt(n)
    std::size_t n = 0;
};

inline MeanCI mean_ci(std::span<const double> v) {
    MeanCI r;
    r.n = v.size();
    if (v.empty()) return r;
    r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        r.half_width = 1.96 * r.sd / std::sqrt(static_cast<double>(v.size()));
    }
    return r;
}

struct PermutationTestResult {
    double observed_statistic = 0.0;
    std::vector<double> null_samples;
    double p_value = 1.0;
    int n_monte_carlo = 0;
};

/// Add-one rank p-value; ties with the observed statistic count against it.
inline double rank_p_value(double observed, std::span<const double> null) {
    const auto exceed = std::count_if(null.begin(), null.end(), [&](double v) { return v >= observed; });
    return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(null.size()) + 1.0);
}

/// Null replicates permute the T rows of the returns panel and recompute
/// metric -> network -> largest |eigenvalue| of i(A - A^T).
inline PermutationTestResult permutation_test_largest_eigenvalue(const TimeSeriesPanel& returns, const LeadLagMetricSpec& spec,
                                                                 int n_mc, std::uint64_t seed, unsigned jobs = 1) {
    if (n_mc < 1) throw std::invalid_argument("permutation test needs n_mc >= 1");
    if (returns.kind != PanelKind::Differences) throw std::invalid_argument("permutation test expects a Differences panel");
    auto statistic = [&](const Eigen::MatrixXd& Y) {
        const auto S = leadlag_from_returns(Y, returns.series_ids, spec);
        return largest_hermitian_eigenvalue(build_network(S).adjacency);
    };
    PermutationTestResult r;
    r.n_monte_carlo = n_mc;
    r.observed_statistic = statistic(returns.values);
    r.null_samples.assign(static_cast<std::size_t>(n_mc), 0.0);
    parallel_for(static_cast<std::size_t>(n_mc), jobs, [&](std::size_t rep) {
        std::mt19937_64 rng(derive_seed(seed, 0x7065726dULL, rep));
        std::vector<Eigen::Index> order(static_cast<std::size_t>(returns.values.rows()));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Eigen::MatrixXd Y(returns.values.rows(), returns.values.cols());
        for (Eigen::Index t = 0; t < Y.rows(); ++t) Y.row(t) = returns.values.row(order[static_cast<std::size_t>(t)]);
        try {
            r.null_samples[rep] = statistic(Y);
        } catch (const std::exception& e) {
            throw DataError("permutation replicate " + std::to_string(rep) + ": " + e.what());
        }
    });
    r.p_value = rank_p_value(r.observed_statistic, r.null_samples);
    return r;
}

}  // namespace leadlag
