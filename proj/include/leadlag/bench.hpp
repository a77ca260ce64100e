#pragma once

// Synthetic benchmark grid: setting x sigma x repetition x metric x
// clustering algorithm x k, scored by edge accuracy and ARI.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "leadlag/clustering.hpp"
#include "leadlag/common.hpp"
#include "leadlag/evaluation.hpp"
#include "leadlag/metrics.hpp"
#include "leadlag/synthetic.hpp"

namespace leadlag {

struct BenchRow {
    Setting setting;
    double sigma;
    int rep;
    std::string metric;
    std::string algorithm;
    int k;
    double accuracy;
    double ari;
};

struct BenchGrid {
    std::vector<Setting> settings{Setting::Linear};
    std::vector<double> sigmas{0.0};
    int reps = 16;
    std::vector<LeadLagMetricSpec> metrics;
    std::vector<Algorithm> algorithms{Algorithm::HermitianRW};
    std::vector<int> ks;  // empty: the ground-truth cluster count
    std::uint64_t seed = 0;
    std::optional<int> T, p;  // override the default panel shape
    SpectralConfig spectral{};
};

/// The metrics compared in the benchmark: ccf-lag1 and ccf-auc under each
/// correlation, plus the signature metric.
inline std::vector<LeadLagMetricSpec> standard_metrics(int max_lag = 5, int mi_bins = 8) {
    std::vector<LeadLagMetricSpec> out;
    for (auto f : {Functional::CcfLag1, Functional::CcfAuc})
        for (auto c : {CorrelationType::Pearson, CorrelationType::Kendall, CorrelationType::DistanceCorrelation,
                       CorrelationType::MutualInformation})
            out.push_back({f, {c, mi_bins}, max_lag});
    out.push_back({Functional::Signature, {}, max_lag});
    return out;
}

inline std::vector<Algorithm> standard_algorithms() {
    return {Algorithm::Naive, Algorithm::Bibliometric, Algorithm::DisimLeft, Algorithm::DisimRight, Algorithm::HermitianRW};
}

/// Panel spec for one repetition. The seed depends on (setting, rep) only,
/// so every sigma in a sweep shares the latent draws of a repetition.
inline SyntheticSpec bench_spec(const BenchGrid& g, Setting setting, double sigma, int rep) {
    auto spec = default_spec(setting, sigma);
    if (g.p && *g.p != spec.p) {
        auto full = spec;
        spec.p = *g.p;
        spec.lags.resize(static_cast<std::size_t>(spec.p));
        for (int i = 0; i < spec.p; ++i) spec.lags[static_cast<std::size_t>(i)] = full.lags[static_cast<std::size_t>(i * 100 / spec.p)];
        if (setting == Setting::Heterogeneous) {
            spec.factors.resize(static_cast<std::size_t>(spec.p));
            for (int i = 0; i < spec.p; ++i)
                spec.factors[static_cast<std::size_t>(i)] = full.factors[static_cast<std::size_t>(i * 100 / spec.p)];
        }
    }
    if (g.T) spec.T = *g.T;
    spec.seed = derive_seed(g.seed, static_cast<std::uint64_t>(setting) + 1, static_cast<std::uint64_t>(rep));
    return spec;
}

/// All rows for one (setting, sigma, rep): each metric matrix is computed once
/// and shared across algorithms and k values.
inline std::vector<BenchRow> run_bench_cell(const BenchGrid& g, Setting setting, double sigma, int rep, unsigned jobs = 1) {
    const auto spec = bench_spec(g, setting, sigma, rep);
    const auto [panel, truth] = generate(spec);
    std::vector<BenchRow> rows;
    const std::vector<int> ks = g.ks.empty() ? std::vector<int>{truth.clustering.k} : g.ks;
    for (const auto& metric : g.metrics) {
        const auto S = leadlag_from_returns(panel, metric, jobs);
        const double acc = edge_accuracy(S.scores, truth.edge_direction);
        const auto net = build_network(S);
        for (auto algo : g.algorithms)
            for (int k : ks) {
                SpectralConfig cfg = g.spectral;
                cfg.k = k;
                cfg.n_eigenvectors = 0;
                cfg.seed = derive_seed(g.seed, 0x636c7573ULL, static_cast<std::uint64_t>(rep));
                const auto c = cluster_network(net, algo, cfg);
                rows.push_back({setting, sigma, rep, metric.label(), to_string(algo), k, acc,
                                adjusted_rand_index(c, truth.clustering)});
            }
    }
    return rows;
}

/// Full grid; cells evaluate concurrently and are gathered in grid order.
inline std::vector<BenchRow> run_bench(const BenchGrid& g, unsigned jobs = 1) {
    std::vector<std::tuple<Setting, double, int>> cells;
    for (auto s : g.settings)
        for (double sigma : g.sigmas)
            for (int rep = 0; rep < g.reps; ++rep) cells.emplace_back(s, sigma, rep);
    std::vector<std::vector<BenchRow>> out(cells.size());
    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        const auto& [s, sigma, rep] = cells[i];
        out[i] = run_bench_cell(g, s, sigma, rep);
    });
    std::vector<BenchRow> rows;
    for (auto& v : out) rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

struct BenchSummary {
    Setting setting;
    double sigma;
    std::string metric;
    std::string algorithm;
    int k;
    MeanCI accuracy;
    MeanCI ari;
};

inline std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
    using Key = std::tuple<int, double, std::string, std::string, int>;
    std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
    std::vector<Key> order;
    for (const auto& r : rows) {
        Key key{static_cast<int>(r.setting), r.sigma, r.metric, r.algorithm, r.k};
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.first.push_back(r.accuracy);
        it->second.second.push_back(r.ari);
    }
    std::vector<BenchSummary> out;
    for (const auto& key : order) {
        const auto& [acc, ari] = groups.at(key);
        out.push_back({static_cast<Setting>(std::get<0>(key)), std::get<1>(key), std::get<2>(key), std::get<3>(key),
                       std::get<4>(key), mean_ci(acc), mean_ci(ari)});
    }
    return out;
}

}  // namespace leadlag
