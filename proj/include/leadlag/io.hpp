#pragma once

// File formats: dense lead-lag CSV, JSON edge lists, clustering and
// meta-flow JSON, DOT export and the synthetic ground-truth sidecar.

#include <Eigen/Dense>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "leadlag/network.hpp"
#include "leadlag/panel.hpp"
#include "leadlag/synthetic.hpp"

namespace leadlag::io {

using json = nlohmann::ordered_json;

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write file: " + path);
    return os;
}

inline void write_text(const std::string& path, const std::string& text) {
    auto os = open_out(path);
    os << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("invalid JSON in " + path + ": " + e.what());
    }
}

// --- lead-lag matrix -------------------------------------------------------

inline std::string matrix_csv(const LeadLagMatrix& S) {
    std::ostringstream os;
    os << "series";
    for (const auto& id : S.series_ids) os << ',' << id;
    os << '\n';
    for (std::size_t i = 0; i < S.size(); ++i) {
        os << S.series_ids[i];
        for (std::size_t j = 0; j < S.size(); ++j)
            os << ',' << detail::format_double(S.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        os << '\n';
    }
    return os.str();
}

inline LeadLagMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty matrix file: " + path);
    const auto header = detail::split_csv_line(line);
    LeadLagMatrix S;
    for (std::size_t c = 1; c < header.size(); ++c) S.series_ids.emplace_back(header[c]);
    const auto p = static_cast<Eigen::Index>(S.series_ids.size());
    if (p < 1) throw DataError("matrix file has no series: " + path);
    S.scores.resize(p, p);
    Eigen::Index r = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (r >= p || static_cast<Eigen::Index>(cells.size()) != p + 1) throw DataError("matrix file is not square: " + path);
        if (std::string(cells[0]) != S.series_ids[static_cast<std::size_t>(r)])
            throw DataError("row id '" + std::string(cells[0]) + "' does not match column order in " + path);
        for (Eigen::Index c = 0; c < p; ++c) {
            const auto v = detail::parse_double(cells[static_cast<std::size_t>(c + 1)]);
            if (!v) throw DataError("non-numeric matrix entry in " + path);
            S.scores(r, c) = *v;
        }
        ++r;
    }
    if (r != p) throw DataError("matrix file is not square: " + path);
    if (!is_skew_symmetric(S.scores)) throw DataError("lead-lag matrix is not skew-symmetric: " + path);
    return S;
}

/// Edges i -> j with S_ij > 0.
inline json edge_list(const LeadLagMatrix& S) {
    json edges = json::array();
    for (std::size_t i = 0; i < S.size(); ++i)
        for (std::size_t j = 0; j < S.size(); ++j) {
            const double w = S.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (w > 0.0) edges.push_back({{"src", S.series_ids[i]}, {"dst", S.series_ids[j]}, {"weight", w}});
        }
    return edges;
}

// --- clustering ------------------------------------------------------------

struct ClusteringMetadata {
    std::string algorithm;
    std::uint64_t seed = 0;
    std::vector<double> leadingness;
};

inline json clustering_json(const Clustering& c, const std::vector<std::string>& ids, const ClusteringMetadata& meta) {
    json labels = json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) labels[ids[i]] = c.labels[i];
    json j;
    j["algorithm"] = meta.algorithm;
    j["k"] = c.k;
    j["seed"] = meta.seed;
    j["cluster_sizes"] = c.cluster_sizes();
    j["leadingness"] = meta.leadingness;
    j["labels"] = labels;
    return j;
}

/// Reads {labels: {id: label}} in the order of `ids` (or file order if empty).
inline Clustering read_clustering(const json& j, std::vector<std::string>* ids_out = nullptr) {
    if (!j.contains("labels") || !j["labels"].is_object()) throw DataError("clustering JSON needs a 'labels' object");
    Clustering c;
    int max_label = -1;
    for (const auto& [id, label] : j["labels"].items()) {
        if (!label.is_number_integer()) throw DataError("label for '" + id + "' is not an integer");
        c.labels.push_back(label.get<int>());
        max_label = std::max(max_label, c.labels.back());
        if (ids_out) ids_out->push_back(id);
    }
    c.k = j.contains("k") ? j["k"].get<int>() : max_label + 1;
    c.validate(c.labels.size());
    return c;
}

// --- meta-flow -------------------------------------------------------------

inline json meta_flow_json(const MetaFlowGraph& F, const LeadingnessRanking& rank) {
    json nodes = json::array(), edges = json::array();
    const auto k = F.flow.rows();
    for (Eigen::Index i = 0; i < k; ++i)
        nodes.push_back({{"id", i}, {"size", F.cluster_sizes[static_cast<std::size_t>(i)]},
                         {"leadingness", rank.cluster_scores[static_cast<std::size_t>(i)]}});
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            if (F.flow(i, j) > 0.0) edges.push_back({{"src", i}, {"dst", j}, {"flow", F.flow(i, j)}});
    return {{"nodes", nodes}, {"edges", edges}};
}

inline std::string meta_flow_dot(const MetaFlowGraph& F, const LeadingnessRanking& rank) {
    std::ostringstream os;
    os << "digraph metaflow {\n  rankdir=LR;\n";
    for (Eigen::Index i = 0; i < F.flow.rows(); ++i)
        os << "  c" << i << " [label=\"C" << i << "\\nn=" << F.cluster_sizes[static_cast<std::size_t>(i)]
           << "\\nL=" << detail::format_double(rank.cluster_scores[static_cast<std::size_t>(i)]) << "\"];\n";
    for (Eigen::Index i = 0; i < F.flow.rows(); ++i)
        for (Eigen::Index j = 0; j < F.flow.cols(); ++j)
            if (F.flow(i, j) > 0.0)
                os << "  c" << i << " -> c" << j << " [label=\"" << detail::format_double(F.flow(i, j)) << "\"];\n";
    os << "}\n";
    return os.str();
}

inline std::string leadingness_csv(const MetaFlowGraph& F, const LeadingnessRanking& rank) {
    std::ostringstream os;
    os << "cluster,size,leadingness\n";
    for (std::size_t i = 0; i < F.cluster_sizes.size(); ++i)
        os << i << ',' << F.cluster_sizes[i] << ',' << detail::format_double(rank.cluster_scores[i]) << '\n';
    return os.str();
}

// --- synthetic ground truth ------------------------------------------------

inline json ground_truth_json(const SyntheticSpec& s, const GroundTruth& g, const std::vector<std::string>& ids) {
    json labels = json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) labels[ids[i]] = g.clustering.labels[i];
    json j;
    j["setting"] = to_string(s.setting);
    j["T"] = s.T;
    j["p"] = s.p;
    j["sigma"] = s.sigma;
    j["seed"] = s.seed;
    j["K"] = s.K;
    j["lags"] = s.lags;
    j["factors"] = s.factors;
    j["k"] = g.clustering.k;
    j["labels"] = labels;
    return j;
}

/// Rebuilds the ground truth (clusters and edge directions) from a sidecar.
inline GroundTruth read_ground_truth(const json& j) {
    SyntheticSpec s;
    s.setting = parse_setting(j.at("setting").get<std::string>());
    s.T = j.at("T").get<int>();
    s.p = j.at("p").get<int>();
    s.K = j.value("K", 1);
    s.lags = j.at("lags").get<std::vector<int>>();
    if (j.contains("factors")) s.factors = j["factors"].get<std::vector<int>>();
    s.validate();
    return ground_truth(s);
}

}  // namespace leadlag::io
