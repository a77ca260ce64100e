#pragma once

// Pairwise lead-lag scores: cross-correlation functionals and the
// signature (Levy area) metric, assembled into a skew-symmetric matrix.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leadlag/common.hpp"
#include "leadlag/correlation.hpp"
#include "leadlag/panel.hpp"

namespace leadlag {

enum class Functional { CcfLag1, CcfAuc, Signature };

inline std::string to_string(Functional f) {
    switch (f) {
        case Functional::CcfLag1: return "ccf-lag1";
        case Functional::CcfAuc: return "ccf-auc";
        case Functional::Signature: return "signature";
    }
    return "?";
}

inline Functional parse_functional(const std::string& s) {
    if (s == "ccf-lag1") return Functional::CcfLag1;
    if (s == "ccf-auc") return Functional::CcfAuc;
    if (s == "signature") return Functional::Signature;
    throw std::invalid_argument("unknown functional '" + s + "' (ccf-lag1|ccf-auc|signature)");
}

struct LeadLagMetricSpec {
    Functional functional = Functional::CcfAuc;
    CorrelationKind correlation{};  // ignored by Signature
    int max_lag = 5;                // CcfAuc only

    void validate() const {
        if (max_lag < 1) throw std::invalid_argument("max_lag must be >= 1");
        if (functional != Functional::Signature) correlation.validate();
    }

    /// Short label, e.g. "ccf-auc/dcor" or "signature".
    std::string label() const {
        if (functional == Functional::Signature) return "signature";
        return to_string(functional) + "/" + to_string(correlation.type);
    }
};

/// p x p skew-symmetric matrix; scores(i, j) > 0 means i leads j.
struct LeadLagMatrix {
    Eigen::MatrixXd scores;
    std::vector<std::string> series_ids;

    std::size_t size() const { return static_cast<std::size_t>(scores.rows()); }
};

/// corr({Y^i_{t-lag}}, {Y^j_t}) over the maximal aligned overlap.
inline double ccf(std::span<const double> yi, std::span<const double> yj, int lag, const CorrelationKind& kind) {
    if (yi.size() != yj.size()) throw std::invalid_argument("ccf: series lengths differ");
    const std::size_t n = yi.size();
    const std::size_t a = static_cast<std::size_t>(std::abs(lag));
    if (a >= n || n - a < 3)
        throw std::invalid_argument("ccf: insufficient overlap at lag " + std::to_string(lag) + " for n=" + std::to_string(n));
    const std::size_t m = n - a;
    if (lag >= 0) return sample_correlation(yi.subspan(0, m), yj.subspan(a, m), kind);
    return sample_correlation(yi.subspan(a, m), yj.subspan(0, m), kind);
}

inline double ccf_lag1(std::span<const double> yi, std::span<const double> yj, const CorrelationKind& kind) {
    return ccf(yi, yj, 1, kind) - ccf(yi, yj, -1, kind);
}

/// Signed normalized comparison of the summed absolute cross-correlations
/// I(i,j) = sum_{l=1..L} |ccf^{ij}(l)| against I(j,i).
inline double ccf_auc_from_sums(double forward, double backward) {
    const double total = forward + backward;
    if (!(total > 0.0) || forward == backward) return 0.0;
    const double sign = forward > backward ? 1.0 : -1.0;
    return sign * std::max(forward, backward) / total;
}

inline double ccf_auc(std::span<const double> yi, std::span<const double> yj, const CorrelationKind& kind, int max_lag) {
    if (max_lag < 1) throw std::invalid_argument("ccf_auc: max_lag must be >= 1");
    double forward = 0.0, backward = 0.0;
    for (int l = 1; l <= max_lag; ++l) {
        forward += std::abs(ccf(yi, yj, l, kind));
        backward += std::abs(ccf(yj, yi, l, kind));
    }
    return ccf_auc_from_sums(forward, backward);
}

/// Discrete Levy area sum_{s<t} (dXi_s dXj_t - dXj_s dXi_t) of the
/// piecewise-linear path (xi, xj), via running sums in O(n).
inline double signature_leadlag(std::span<const double> xi, std::span<const double> xj) {
    if (xi.size() != xj.size()) throw std::invalid_argument("signature_leadlag: series lengths differ");
    if (xi.size() < 2) throw std::invalid_argument("signature_leadlag: need at least 2 points");
    double area = 0.0;
    for (std::size_t t = 1; t < xi.size(); ++t) {
        const double di = xi[t] - xi[t - 1];
        const double dj = xj[t] - xj[t - 1];
        area += (xi[t - 1] - xi[0]) * dj - (xj[t - 1] - xj[0]) * di;
    }
    return area;
}

/// Score of the ordered pair (i, j) under `spec`; inputs are returns for the
/// ccf functionals and normalized levels for Signature.
inline double pair_score(std::span<const double> a, std::span<const double> b, const LeadLagMetricSpec& spec) {
    switch (spec.functional) {
        case Functional::CcfLag1: return ccf_lag1(a, b, spec.correlation);
        case Functional::CcfAuc: return ccf_auc(a, b, spec.correlation, spec.max_lag);
        case Functional::Signature: return signature_leadlag(a, b);
    }
    return 0.0;
}

namespace detail {

// Fills S from column series of `data`. Only i < j is evaluated; S_ji = -S_ij.
inline LeadLagMatrix fill_matrix(const Eigen::MatrixXd& data, const std::vector<std::string>& ids,
                                 const LeadLagMetricSpec& spec, unsigned jobs) {
    const std::size_t p = static_cast<std::size_t>(data.cols());
    const std::size_t T = static_cast<std::size_t>(data.rows());
    LeadLagMatrix out;
    out.series_ids = ids;
    out.scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(p * (p - 1) / 2);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
    std::vector<double> values(pairs.size());
    parallel_for(pairs.size(), jobs, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        std::span<const double> a(data.col(static_cast<Eigen::Index>(i)).data(), T);
        std::span<const double> b(data.col(static_cast<Eigen::Index>(j)).data(), T);
        try {
            const double v = pair_score(a, b, spec);
            if (!std::isfinite(v)) throw DataError("non-finite score");
            values[k] = v;
        } catch (const std::exception& e) {
            throw DataError("lead-lag pair (" + ids[i] + ", " + ids[j] + "): " + e.what());
        }
    });
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        out.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[k];
        out.scores(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = -values[k];
    }
    return out;
}

}  // namespace detail

/// Builds S from a panel whose kind matches the metric: Differences for the
/// ccf functionals, (normalized) Levels for Signature.
inline LeadLagMatrix leadlag_matrix(const TimeSeriesPanel& panel, const LeadLagMetricSpec& spec, unsigned jobs = 1) {
    spec.validate();
    if (panel.cols() < 2) throw std::invalid_argument("leadlag_matrix needs at least 2 series");
    const bool wants_levels = spec.functional == Functional::Signature;
    if (wants_levels && panel.kind != PanelKind::Levels)
        throw std::invalid_argument("signature metric expects a normalized Levels panel");
    if (!wants_levels && panel.kind != PanelKind::Differences)
        throw std::invalid_argument("cross-correlation metrics expect a Differences panel");
    return detail::fill_matrix(panel.values, panel.series_ids, spec, jobs);
}

/// Convenience entry point from a returns matrix (T x p): Signature paths
/// are the cumulative sums of each column, standardized per series.
inline LeadLagMatrix leadlag_from_returns(const Eigen::MatrixXd& returns, const std::vector<std::string>& ids,
                                          const LeadLagMetricSpec& spec, unsigned jobs = 1) {
    spec.validate();
    if (returns.cols() < 2) throw std::invalid_argument("leadlag_matrix needs at least 2 series");
    if (spec.functional != Functional::Signature) return detail::fill_matrix(returns, ids, spec, jobs);
    const Eigen::Index T = returns.rows();
    Eigen::MatrixXd levels(T + 1, returns.cols());
    levels.row(0).setZero();
    for (Eigen::Index r = 0; r < T; ++r) levels.row(r + 1) = levels.row(r) + returns.row(r);
    for (Eigen::Index c = 0; c < levels.cols(); ++c) {
        auto col = levels.col(c);
        col.array() -= col.mean();
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(T));
        if (!(sd > 1e-300)) throw DataError("zero-variance path for series '" + ids[static_cast<std::size_t>(c)] + "'");
        col /= sd;
    }
    return detail::fill_matrix(levels, ids, spec, jobs);
}

inline LeadLagMatrix leadlag_from_returns(const TimeSeriesPanel& returns, const LeadLagMetricSpec& spec, unsigned jobs = 1) {
    if (returns.kind != PanelKind::Differences) throw std::invalid_argument("expected a Differences panel");
    return leadlag_from_returns(returns.values, returns.series_ids, spec, jobs);
}

}  // namespace leadlag
