#pragma once

// Rolling cluster-to-cluster forecasting backtest.
//
// At each refit day tau (every update_period days) the lead-lag network,
// clustering, meta-flow and pair regressions are re-estimated on rows
// [tau - lookback + 1, tau]. On each day t the cluster signal sign(sum_i
// Ftilde_ij theta_ij x^{(i)}_{t+1}) is formed from data up to and including
// t and earns the day t+1 return.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leadlag/clustering.hpp"
#include "leadlag/common.hpp"
#include "leadlag/evaluation.hpp"
#include "leadlag/metrics.hpp"
#include "leadlag/network.hpp"
#include "leadlag/panel.hpp"

namespace leadlag {

struct BacktestConfig {
    int lookback = 252;
    int update_period = 42;
    double ewma_alpha = 0.4;
    double flow_quantile = 0.90;
    int vol_window = 21;
    double vol_target_annual = 0.10;
    double vol_floor = 1e-4;  // daily
    int k = 10;
    int annualization = 252;
    std::uint64_t seed = 0;
    SpectralConfig spectral{};  // k and seed are taken from this config

    void validate() const {
        if (lookback <= update_period) throw std::invalid_argument("lookback must exceed update_period");
        if (update_period < 1 || vol_window < 2) throw std::invalid_argument("update_period >= 1 and vol_window >= 2 required");
        if (!(ewma_alpha > 0.0 && ewma_alpha < 1.0)) throw std::invalid_argument("ewma_alpha must be in (0, 1)");
        if (!(flow_quantile >= 0.0 && flow_quantile < 1.0)) throw std::invalid_argument("flow_quantile must be in [0, 1)");
        if (k < 1) throw std::invalid_argument("k must be >= 1");
    }
};

/// Per-day mean of constituent returns; column j is cluster j.
inline Eigen::MatrixXd cluster_mean_returns(const Eigen::MatrixXd& returns, const Clustering& c) {
    c.validate(static_cast<std::size_t>(returns.cols()));
    const auto sizes = c.cluster_sizes();
    for (std::size_t j = 0; j < sizes.size(); ++j)
        if (sizes[j] == 0) throw std::invalid_argument("cluster " + std::to_string(j) + " is empty");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(returns.rows(), c.k);
    for (Eigen::Index m = 0; m < returns.cols(); ++m) out.col(c.labels[static_cast<std::size_t>(m)]) += returns.col(m);
    for (int j = 0; j < c.k; ++j) out.col(j) /= static_cast<double>(sizes[static_cast<std::size_t>(j)]);
    return out;
}

inline Eigen::MatrixXd cluster_mean_returns(const TimeSeriesPanel& panel, const Clustering& c) {
    return cluster_mean_returns(panel.values, c);
}

/// x_t = sum_{l=1..t} (1 - alpha)^{l-1} y_{t-l}: only rows strictly before t.
inline double ewma_feature(std::span<const double> y, double alpha, std::size_t t) {
    if (t > y.size()) throw std::invalid_argument("ewma_feature: t beyond series end");
    double x = 0.0, w = 1.0;
    for (std::size_t l = 1; l <= t; ++l) {
        x += w * y[t - l];
        w *= 1.0 - alpha;
    }
    return x;
}

/// All features at once: row t of the (T+1) x k result is x_t (row 0 is zero).
inline Eigen::MatrixXd ewma_features(const Eigen::MatrixXd& y, double alpha) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(y.rows() + 1, y.cols());
    for (Eigen::Index t = 1; t <= y.rows(); ++t) x.row(t) = y.row(t - 1) + (1.0 - alpha) * x.row(t - 1);
    return x;
}

struct PairModels {
    Eigen::MatrixXd theta;  // theta(i, j): feature of cluster i -> target cluster j
    int degenerate_features = 0;
};

/// Through-origin OLS of y^{(j)}_t on x^{(i)}_t over rows [begin, end).
/// `features` row t must be x_t; `targets` row t is y_t.
inline PairModels fit_pair_models(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, Eigen::Index begin,
                                  Eigen::Index end) {
    if (end - begin < 2) throw std::invalid_argument("fit_pair_models: window needs at least 2 rows");
    const auto X = features.middleRows(begin, end - begin);
    const auto Y = targets.middleRows(begin, end - begin);
    PairModels m;
    const Eigen::MatrixXd xy = X.transpose() * Y;
    const Eigen::VectorXd xx = X.colwise().squaredNorm().transpose();
    m.theta = Eigen::MatrixXd::Zero(X.cols(), Y.cols());
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
        if (!(xx(i) > 0.0)) {
            ++m.degenerate_features;
            continue;
        }
        m.theta.row(i) = xy.row(i) / xx(i);
    }
    return m;
}

/// Ftilde_ij = 1{F_ij > c}, c the linear-interpolation quantile of the
/// off-diagonal entries of F.
inline Eigen::MatrixXi threshold_flow(const MetaFlowGraph& F, double quantile) {
    const auto k = F.flow.rows();
    Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(k, k);
    if (k < 2) return mask;
    std::vector<double> off;
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            if (i != j) off.push_back(F.flow(i, j));
    const double c = empirical_quantile(off, quantile);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            if (i != j && F.flow(i, j) > c) mask(i, j) = 1;
    return mask;
}

// ---------------------------------------------------------------------------
// Sharpe ratio test
// ---------------------------------------------------------------------------

struct SharpeTest {
    double sharpe_daily = 0.0;
    double sharpe_annualized = 0.0;
    double variance = 0.0;  // asymptotic variance of the daily estimate
    double z = 0.0;
    double p_one_sided = 1.0;
    double skewness = 0.0;
    double kurtosis = 3.0;  // non-excess
    std::size_t n = 0;
};

/// [1 - skew * SR + (kurt - 1) / 4 * SR^2] / n
inline double sharpe_variance(double sr, double skewness, double kurtosis, std::size_t n) {
    return (1.0 - skewness * sr + (kurtosis - 1.0) / 4.0 * sr * sr) / static_cast<double>(n);
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline SharpeTest sharpe_test(std::span<const double> r, int annualization) {
    const std::size_t n = r.size();
    if (n < 30) throw std::invalid_argument("sharpe_test needs at least 30 returns, got " + std::to_string(n));
    const double nn = static_cast<double>(n);
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / nn;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : r) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= nn;
    m3 /= nn;
    m4 /= nn;
    const double sd = std::sqrt(m2 * nn / (nn - 1.0));
    if (!(sd > 1e-14 * std::abs(mean)) || sd < 1e-300) throw DataError("sharpe_test: zero standard deviation");
    SharpeTest t;
    t.n = n;
    t.sharpe_daily = mean / sd;
    t.sharpe_annualized = t.sharpe_daily * std::sqrt(static_cast<double>(annualization));
    t.skewness = m3 / std::pow(m2, 1.5);
    t.kurtosis = m4 / (m2 * m2);
    t.variance = sharpe_variance(t.sharpe_daily, t.skewness, t.kurtosis, n);
    t.z = t.variance > 0.0 ? t.sharpe_daily / std::sqrt(t.variance) : 0.0;
    t.p_one_sided = normal_sf(t.z);
    return t;
}

// ---------------------------------------------------------------------------
// Rolling backtest
// ---------------------------------------------------------------------------

struct BacktestReport {
    std::vector<std::string> timestamps;  // of the evaluated (post-warmup) days
    std::vector<double> daily_returns;    // volatility-targeted
    std::vector<double> cumulative_return;
    double sharpe_annualized = 0.0;
    double sharpe_p_value_one_sided = 1.0;
    std::optional<double> market_correlation;
    double mean_daily_return_bp = 0.0;
    int refits = 0;

    // Diagnostics over every signal day t (signal formed after the close of t).
    std::vector<std::string> signal_timestamps;
    Eigen::MatrixXi equity_signals;             // days x p, values in {-1, 0, 1}
    std::vector<std::vector<int>> cluster_signals;  // per day, length k of that refit
    std::vector<double> unscaled_returns;           // per traded day t+1
};

/// Network and clustering estimated at one refit day.
struct RefitState {
    Eigen::Index day = 0;  // tau
    DirectedNetwork network;
    Clustering clustering;
};

inline std::vector<Eigen::Index> refit_days(Eigen::Index rows, const BacktestConfig& cfg) {
    std::vector<Eigen::Index> days;
    for (Eigen::Index tau = cfg.lookback - 1; tau < rows; tau += cfg.update_period) days.push_back(tau);
    return days;
}

/// Metric -> network -> clustering for every refit window.
inline std::vector<RefitState> estimate_refits(const TimeSeriesPanel& returns, const LeadLagMetricSpec& spec, Algorithm algo,
                                               const BacktestConfig& cfg, unsigned jobs = 1) {
    std::vector<RefitState> states;
    int m = 0;
    for (auto tau : refit_days(returns.values.rows(), cfg)) {
        RefitState s;
        s.day = tau;
        const Eigen::MatrixXd window = returns.values.middleRows(tau - cfg.lookback + 1, cfg.lookback);
        s.network = build_network(leadlag_from_returns(window, returns.series_ids, spec, jobs));
        SpectralConfig sc = cfg.spectral;
        sc.k = cfg.k;
        sc.seed = derive_seed(cfg.seed, 0x7265666974ULL, static_cast<std::uint64_t>(m++));
        s.clustering = cluster_network(s.network, algo, sc);
        states.push_back(std::move(s));
    }
    return states;
}

/// Trades the signal given the per-refit networks and clusterings.
inline BacktestReport simulate_backtest(const TimeSeriesPanel& returns, const std::vector<RefitState>& refits,
                                        const BacktestConfig& cfg, std::span<const double> benchmark = {}) {
    const Eigen::MatrixXd& Y = returns.values;
    const Eigen::Index T = Y.rows();
    const Eigen::Index p = Y.cols();
    BacktestReport rep;
    rep.refits = static_cast<int>(refits.size());
    if (refits.empty()) throw DataError("insufficient history: no refit window fits in the panel");

    const Eigen::Index first_signal = refits.front().day;
    rep.equity_signals = Eigen::MatrixXi::Zero(T - first_signal, p);
    std::vector<double> unscaled(static_cast<std::size_t>(T), 0.0);

    for (std::size_t m = 0; m < refits.size(); ++m) {
        const auto& st = refits[m];
        const Eigen::Index tau = st.day;
        const Eigen::Index next = m + 1 < refits.size() ? refits[m + 1].day : T;
        const Eigen::MatrixXd means = cluster_mean_returns(Y.topRows(tau + 1), st.clustering);
        const Eigen::MatrixXd feat = ewma_features(means, cfg.ewma_alpha);
        const auto models = fit_pair_models(feat, means, tau - cfg.lookback + 1, tau + 1);
        const auto F = meta_flow(st.network, st.clustering);
        const Eigen::MatrixXi mask = threshold_flow(F, cfg.flow_quantile);
        const Eigen::MatrixXd weights = mask.cast<double>().cwiseProduct(models.theta);

        // Running EWMA state continues past tau with the refit's clustering.
        Eigen::RowVectorXd x = feat.row(tau + 1);
        for (Eigen::Index t = tau; t < next; ++t) {
            if (t > tau) {
                Eigen::RowVectorXd y_t = Eigen::RowVectorXd::Zero(st.clustering.k);
                const auto sizes = st.clustering.cluster_sizes();
                for (Eigen::Index n = 0; n < p; ++n) y_t(st.clustering.labels[static_cast<std::size_t>(n)]) += Y(t, n);
                for (int j = 0; j < st.clustering.k; ++j) y_t(j) /= static_cast<double>(sizes[static_cast<std::size_t>(j)]);
                x = y_t + (1.0 - cfg.ewma_alpha) * x;
            }
            const Eigen::RowVectorXd pred = x * weights;  // pred(j) = sum_i w_ij x_i
            std::vector<int> csig(static_cast<std::size_t>(st.clustering.k));
            for (int j = 0; j < st.clustering.k; ++j) csig[static_cast<std::size_t>(j)] = (pred(j) > 0.0) - (pred(j) < 0.0);
            for (Eigen::Index n = 0; n < p; ++n)
                rep.equity_signals(t - first_signal, n) = csig[static_cast<std::size_t>(st.clustering.labels[static_cast<std::size_t>(n)])];
            rep.cluster_signals.push_back(std::move(csig));
            rep.signal_timestamps.push_back(returns.timestamps[static_cast<std::size_t>(t)]);
            if (t + 1 < T) {
                double u = 0.0;
                for (Eigen::Index n = 0; n < p; ++n) u += rep.equity_signals(t - first_signal, n) * Y(t + 1, n);
                unscaled[static_cast<std::size_t>(t + 1)] = u / static_cast<double>(p);
            }
        }
    }

    const double daily_target = cfg.vol_target_annual / std::sqrt(static_cast<double>(cfg.annualization));
    const Eigen::Index first_traded = first_signal + 1;
    const Eigen::Index start = first_traded + cfg.vol_window;
    rep.unscaled_returns.assign(unscaled.begin() + first_traded, unscaled.end());
    std::vector<double> bench_days;
    for (Eigen::Index r = start; r < T; ++r) {
        double mean = 0.0;
        for (Eigen::Index q = r - cfg.vol_window; q < r; ++q) mean += unscaled[static_cast<std::size_t>(q)];
        mean /= cfg.vol_window;
        double ss = 0.0;
        for (Eigen::Index q = r - cfg.vol_window; q < r; ++q)
            ss += (unscaled[static_cast<std::size_t>(q)] - mean) * (unscaled[static_cast<std::size_t>(q)] - mean);
        const double vol = std::max(std::sqrt(ss / (cfg.vol_window - 1)), cfg.vol_floor);
        rep.daily_returns.push_back(unscaled[static_cast<std::size_t>(r)] * daily_target / vol);
        rep.timestamps.push_back(returns.timestamps[static_cast<std::size_t>(r)]);
        if (!benchmark.empty()) bench_days.push_back(benchmark[static_cast<std::size_t>(r)]);
    }
    double cum = 0.0;
    for (double v : rep.daily_returns) rep.cumulative_return.push_back(cum += v);
    if (!rep.daily_returns.empty())
        rep.mean_daily_return_bp = 1e4 * cum / static_cast<double>(rep.daily_returns.size());
    if (rep.daily_returns.size() >= 30) {
        try {
            const auto st = sharpe_test(rep.daily_returns, cfg.annualization);
            rep.sharpe_annualized = st.sharpe_annualized;
            rep.sharpe_p_value_one_sided = st.p_one_sided;
        } catch (const DataError&) {
            rep.sharpe_annualized = 0.0;
            rep.sharpe_p_value_one_sided = 1.0;
        }
    }
    if (!benchmark.empty() && bench_days.size() >= 3) rep.market_correlation = pearson(rep.daily_returns, bench_days);
    return rep;
}

/// Full rolling backtest on a returns panel. `benchmark`, when given, is a
/// market return series aligned with the panel rows.
inline BacktestReport run_backtest(const TimeSeriesPanel& returns, const LeadLagMetricSpec& spec, Algorithm algo,
                                   const BacktestConfig& cfg, unsigned jobs = 1, std::span<const double> benchmark = {}) {
    cfg.validate();
    if (returns.kind != PanelKind::Differences) throw std::invalid_argument("run_backtest expects a Differences panel");
    if (returns.values.rows() < cfg.lookback + 1)
        throw DataError("insufficient history: " + std::to_string(returns.values.rows()) + " rows, need lookback + 1 = " +
                        std::to_string(cfg.lookback + 1));
    if (!benchmark.empty() && benchmark.size() != returns.rows())
        throw std::invalid_argument("benchmark length does not match the panel");
    return simulate_backtest(returns, estimate_refits(returns, spec, algo, cfg, jobs), cfg, benchmark);
}

struct AblationResult {
    double observed_sharpe = 0.0;
    std::vector<double> null_sharpes;
    double p_value = 1.0;
    BacktestReport observed;
};

/// Null replicates assign each refit's cluster labels to nodes by a uniformly
/// random permutation (sizes preserved); networks are reused from the
/// observed run.
inline AblationResult permuted_cluster_ablation(const TimeSeriesPanel& returns, const LeadLagMetricSpec& spec, Algorithm algo,
                                                const BacktestConfig& cfg, int n_mc, unsigned jobs = 1) {
    cfg.validate();
    if (n_mc < 1) throw std::invalid_argument("ablation needs n_mc >= 1");
    if (returns.values.rows() < cfg.lookback + 1) throw DataError("insufficient history for the backtest");
    const auto refits = estimate_refits(returns, spec, algo, cfg, jobs);
    AblationResult out;
    out.observed = simulate_backtest(returns, refits, cfg);
    out.observed_sharpe = out.observed.sharpe_annualized;
    out.null_sharpes.assign(static_cast<std::size_t>(n_mc), 0.0);
    parallel_for(static_cast<std::size_t>(n_mc), jobs, [&](std::size_t rep) {
        std::mt19937_64 rng(derive_seed(cfg.seed, 0x61626c617465ULL, rep));
        auto shuffled = refits;
        for (auto& s : shuffled) std::shuffle(s.clustering.labels.begin(), s.clustering.labels.end(), rng);
        out.null_sharpes[rep] = simulate_backtest(returns, shuffled, cfg).sharpe_annualized;
    });
    out.p_value = rank_p_value(out.observed_sharpe, out.null_sharpes);
    return out;
}

}  // namespace leadlag
