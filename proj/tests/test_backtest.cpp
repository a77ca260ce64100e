#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "leadlag/backtest.hpp"
#include "support/planted.hpp"

using namespace leadlag;
using leadlag::testing::planted_panel;
using leadlag::testing::PlantedSpec;

namespace {

BacktestConfig small_config(int k) {
    BacktestConfig c;
    c.lookback = 150;
    c.update_period = 50;
    c.k = k;
    c.seed = 3;
    return c;
}

const LeadLagMetricSpec kAuc{Functional::CcfAuc, {}, 5};

PlantedSpec small_planted(std::uint64_t seed, int T = 450) {
    PlantedSpec s;
    s.factors = 2;
    s.cluster_size = 4;
    s.T = T;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(ClusterMeans, Examples) {
    Eigen::MatrixXd Y(2, 3);
    Y << 1, 3, 10, 2, 4, 20;
    const auto M = cluster_mean_returns(Y, Clustering{{0, 0, 1}, 2});
    Eigen::MatrixXd want(2, 2);
    want << 2, 10, 3, 20;
    EXPECT_EQ(M, want);
    EXPECT_THROW(cluster_mean_returns(Y, Clustering{{0, 0, 2}, 3}), std::invalid_argument);
}

TEST(Ewma, ConstantInputApproachesLimit) {
    const std::vector<double> y(200, 0.3);
    EXPECT_NEAR(ewma_feature(y, 0.4, 200), 0.3 / 0.4, 1e-12);
    EXPECT_EQ(ewma_feature(std::vector<double>(10, 0.0), 0.4, 10), 0.0);
    EXPECT_EQ(ewma_feature(y, 0.4, 0), 0.0);
    EXPECT_THROW(ewma_feature(y, 0.4, 201), std::invalid_argument);
}

TEST(Ewma, ImpulseDecaysGeometrically) {
    std::vector<double> y(30, 0.0);
    y[5] = 1.0;
    const double a = 0.4;
    for (std::size_t t = 0; t <= 30; ++t) {
        const double want = t <= 5 ? 0.0 : std::pow(1.0 - a, static_cast<double>(t - 6));
        EXPECT_NEAR(ewma_feature(y, a, t), want, 1e-15) << t;
    }
}

TEST(Ewma, RecursiveMatchesDirect) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd Y(60, 3);
    for (Eigen::Index i = 0; i < Y.size(); ++i) Y.data()[i] = g(rng);
    const auto X = ewma_features(Y, 0.25);
    ASSERT_EQ(X.rows(), 61);
    for (Eigen::Index c = 0; c < 3; ++c) {
        const std::vector<double> col(Y.col(c).data(), Y.col(c).data() + 60);
        for (std::size_t t = 0; t <= 60; ++t) EXPECT_NEAR(X(static_cast<Eigen::Index>(t), c), ewma_feature(col, 0.25, t), 1e-12);
    }
}

TEST(PairModels, ExactSlopeAndNormalEquations) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd X(100, 3), Y(100, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng), Y.data()[i] = g(rng);
    Y.col(1) = 2.0 * X.col(0);
    const auto m = fit_pair_models(X, Y, 10, 90);
    EXPECT_NEAR(m.theta(0, 1), 2.0, 1e-12);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) {
            const Eigen::VectorXd x = X.col(i).segment(10, 80), y = Y.col(j).segment(10, 80);
            const double oracle = x.colPivHouseholderQr().solve(y)(0);
            EXPECT_NEAR(m.theta(i, j), oracle, 1e-12);
        }
    EXPECT_EQ(m.degenerate_features, 0);
}

TEST(PairModels, NullSlopeNearZeroAndDegenerateFeature) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd X(5000, 2), Y(5000, 1);
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, 0) = g(rng), X(i, 1) = 0.0, Y(i, 0) = g(rng);
    const auto m = fit_pair_models(X, Y, 0, 5000);
    EXPECT_LT(std::abs(m.theta(0, 0)), 4.0 / std::sqrt(5000.0));
    EXPECT_EQ(m.theta(1, 0), 0.0);
    EXPECT_EQ(m.degenerate_features, 1);
}

TEST(ThresholdFlow, StrictQuantileMask) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    MetaFlowGraph F;
    F.flow = Eigen::MatrixXd::Zero(10, 10);
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j) F.flow(i, j) = g(rng), F.flow(j, i) = -F.flow(i, j);
    const auto mask = threshold_flow(F, 0.9);
    EXPECT_EQ(mask.sum(), 9);
    EXPECT_EQ(mask.diagonal().sum(), 0);
    EXPECT_EQ(mask.cwiseAbs().maxCoeff(), 1);
    EXPECT_EQ(mask.minCoeff(), 0);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) EXPECT_FALSE(mask(i, j) && mask(j, i));

    MetaFlowGraph flat;
    flat.flow = Eigen::MatrixXd::Constant(4, 4, 0.5);
    flat.flow.diagonal().setZero();
    EXPECT_EQ(threshold_flow(flat, 0.5).sum(), 0);  // equality with the cutoff is not enough
    MetaFlowGraph one;
    one.flow = Eigen::MatrixXd::Zero(1, 1);
    EXPECT_EQ(threshold_flow(one, 0.9).sum(), 0);
}

TEST(Sharpe, GaussianVarianceFormula) {
    EXPECT_DOUBLE_EQ(sharpe_variance(0.2, 0.0, 3.0, 100), (1.0 + 0.5 * 0.04) / 100.0);
    EXPECT_DOUBLE_EQ(sharpe_variance(0.1, -1.0, 6.0, 50), (1.0 + 0.1 + 1.25 * 0.01) / 50.0);
}

TEST(Sharpe, StatisticAndErrors) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.001, 0.01);
    std::vector<double> r(500);
    for (auto& v : r) v = g(rng);
    const auto t = sharpe_test(r, 252);
    double mean = 0.0, ss = 0.0;
    for (double v : r) mean += v;
    mean /= 500.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(t.sharpe_daily, mean / std::sqrt(ss / 499.0), 1e-12);
    EXPECT_NEAR(t.sharpe_annualized, t.sharpe_daily * std::sqrt(252.0), 1e-12);
    EXPECT_NEAR(t.p_one_sided, 0.5 * std::erfc(t.z / std::sqrt(2.0)), 1e-15);
    EXPECT_THROW(sharpe_test(std::vector<double>(100, 0.01), 252), DataError);
    EXPECT_THROW(sharpe_test(std::vector<double>(100, 0.0), 252), DataError);
    EXPECT_THROW(sharpe_test(std::vector<double>(29, 0.01), 252), std::invalid_argument);
}

TEST(Sharpe, NullCalibration) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1.0);
    int rejections = 0;
    const int runs = 2000;
    std::vector<double> r(250);
    for (int run = 0; run < runs; ++run) {
        for (auto& v : r) v = g(rng);
        rejections += sharpe_test(r, 252).p_one_sided < 0.05;
    }
    const double rate = static_cast<double>(rejections) / runs;
    EXPECT_NEAR(rate, 0.05, 3.0 * std::sqrt(0.05 * 0.95 / runs));
}

TEST(Backtest, RefitDays) {
    BacktestConfig c;
    c.lookback = 10;
    c.update_period = 4;
    EXPECT_EQ(refit_days(20, c), (std::vector<Eigen::Index>{9, 13, 17}));
    EXPECT_TRUE(refit_days(9, c).empty());
}

TEST(Backtest, NoLookahead) {
    const auto full = planted_panel(small_planted(11)).returns;
    const auto cfg = small_config(4);
    const auto ref = run_backtest(full, kAuc, Algorithm::HermitianRW, cfg);
    for (Eigen::Index cut : {160, 233, 300, 390}) {
        TimeSeriesPanel head = full;
        head.values = full.values.topRows(cut + 1);
        head.timestamps.resize(static_cast<std::size_t>(cut + 1));
        const auto part = run_backtest(head, kAuc, Algorithm::HermitianRW, cfg);
        const Eigen::Index days = cut + 1 - (cfg.lookback - 1);
        ASSERT_EQ(part.equity_signals.rows(), days);
        EXPECT_EQ(part.equity_signals, ref.equity_signals.topRows(days)) << "cut " << cut;
    }
}

TEST(Backtest, DeterministicAndSignalsTernary) {
    const auto panel = planted_panel(small_planted(12)).returns;
    const auto cfg = small_config(4);
    const auto a = run_backtest(panel, kAuc, Algorithm::HermitianRW, cfg, 1);
    const auto b = run_backtest(panel, kAuc, Algorithm::HermitianRW, cfg, 3);
    EXPECT_EQ(a.daily_returns, b.daily_returns);
    EXPECT_EQ(a.equity_signals, b.equity_signals);
    EXPECT_LE(a.equity_signals.maxCoeff(), 1);
    EXPECT_GE(a.equity_signals.minCoeff(), -1);
    EXPECT_EQ(a.refits, 7);
    EXPECT_EQ(a.daily_returns.size(), static_cast<std::size_t>(450 - 149 - 1 - cfg.vol_window));
    EXPECT_EQ(a.cumulative_return.back(), std::accumulate(a.daily_returns.begin(), a.daily_returns.end(), 0.0));
}

TEST(Backtest, GlobalSignFlipLeavesPnlUnchanged) {
    const auto panel = planted_panel(small_planted(13)).returns;
    auto flipped = panel;
    flipped.values = -panel.values;
    const auto cfg = small_config(4);
    const auto a = run_backtest(panel, kAuc, Algorithm::HermitianRW, cfg);
    const auto b = run_backtest(flipped, kAuc, Algorithm::HermitianRW, cfg);
    ASSERT_EQ(a.daily_returns.size(), b.daily_returns.size());
    for (std::size_t i = 0; i < a.daily_returns.size(); ++i) EXPECT_NEAR(a.daily_returns[i], b.daily_returns[i], 1e-12);
    EXPECT_EQ(a.equity_signals, Eigen::MatrixXi(-b.equity_signals));
}

TEST(Backtest, VolatilityTargetBand) {
    const auto panel = planted_panel(small_planted(14, 900)).returns;
    const auto cfg = small_config(4);
    const auto r = run_backtest(panel, kAuc, Algorithm::HermitianRW, cfg);
    double mean = 0.0, ss = 0.0;
    for (double v : r.daily_returns) mean += v;
    mean /= static_cast<double>(r.daily_returns.size());
    for (double v : r.daily_returns) ss += (v - mean) * (v - mean);
    const double vol = std::sqrt(ss / static_cast<double>(r.daily_returns.size() - 1) * 252.0);
    EXPECT_GE(vol, 0.5 * cfg.vol_target_annual);
    EXPECT_LE(vol, 2.0 * cfg.vol_target_annual);
}

TEST(Backtest, PlantedLeadLagIsProfitable) {
    auto spec = small_planted(15, 900);
    const auto planted = planted_panel(spec);
    const auto r = run_backtest(planted.returns, kAuc, Algorithm::HermitianRW, small_config(planted.truth.k));
    EXPECT_GT(r.sharpe_annualized, 0.0);
    EXPECT_LT(r.sharpe_p_value_one_sided, 0.05);
}

TEST(Backtest, MarketCorrelationAndErrors) {
    const auto panel = planted_panel(small_planted(16)).returns;
    auto cfg = small_config(4);
    std::vector<double> market(panel.rows());
    for (Eigen::Index t = 0; t < panel.values.rows(); ++t) market[static_cast<std::size_t>(t)] = panel.values.row(t).mean();
    const auto r = run_backtest(panel, kAuc, Algorithm::HermitianRW, cfg, 1, market);
    ASSERT_TRUE(r.market_correlation.has_value());
    EXPECT_LE(std::abs(*r.market_correlation), 1.0);

    TimeSeriesPanel short_panel = panel;
    short_panel.values = panel.values.topRows(150);
    short_panel.timestamps.resize(150);
    EXPECT_THROW(run_backtest(short_panel, kAuc, Algorithm::HermitianRW, cfg), DataError);
    EXPECT_THROW(run_backtest(panel, kAuc, Algorithm::HermitianRW, cfg, 1, std::vector<double>(3, 0.0)), std::invalid_argument);
    cfg.update_period = cfg.lookback;
    EXPECT_THROW(run_backtest(panel, kAuc, Algorithm::HermitianRW, cfg), std::invalid_argument);
}

TEST(Ablation, NullsAreDeterministic) {
    const auto planted = planted_panel(small_planted(17));
    const auto cfg = small_config(planted.truth.k);
    const auto a = permuted_cluster_ablation(planted.returns, kAuc, Algorithm::HermitianRW, cfg, 8, 1);
    const auto b = permuted_cluster_ablation(planted.returns, kAuc, Algorithm::HermitianRW, cfg, 8, 3);
    EXPECT_EQ(a.null_sharpes, b.null_sharpes);
    EXPECT_EQ(a.observed_sharpe, run_backtest(planted.returns, kAuc, Algorithm::HermitianRW, cfg).sharpe_annualized);
    EXPECT_GE(a.p_value, 1.0 / 9.0);
    EXPECT_LE(a.p_value, 1.0);
}
