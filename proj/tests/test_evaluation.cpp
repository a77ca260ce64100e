#include <gtest/gtest.h>

#include <random>

#include "leadlag/bench.hpp"
#include "leadlag/evaluation.hpp"
#include "leadlag/synthetic.hpp"
#include "support/oracles.hpp"

using namespace leadlag;

TEST(EdgeAccuracy, Examples) {
    Eigen::MatrixXi truth(3, 3);
    truth << 0, 1, 1, -1, 0, 0, -1, 0, 0;
    Eigen::MatrixXd S(3, 3);
    S << 0, 0.5, -0.2, -0.5, 0, 0.9, 0.2, -0.9, 0;
    EXPECT_DOUBLE_EQ(edge_accuracy(S, truth), 0.5);
    S(0, 2) = 0.0;
    EXPECT_DOUBLE_EQ(edge_accuracy(S, truth), 0.75);
    EXPECT_DOUBLE_EQ(edge_accuracy(-S, truth), 0.25);
    EXPECT_THROW(edge_accuracy(S, Eigen::MatrixXi::Zero(3, 3)), std::invalid_argument);
    EXPECT_THROW(edge_accuracy(Eigen::MatrixXd::Zero(2, 2), truth), std::invalid_argument);
}

TEST(AdjustedRand, Examples) {
    const std::vector<int> a{0, 0, 1, 1}, b{1, 1, 0, 0}, c{0, 1, 0, 1};
    EXPECT_DOUBLE_EQ(adjusted_rand_index(a, b), 1.0);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(a, c), -0.5);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(std::vector<int>(5, 0), std::vector<int>(5, 3)), 1.0);
    EXPECT_THROW(adjusted_rand_index(a, std::vector<int>{0, 1}), std::invalid_argument);
}

TEST(AdjustedRand, MatchesPairCountingOnAllSmallPartitions) {
    for (int n = 2; n <= 6; ++n) {
        const auto parts = leadlag::testing::all_partitions(n);
        for (const auto& a : parts)
            for (const auto& b : parts) {
                EXPECT_NEAR(adjusted_rand_index(a, b), leadlag::testing::ari_oracle(a, b), 1e-12);
                EXPECT_DOUBLE_EQ(adjusted_rand_index(a, b), adjusted_rand_index(b, a));
            }
    }
}

TEST(AdjustedRand, RandomLabelsNearZero) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> d(0, 9);
    double total = 0.0;
    for (int r = 0; r < 200; ++r) {
        std::vector<int> a(100), b(100);
        for (int i = 0; i < 100; ++i) a[i] = d(rng), b[i] = d(rng);
        total += adjusted_rand_index(a, b);
    }
    EXPECT_NEAR(total / 200.0, 0.0, 0.01);
}

TEST(Jaccard, Examples) {
    const auto J = jaccard_matrix(Clustering{{0, 0, 1, 1}, 2}, Clustering{{0, 0, 0, 1}, 2});
    EXPECT_DOUBLE_EQ(J(0, 0), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(J(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(J(1, 0), 1.0 / 4.0);
    EXPECT_DOUBLE_EQ(J(1, 1), 1.0 / 2.0);
    const Clustering same{{2, 0, 1, 0}, 3};
    EXPECT_TRUE(jaccard_matrix(same, same).diagonal().isOnes(0.0));
    EXPECT_THROW(jaccard_matrix(same, Clustering{{0, 0}, 1}), std::invalid_argument);
}

TEST(Spearman, ExtremesAndOracle) {
    const std::vector<double> x{1, 2, 3, 4, 5}, up{10, 20, 30, 40, 50}, down{5, 4, 3, 2, 1};
    EXPECT_DOUBLE_EQ(spearman_attribute_correlation(x, up), 1.0);
    EXPECT_DOUBLE_EQ(spearman_attribute_correlation(x, down), -1.0);
    // No ties: 1 - 6 sum d^2 / (n (n^2 - 1)); ranks of y are 2,1,4,3,5.
    const std::vector<double> y{0.2, 0.1, 0.4, 0.3, 0.9};
    EXPECT_NEAR(spearman_attribute_correlation(x, y), 1.0 - 6.0 * 4.0 / (5.0 * 24.0), 1e-12);
    EXPECT_EQ(average_ranks(std::vector<double>{3, 1, 3, 2}), (std::vector<double>{3.5, 1, 3.5, 2}));
    EXPECT_THROW(spearman_attribute_correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(MeanCi, Values) {
    const std::vector<double> v{1, 2, 3, 4};
    const auto c = mean_ci(v);
    EXPECT_DOUBLE_EQ(c.mean, 2.5);
    EXPECT_NEAR(c.sd, std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_NEAR(c.half_width, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(mean_ci(std::vector<double>{7}).half_width, 0.0);
}

TEST(PermutationTest, RankPValue) {
    EXPECT_DOUBLE_EQ(rank_p_value(5.0, std::vector<double>{1, 2, 3}), 0.25);
    EXPECT_DOUBLE_EQ(rank_p_value(2.0, std::vector<double>{1, 2, 3}), 0.75);
    EXPECT_DOUBLE_EQ(rank_p_value(0.0, std::vector<double>{1}), 1.0);
    EXPECT_DOUBLE_EQ(rank_p_value(9.0, std::vector<double>{1}), 0.5);
}

TEST(PermutationTest, PlantedStructureAndNullRange) {
    auto s = default_spec(Setting::Linear, 0.5);
    s.p = 30;
    s.lags.resize(30);
    for (int i = 0; i < 30; ++i) s.lags[i] = i / 10;
    s.seed = 2;
    const auto [panel, truth] = generate(s);
    const LeadLagMetricSpec spec{Functional::CcfAuc, {}, 5};
    const auto r = permutation_test_largest_eigenvalue(panel, spec, 19, 3, 2);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 20.0);
    EXPECT_EQ(r.null_samples.size(), 19u);
    EXPECT_EQ(r.null_samples, permutation_test_largest_eigenvalue(panel, spec, 19, 3, 1).null_samples);
    EXPECT_GT(r.p_value, 0.0);
    EXPECT_THROW(permutation_test_largest_eigenvalue(panel, spec, 0, 3), std::invalid_argument);
}

TEST(Bench, AccuracyAndAriDegradeWithNoise) {
    BenchGrid g;
    g.settings = {Setting::Linear};
    g.sigmas = {0.0, 1.0, 4.0};
    g.reps = 4;
    g.metrics = {LeadLagMetricSpec{Functional::CcfAuc, {}, 5}};
    g.algorithms = {Algorithm::HermitianRW};
    g.seed = 5;
    const auto summary = summarize(run_bench(g));
    ASSERT_EQ(summary.size(), 3u);
    for (std::size_t i = 1; i < summary.size(); ++i) {
        const auto& lo = summary[i - 1];
        const auto& hi = summary[i];
        ASSERT_LT(lo.sigma, hi.sigma);
        EXPECT_LE(hi.accuracy.mean, lo.accuracy.mean + 2.0 * (lo.accuracy.half_width + hi.accuracy.half_width) / 1.96);
        EXPECT_LE(hi.ari.mean, lo.ari.mean + 2.0 * (lo.ari.half_width + hi.ari.half_width) / 1.96);
    }
    EXPECT_GT(summary.front().ari.mean, summary.back().ari.mean);
}
