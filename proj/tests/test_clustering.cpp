#include <gtest/gtest.h>

#include <random>
#include <set>

#include "leadlag/clustering.hpp"
#include "leadlag/evaluation.hpp"
#include "leadlag/metrics.hpp"
#include "leadlag/synthetic.hpp"

using namespace leadlag;

namespace {

DirectedNetwork net(Eigen::MatrixXd A) {
    DirectedNetwork n;
    n.adjacency = std::move(A);
    for (Eigen::Index i = 0; i < n.adjacency.rows(); ++i) n.series_ids.push_back("n" + std::to_string(i));
    return n;
}

SpectralConfig cfg(int k, std::uint64_t seed = 1) {
    SpectralConfig c;
    c.k = k;
    c.seed = seed;
    return c;
}

// Every pair connected once: inside a group the direction is random, across
// groups the leader group always points at the lagger group.
Eigen::MatrixXd directed_two_block(int half, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    const int p = 2 * half;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            const bool cross = (i < half) != (j < half);
            if (cross || coin(rng)) A(i, j) = 1.0;
            else A(j, i) = 1.0;
        }
    return A;
}

std::vector<int> two_block_truth(int half) {
    std::vector<int> t(static_cast<std::size_t>(2 * half), 1);
    std::fill(t.begin(), t.begin() + half, 0);
    return t;
}

const std::vector<Algorithm> kAll{Algorithm::Naive, Algorithm::Bibliometric, Algorithm::DisimLeft, Algorithm::DisimRight,
                                  Algorithm::HermitianRW};

}  // namespace

TEST(KMeans, TwoSeparatedBlobs) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 0.1);
    Eigen::MatrixXd X(40, 2);
    std::vector<int> truth(40);
    for (int i = 0; i < 40; ++i) {
        truth[i] = i % 2;
        X(i, 0) = (i % 2) * 10.0 + g(rng);
        X(i, 1) = g(rng);
    }
    const auto c = kmeans(X, 2, cfg(2));
    EXPECT_DOUBLE_EQ(adjusted_rand_index(c.labels, truth), 1.0);
    const auto scaled = kmeans(2.0 * X, 2, cfg(2));
    EXPECT_EQ(scaled.labels, c.labels);
    EXPECT_EQ(kmeans(X, 2, cfg(2)).labels, c.labels);
}

TEST(KMeans, SingleClusterAndErrors) {
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 3);
    EXPECT_EQ(kmeans(X, 1, cfg(1)).labels, std::vector<int>(5, 0));
    EXPECT_THROW(kmeans(X, 6, cfg(6)), std::invalid_argument);
}

TEST(KMeans, AllLabelsUsed) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 2; k <= 8; ++k) {
        Eigen::MatrixXd X(20, 2);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
        const auto c = kmeans(X, k, cfg(k, static_cast<std::uint64_t>(k)));
        EXPECT_EQ(std::set<int>(c.labels.begin(), c.labels.end()).size(), static_cast<std::size_t>(k));
    }
}

TEST(Naive, DisconnectedCliquesRecovered) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(9, 9);
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) A(3 * b + i, 3 * b + j) = 1.0;
    const auto c = cluster_naive(net(A), cfg(3));
    EXPECT_DOUBLE_EQ(adjusted_rand_index(c.labels, std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2}), 1.0);
    EXPECT_EQ(cluster_naive(net(A), cfg(1)).labels, std::vector<int>(9, 0));
}

TEST(Naive, BlindToDirectionWhileHermitianIsNot) {
    double naive = 0.0, herm = 0.0;
    const int reps = 10;
    for (int r = 0; r < reps; ++r) {
        const auto A = net(directed_two_block(15, 100 + r));
        naive += adjusted_rand_index(cluster_naive(A, cfg(2, r)).labels, two_block_truth(15));
        herm += adjusted_rand_index(cluster_hermitian_rw(A, cfg(2, r)).labels, two_block_truth(15));
    }
    EXPECT_LT(naive / reps, 0.2);
    EXPECT_GT(herm / reps, 0.9);
}

TEST(Bibliometric, SymmetricMatrix) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd A(12, 12);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = u(rng) < 0.3 ? u(rng) : 0.0;
    A.diagonal().setZero();
    const auto W = bibliometric_matrix(A, 1e-8);
    EXPECT_LT((W - W.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Bibliometric, SharedChildrenCoAssigned) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(10, 10);
    for (int i : {0, 1, 2})
        for (int j : {6, 7}) A(i, j) = 1.0;
    for (int i : {3, 4, 5})
        for (int j : {8, 9}) A(i, j) = 1.0;
    auto config = cfg(4);
    config.n_eigenvectors = 1;
    const auto c = cluster_bibliometric(net(A), config);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(c.labels, std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 3, 3}), 1.0);
}

TEST(Bibliometric, ZeroDegreeNodeDeterministic) {
    auto A = directed_two_block(5, 4);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(11, 11);
    B.topLeftCorner(10, 10) = A;
    B(0, 10) = 1.0;  // node 10 has zero out-degree
    const auto a = cluster_bibliometric(net(B), cfg(2));
    EXPECT_EQ(a.labels, cluster_bibliometric(net(B), cfg(2)).labels);
    EXPECT_EQ(a.labels.size(), 11u);
}

TEST(Disim, LeftSeparatesSendersFromReceivers) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
    for (int i : {0, 1, 2})
        for (int j : {3, 4, 5}) A(i, j) = 1.0;
    const std::vector<int> truth{0, 0, 0, 1, 1, 1};
    EXPECT_DOUBLE_EQ(adjusted_rand_index(cluster_disim(net(A), cfg(2), DisimSide::Left).labels, truth), 1.0);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(cluster_disim(net(A), cfg(2), DisimSide::Right).labels, truth), 1.0);
}

TEST(Disim, SingularValuesSortedAndTauDefault) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd A(15, 15);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = u(rng) < 0.4 ? u(rng) : 0.0;
    A.diagonal().setZero();
    const auto d = disim_decomposition(A, std::nullopt, 1e-8);
    EXPECT_DOUBLE_EQ(d.tau, A.rowwise().sum().mean());
    for (Eigen::Index i = 0; i < d.singular_values.size(); ++i) {
        EXPECT_GE(d.singular_values(i), 0.0);
        if (i > 0) EXPECT_LE(d.singular_values(i), d.singular_values(i - 1));
    }
}

TEST(Disim, ZeroTauOnRegularGraphIsNormalizedAdjacency) {
    // Directed 5-cycle with chords: every in and out degree equals 2.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
    for (int i = 0; i < 5; ++i) A(i, (i + 1) % 5) = A(i, (i + 2) % 5) = 1.0;
    const auto d = disim_decomposition(A, 0.0, 1e-8);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A / 2.0);
    EXPECT_LT((d.singular_values - svd.singularValues()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hermitian, SixNodeFlowGraphMatchesBruteForce) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
    for (int i : {0, 1, 2})
        for (int j : {3, 4, 5}) A(i, j) = 1.0;
    // Brute force: the 2-partition with the largest normalized cut imbalance.
    double best = -1.0;
    std::vector<int> best_labels;
    for (int mask = 1; mask < 63; ++mask) {
        std::vector<int> lab(6);
        int na = 0;
        for (int i = 0; i < 6; ++i) na += lab[i] = (mask >> i) & 1;
        double ab = 0, ba = 0;
        for (int l = 0; l < 6; ++l)
            for (int m = 0; m < 6; ++m)
                if (lab[l] == 1 && lab[m] == 0) ab += A(l, m), ba += A(m, l);
        const double ci = std::abs(ab - ba) / (na * (6 - na));
        if (ci > best) best = ci, best_labels = lab;
    }
    const auto c = cluster_hermitian_rw(net(A), cfg(2));
    EXPECT_DOUBLE_EQ(adjusted_rand_index(c.labels, best_labels), 1.0);
    EXPECT_EQ(c.labels, (std::vector<int>{0, 0, 0, 1, 1, 1}));
}

TEST(Hermitian, SpectrumRealAndPaired) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int p : {5, 12, 30}) {
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) S(i, j) = u(rng) - 0.5, S(j, i) = -S(i, j);
        const Eigen::MatrixXd A = S.cwiseMax(0.0);
        for (bool normalize : {false, true}) {
            const auto H = hermitian_adjacency(A, normalize);
            EXPECT_LT((H - H.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
            const Eigen::VectorXcd general = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(H).eigenvalues();
            EXPECT_LT(general.imag().cwiseAbs().maxCoeff(), 1e-10);
            Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H).eigenvalues();
            for (Eigen::Index i = 0; i < p; ++i) EXPECT_NEAR(ev(i), -ev(p - 1 - i), 1e-8);
        }
    }
}

TEST(Hermitian, ZeroGraphHasNoDirectedStructure) {
    EXPECT_THROW(cluster_hermitian_rw(net(Eigen::MatrixXd::Zero(5, 5)), cfg(2)), DataError);
}

TEST(Hermitian, NoiselessLinearPipeline) {
    auto s = default_spec(Setting::Linear, 0.0);
    s.seed = 3;
    const auto [panel, truth] = generate(s);
    const auto S = leadlag_from_returns(panel, {Functional::CcfAuc, {}, 5}, 1);
    const auto c = cluster_hermitian_rw(build_network(S), cfg(truth.clustering.k));
    EXPECT_DOUBLE_EQ(adjusted_rand_index(c.labels, truth.clustering.labels), 1.0);
}

TEST(AllAlgorithms, DeterministicCompleteAndCanonical) {
    const auto A = net(directed_two_block(10, 7));
    for (auto algo : kAll) {
        const auto a = cluster_network(A, algo, cfg(3, 11));
        EXPECT_EQ(a.labels, cluster_network(A, algo, cfg(3, 11)).labels) << to_string(algo);
        EXPECT_EQ(a.labels.size(), 20u);
        EXPECT_EQ(std::set<int>(a.labels.begin(), a.labels.end()), (std::set<int>{0, 1, 2})) << to_string(algo);
        const auto lead = leadingness(A, a);
        for (int i = 1; i < a.k; ++i) EXPECT_GE(lead.cluster_scores[i - 1], lead.cluster_scores[i]);
        EXPECT_THROW(cluster_network(A, algo, cfg(21)), std::invalid_argument);
    }
}

TEST(AllAlgorithms, PermutationEquivariance) {
    const auto A = directed_two_block(8, 8);
    std::vector<int> perm(16);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(9));
    Eigen::MatrixXd B(16, 16);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) B(i, j) = A(perm[i], perm[j]);
    for (auto algo : {Algorithm::Bibliometric, Algorithm::DisimLeft, Algorithm::DisimRight, Algorithm::HermitianRW}) {
        const auto a = cluster_network(net(A), algo, cfg(2)).labels;
        const auto b = cluster_network(net(B), algo, cfg(2)).labels;
        std::vector<int> a_perm(16);
        for (int i = 0; i < 16; ++i) a_perm[i] = a[perm[i]];
        EXPECT_DOUBLE_EQ(adjusted_rand_index(a_perm, b), 1.0) << to_string(algo);
    }
}

TEST(Components, AllocationAndParsing) {
    EXPECT_EQ(allocate_clusters({10, 10}, 4), (std::vector<int>{2, 2}));
    EXPECT_EQ(allocate_clusters({18, 1, 1}, 4), (std::vector<int>{2, 1, 1}));
    EXPECT_EQ(allocate_clusters({3, 7}, 10), (std::vector<int>{3, 7}));
    EXPECT_EQ(parse_algorithm("hermitian-rw"), Algorithm::HermitianRW);
    EXPECT_THROW(parse_algorithm("spectral"), std::invalid_argument);
}
