#pragma once

// Lagged latent-variable benchmark processes with known lead-lag structure:
//   y_t^i = g_{l_i}(z_{t - l_i}) + eps_t^i,   z_t = 0 for t <= 0.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "leadlag/common.hpp"
#include "leadlag/network.hpp"
#include "leadlag/panel.hpp"

namespace leadlag {

enum class Setting { Linear, Cosine, Legendre, Hermite, Heterogeneous };

inline std::string to_string(Setting s) {
    switch (s) {
        case Setting::Linear: return "linear";
        case Setting::Cosine: return "cosine";
        case Setting::Legendre: return "legendre";
        case Setting::Hermite: return "hermite";
        case Setting::Heterogeneous: return "heterogeneous";
    }
    return "?";
}

inline Setting parse_setting(const std::string& s) {
    if (s == "linear") return Setting::Linear;
    if (s == "cosine") return Setting::Cosine;
    if (s == "legendre") return Setting::Legendre;
    if (s == "hermite") return Setting::Hermite;
    if (s == "heterogeneous") return Setting::Heterogeneous;
    throw std::invalid_argument("unknown synthetic setting '" + s + "'");
}

inline const std::vector<Setting>& all_settings() {
    static const std::vector<Setting> s{Setting::Linear, Setting::Cosine, Setting::Legendre, Setting::Hermite,
                                        Setting::Heterogeneous};
    return s;
}

/// Noise levels of the benchmark sweep.
inline const std::vector<double>& sigma_grid() {
    static const std::vector<double> g{0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 2.0, 3.0, 4.0};
    return g;
}

struct SyntheticSpec {
    Setting setting = Setting::Linear;
    int T = 250;
    int p = 100;
    double sigma = 0.0;
    std::vector<int> lags;
    std::vector<int> factors;  // Heterogeneous only
    int K = 1;                 // Heterogeneous only
    std::uint64_t seed = 0;

    void validate() const {
        if (T < 1 || p < 1) throw std::invalid_argument("synthetic spec needs T >= 1 and p >= 1");
        if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
        if (static_cast<int>(lags.size()) != p) throw std::invalid_argument("lag assignment must have p entries");
        const int min_lag = setting == Setting::Cosine ? 1
                            : (setting == Setting::Legendre || setting == Setting::Hermite) ? 2
                                                                                             : 0;
        for (int l : lags)
            if (l < min_lag)
                throw std::invalid_argument(to_string(setting) + " setting needs lags >= " + std::to_string(min_lag));
        if (setting == Setting::Heterogeneous) {
            if (static_cast<int>(factors.size()) != p) throw std::invalid_argument("factor assignment must have p entries");
            for (int f : factors)
                if (f < 0 || f >= K) throw std::invalid_argument("factor index out of range");
        }
    }
};

/// Ground-truth clusters and lead-lag directions (+1 when i leads j).
struct GroundTruth {
    Clustering clustering;
    Eigen::MatrixXi edge_direction;
};

inline SyntheticSpec default_spec(Setting setting, double sigma) {
    SyntheticSpec s;
    s.setting = setting;
    s.sigma = sigma;
    s.lags.resize(100);
    const int offset = setting == Setting::Cosine ? 1 : (setting == Setting::Legendre || setting == Setting::Hermite) ? 2 : 0;
    for (int i = 1; i <= 100; ++i) s.lags[static_cast<std::size_t>(i - 1)] = (i - 1) / 10 + offset;
    if (setting == Setting::Heterogeneous) {
        s.K = 2;
        s.factors.resize(100);
        for (int i = 1; i <= 100; ++i) {
            s.factors[static_cast<std::size_t>(i - 1)] = (i - 1) / 50;
            s.lags[static_cast<std::size_t>(i - 1)] = i <= 50 ? (i - 1) / 5 : (i - 51) / 5;
        }
    }
    return s;
}

/// Legendre polynomial P_m(x) by the three-term recurrence.
inline double legendre_poly(int m, double x) {
    if (m < 0) throw std::invalid_argument("polynomial degree must be >= 0");
    if (m == 0) return 1.0;
    double prev = 1.0, cur = x;
    for (int n = 1; n < m; ++n) {
        const double next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Probabilists' Hermite polynomial He_m(x).
inline double hermite_poly(int m, double x) {
    if (m < 0) throw std::invalid_argument("polynomial degree must be >= 0");
    if (m == 0) return 1.0;
    double prev = 1.0, cur = x;
    for (int n = 1; n < m; ++n) {
        const double next = x * cur - n * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace detail {

inline int factor_of(const SyntheticSpec& s, std::size_t i) {
    return s.setting == Setting::Heterogeneous ? s.factors[i] : 0;
}

inline double link(Setting setting, int lag, double z) {
    switch (setting) {
        case Setting::Linear:
        case Setting::Heterogeneous: return z;
        case Setting::Cosine: return std::cos(lag * z) / std::sqrt(M_PI);
        case Setting::Legendre: return legendre_poly(lag + 1, z);
        case Setting::Hermite: return hermite_poly(lag + 1, z) / std::sqrt(std::tgamma(lag + 1.0));
    }
    return 0.0;
}

}  // namespace detail

inline GroundTruth ground_truth(const SyntheticSpec& s) {
    const auto p = static_cast<std::size_t>(s.p);
    std::map<std::pair<int, int>, int> ids;
    for (std::size_t i = 0; i < p; ++i) ids.emplace(std::make_pair(detail::factor_of(s, i), s.lags[i]), 0);
    int next = 0;
    for (auto& [key, id] : ids) id = next++;
    GroundTruth g;
    g.clustering.k = next;
    for (std::size_t i = 0; i < p; ++i) g.clustering.labels.push_back(ids.at({detail::factor_of(s, i), s.lags[i]}));
    g.edge_direction = Eigen::MatrixXi::Zero(s.p, s.p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (detail::factor_of(s, i) == detail::factor_of(s, j) && s.lags[i] < s.lags[j]) {
                g.edge_direction(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1;
                g.edge_direction(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = -1;
            }
    return g;
}

/// Draws a Differences panel (timestamps 1..T, ids s1..sp) and its ground
/// truth. Latent and noise draws use separate seed streams, so changing
/// sigma keeps the latent path fixed for a given seed.
inline std::pair<TimeSeriesPanel, GroundTruth> generate(const SyntheticSpec& s) {
    s.validate();
    const int K = s.setting == Setting::Heterogeneous ? s.K : 1;
    std::mt19937_64 latent_rng(derive_seed(s.seed, 1));
    std::mt19937_64 noise_rng(derive_seed(s.seed, 2));

    Eigen::MatrixXd z(s.T + 1, K);  // row t holds z_t for t = 1..T; row 0 unused
    z.row(0).setZero();
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif_pi(-M_PI, M_PI), unif_one(-1.0, 1.0);
    for (int t = 1; t <= s.T; ++t)
        for (int f = 0; f < K; ++f) {
            switch (s.setting) {
                case Setting::Cosine: z(t, f) = unif_pi(latent_rng); break;
                case Setting::Legendre: z(t, f) = unif_one(latent_rng); break;
                default: z(t, f) = gauss(latent_rng); break;
            }
        }

    TimeSeriesPanel panel;
    panel.kind = PanelKind::Differences;
    panel.values.resize(s.T, s.p);
    for (int t = 1; t <= s.T; ++t) panel.timestamps.push_back(std::to_string(t));
    for (int i = 0; i < s.p; ++i) panel.series_ids.push_back("s" + std::to_string(i + 1));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int t = 1; t <= s.T; ++t)
        for (int i = 0; i < s.p; ++i) {
            const int lag = s.lags[static_cast<std::size_t>(i)];
            const int src = t - lag;
            const double latent = src >= 1 ? z(src, detail::factor_of(s, static_cast<std::size_t>(i))) : 0.0;
            const double eps = noise(noise_rng);
            panel.values(t - 1, i) = detail::link(s.setting, lag, latent) + s.sigma * eps;
        }
    return {std::move(panel), ground_truth(s)};
}

}  // namespace leadlag
