#pragma once

// Sample correlation functions used inside cross-correlation functionals.
// Every estimator returns 0 on degenerate (zero-variance) input.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace leadlag {

enum class CorrelationType { Pearson, Kendall, DistanceCorrelation, MutualInformation };

struct CorrelationKind {
    CorrelationType type = CorrelationType::Pearson;
    int mi_bins = 8;  // MutualInformation only

    void validate() const {
        if (type == CorrelationType::MutualInformation && mi_bins < 2)
            throw std::invalid_argument("mutual information needs at least 2 bins");
    }
};

inline std::string to_string(CorrelationType t) {
    switch (t) {
        case CorrelationType::Pearson: return "pearson";
        case CorrelationType::Kendall: return "kendall";
        case CorrelationType::DistanceCorrelation: return "dcor";
        case CorrelationType::MutualInformation: return "mi";
    }
    return "?";
}

inline CorrelationType parse_correlation_type(const std::string& s) {
    if (s == "pearson") return CorrelationType::Pearson;
    if (s == "kendall") return CorrelationType::Kendall;
    if (s == "dcor" || s == "distance") return CorrelationType::DistanceCorrelation;
    if (s == "mi" || s == "mutual-information") return CorrelationType::MutualInformation;
    throw std::invalid_argument("unknown correlation '" + s + "' (pearson|kendall|dcor|mi)");
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    const double denom = std::sqrt(sxx * syy);
    if (!(denom > 0.0)) return 0.0;
    return std::clamp(sxy / denom, -1.0, 1.0);
}

namespace detail {

// Merge sort of v counting the number of exchanges (discordant swaps).
inline std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

// Sum over runs of equal values of t(t-1)/2, for a sorted sequence.
template <class Eq>
std::uint64_t tied_pairs(std::size_t n, Eq equal_to_prev) {
    std::uint64_t total = 0, run = 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (equal_to_prev(i)) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total + run * (run - 1) / 2;
}

}  // namespace detail

/// Kendall tau-b with tie correction, O(n log n) (Knight's merge-sort counting).
inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t tx = detail::tied_pairs(n, [&](std::size_t i) { return x[order[i]] == x[order[i - 1]]; });
    const std::uint64_t txy = detail::tied_pairs(
        n, [&](std::size_t i) { return x[order[i]] == x[order[i - 1]] && ys[i] == ys[i - 1]; });

    std::vector<double> buf(n);
    const std::uint64_t swaps = detail::merge_count(ys, buf, 0, n);
    const std::uint64_t ty = detail::tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });

    const double denom = std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
    if (!(denom > 0.0)) return 0.0;
    const double s = static_cast<double>(n0) - static_cast<double>(tx) - static_cast<double>(ty) +
                     static_cast<double>(txy) - 2.0 * static_cast<double>(swaps);
    return std::clamp(s / denom, -1.0, 1.0);
}

/// Distance correlation (Szekely, Rizzo & Bakirov), in [0, 1].
///
/// Direct O(n^2) pairwise-distance evaluation. Double centering is folded
/// into row means: sum_ij A_ij B_ij = sum_ij a_ij b_ij - 2n sum_i a_i. b_i. + n^2 a.. b..,
/// so no n x n matrix is materialized. Cost is about n^2/2 distance pairs per call.
inline double distance_correlation(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<double> ra(n, 0.0), rb(n, 0.0);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i], yi = y[i];
        double rai = 0.0, rbi = 0.0, ab = 0.0, aa = 0.0, bb = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = std::abs(xi - x[j]);
            const double b = std::abs(yi - y[j]);
            rai += a;
            rbi += b;
            ab += a * b;
            aa += a * a;
            bb += b * b;
            ra[j] += a;
            rb[j] += b;
        }
        ra[i] += rai;
        rb[i] += rbi;
        sab += ab;
        saa += aa;
        sbb += bb;
    }
    const double nn = static_cast<double>(n);
    double cross_ab = 0.0, cross_aa = 0.0, cross_bb = 0.0, ga = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ma = ra[i] / nn, mb = rb[i] / nn;
        cross_ab += ma * mb;
        cross_aa += ma * ma;
        cross_bb += mb * mb;
        ga += ma;
        gb += mb;
    }
    ga /= nn;
    gb /= nn;
    // dCov^2 = (1/n^2) sum a b - (2/n) sum a_i. b_i. + a.. b..
    const double dcov = 2.0 * sab / (nn * nn) - 2.0 * cross_ab / nn + ga * gb;
    const double dvx = 2.0 * saa / (nn * nn) - 2.0 * cross_aa / nn + ga * ga;
    const double dvy = 2.0 * sbb / (nn * nn) - 2.0 * cross_bb / nn + gb * gb;
    const double denom = std::sqrt(dvx * dvy);
    if (!(denom > 1e-300)) return 0.0;
    const double r2 = dcov / denom;
    return r2 > 0.0 ? std::min(1.0, std::sqrt(r2)) : 0.0;
}

/// Equal-frequency bin index per observation. Equal values share a bin, so
/// the assignment depends only on the ordering of the data.
inline std::vector<int> quantile_bins(std::span<const double> x, int bins) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<int> out(n);
    int current = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (r == 0 || x[order[r]] != x[order[r - 1]])
            current = static_cast<int>((r * static_cast<std::size_t>(bins)) / n);
        out[order[r]] = current;
    }
    return out;
}

/// Plug-in mutual information (nats) on equal-frequency bins of each marginal.
inline double mutual_information(std::span<const double> x, std::span<const double> y, int bins) {
    const std::size_t n = x.size();
    const auto bx = quantile_bins(x, bins);
    const auto by = quantile_bins(y, bins);
    const auto B = static_cast<std::size_t>(bins);
    std::vector<double> joint(B * B, 0.0), px(B, 0.0), py(B, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(bx[i]) * B + static_cast<std::size_t>(by[i])] += 1.0;
        px[static_cast<std::size_t>(bx[i])] += 1.0;
        py[static_cast<std::size_t>(by[i])] += 1.0;
    }
    const double nn = static_cast<double>(n);
    double mi = 0.0;
    for (std::size_t a = 0; a < B; ++a)
        for (std::size_t b = 0; b < B; ++b) {
            const double c = joint[a * B + b];
            if (c > 0.0) mi += (c / nn) * std::log(c * nn / (px[a] * py[b]));
        }
    return std::max(0.0, mi);
}

/// Dispatches on the correlation kind. Requires equal lengths, n >= 3.
inline double sample_correlation(std::span<const double> x, std::span<const double> y, const CorrelationKind& kind) {
    if (x.size() != y.size())
        throw std::invalid_argument("sample_correlation: length mismatch (" + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()) + ")");
    if (x.size() < 3) throw std::invalid_argument("sample_correlation: need at least 3 observations");
    switch (kind.type) {
        case CorrelationType::Pearson: return pearson(x, y);
        case CorrelationType::Kendall: return kendall_tau_b(x, y);
        case CorrelationType::DistanceCorrelation: return distance_correlation(x, y);
        case CorrelationType::MutualInformation:
            kind.validate();
            return mutual_information(x, y, kind.mi_bins);
    }
    return 0.0;
}

}  // namespace leadlag
