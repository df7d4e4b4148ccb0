/// @file stats.cpp
/// @brief Two-sample statistics, AUROC, correlation and quantiles

#include "mmc/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmc/error.h"

namespace mmc::stats {

double KsStatistic(std::span<const double> reference, std::span<const double> window) {
    if (reference.empty() || window.empty()) {
        throw Error(ErrorCode::kEmptySample, "K-S statistic needs two non-empty samples");
    }
    std::vector<double> a(reference.begin(), reference.end());
    std::vector<double> b(window.begin(), window.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
            x = a[i];
        } else {
            x = b[j];
        }
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double Chi2FromCounts(std::span<const double> proportions, std::span<const std::int64_t> counts) {
    if (proportions.size() != counts.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "chi2: proportions and counts differ in size");
    }
    std::int64_t n = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    if (n <= 0) {
        throw Error(ErrorCode::kEmptyWindow, "chi2: window has no observations");
    }
    double stat = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        double expected = static_cast<double>(n) * proportions[c];
        if (expected <= 0.0) {
            if (counts[c] > 0) {
                throw Error(ErrorCode::kZeroExpected, "chi2: observed category has zero expected");
            }
            continue;
        }
        double diff = static_cast<double>(counts[c]) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

double Chi2Statistic(const std::map<std::string, double>& reference_proportions,
                     const std::map<std::string, std::int64_t>& window_counts) {
    std::vector<double> props;
    std::vector<std::int64_t> counts;
    for (const auto& [cat, p] : reference_proportions) {
        props.push_back(p);
        auto it = window_counts.find(cat);
        counts.push_back(it == window_counts.end() ? 0 : it->second);
    }
    for (const auto& [cat, c] : window_counts) {
        if (c < 0) {
            throw Error(ErrorCode::kSchemaViolation, "chi2: negative count");
        }
        if (!reference_proportions.count(cat)) {
            if (c > 0) {
                throw Error(ErrorCode::kZeroExpected,
                            "chi2: category '" + cat + "' absent from reference");
            }
        }
    }
    return Chi2FromCounts(props, counts);
}

std::map<std::string, double> SmoothedProportions(
    const std::map<std::string, std::int64_t>& counts, const std::vector<std::string>& categories,
    double pseudo_count) {
    std::map<std::string, double> smoothed;
    for (const auto& c : categories) smoothed[c] = pseudo_count;
    for (const auto& [c, n] : counts) {
        auto [it, inserted] = smoothed.try_emplace(c, pseudo_count);
        it->second += static_cast<double>(n);
    }
    double total = 0.0;
    for (const auto& [c, v] : smoothed) total += v;
    if (total <= 0.0) {
        throw Error(ErrorCode::kEmptySample, "no reference observations to smooth");
    }
    for (auto& [c, v] : smoothed) v /= total;
    return smoothed;
}

double Auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "auroc: scores and labels differ in length");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Walk groups of equal score in ascending order; integer pair counts keep
    // the result identical to the pairwise definition.
    std::uint64_t neg_below = 0;
    std::uint64_t concordant = 0;
    std::uint64_t tied = 0;
    std::uint64_t pos_total = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::uint64_t pos = 0;
        std::uint64_t neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]]) ++pos; else ++neg;
            ++j;
        }
        concordant += pos * neg_below;
        tied += pos * neg;
        neg_below += neg;
        pos_total += pos;
        i = j;
    }
    if (pos_total == 0 || neg_below == 0) {
        throw Error(ErrorCode::kDegenerateLabels, "auroc needs both positive and negative labels");
    }
    return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
           (static_cast<double>(pos_total) * static_cast<double>(neg_below));
}

double MicroAuroc(std::span<const ExamRecord> exams, int only_label) {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (const auto& e : exams) {
        for (std::size_t l = 0; l < e.ground_truth.size(); ++l) {
            if (only_label >= 0 && static_cast<int>(l) != only_label) continue;
            if (e.ground_truth[l] == LabelState::kUnknown) continue;
            scores.push_back(e.predictions[l]);
            labels.push_back(e.ground_truth[l] == LabelState::kPositive ? 1 : 0);
        }
    }
    return Auroc(scores, labels);
}

double PearsonCorr(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorCode::kDimensionMismatch, "pearson: need equal lengths >= 2");
    }
    const double mx = Mean(x);
    const double my = Mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        throw Error(ErrorCode::kZeroVariance, "pearson: input has zero variance");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::vector<double> AverageRanks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

}  // namespace

double SpearmanCorr(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "spearman: lengths differ");
    }
    auto rx = AverageRanks(x);
    auto ry = AverageRanks(y);
    return PearsonCorr(rx, ry);
}

double Quantile(std::span<const double> values, double q) {
    if (values.empty()) {
        throw Error(ErrorCode::kEmptySample, "quantile of empty sample");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw Error(ErrorCode::kInvalidConfig, "quantile level must be in [0,1]");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= v.size()) {
        return v.back();
    }
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

double Mean(std::span<const double> values) {
    if (values.empty()) {
        throw Error(ErrorCode::kEmptySample, "mean of empty sample");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double PopulationStdDev(std::span<const double> values) {
    const double m = Mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

}  // namespace mmc::stats
