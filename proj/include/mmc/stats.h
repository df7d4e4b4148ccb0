/// @file stats.h
/// @brief Two-sample statistics and performance measures used by the
///        concordance metrics. Only test statistics are exposed; p-values
///        are intentionally not computed.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmc/core_model.h"

namespace mmc::stats {

/// Two-sample Kolmogorov-Smirnov statistic: the supremum of
/// |ECDF_ref(x) - ECDF_win(x)| over the pooled sample. Both ECDFs are
/// right-continuous, so ties are handled exactly. Symmetric in its arguments.
/// Throws Error(kEmptySample) if either sample is empty.
double KsStatistic(std::span<const double> reference, std::span<const double> window);

/// Pearson chi-square goodness-of-fit statistic
///   sum_c (observed_c - n p_c)^2 / (n p_c)
/// against reference proportions. Categories present in the reference with
/// zero observations still contribute n p_c.
/// Throws Error(kEmptyWindow) if n == 0 and Error(kZeroExpected) if a
/// category with observations has no (or zero) reference proportion.
double Chi2Statistic(const std::map<std::string, double>& reference_proportions,
                     const std::map<std::string, std::int64_t>& window_counts);

/// Index-based form of Chi2Statistic used in the bootstrap inner loop.
double Chi2FromCounts(std::span<const double> proportions, std::span<const std::int64_t> counts);

/// Reference proportions smoothed with `pseudo_count` per category over
/// `categories` (plus any extra category seen in `counts`), renormalized.
std::map<std::string, double> SmoothedProportions(
    const std::map<std::string, std::int64_t>& counts, const std::vector<std::string>& categories,
    double pseudo_count = 0.5);

/// Tie-aware Mann-Whitney AUROC:
///   (#concordant + 0.5 #tied) / (#pos * #neg).
/// `labels` holds 0/1. Throws Error(kDegenerateLabels) unless both classes
/// are present, Error(kDimensionMismatch) on length mismatch.
double Auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Micro-averaged AUROC over the pooled (exam x label) pairs with known
/// ground truth. When `only_label` >= 0, only that label is pooled.
double MicroAuroc(std::span<const ExamRecord> exams, int only_label = -1);

/// Product-moment correlation. Throws Error(kZeroVariance) if either input
/// is constant and Error(kDimensionMismatch) on length mismatch or n < 2.
double PearsonCorr(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks.
double SpearmanCorr(std::span<const double> x, std::span<const double> y);

/// Linear-interpolation empirical quantile (q=0 gives the minimum, q=1 the
/// maximum). Throws Error(kEmptySample).
double Quantile(std::span<const double> values, double q);

double Mean(std::span<const double> values);
/// Population standard deviation (divides by n).
double PopulationStdDev(std::span<const double> values);

}  // namespace mmc::stats
