/// @file windowing.h
/// @brief Rolling detection windows and the bootstrap over-sampling estimator

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmc/core_model.h"

namespace mmc {

/// Stable sort by calendar date; intra-day order is preserved as given.
void SortByDate(std::vector<ExamRecord>& stream);
bool IsDateSorted(std::span<const ExamRecord> stream);

/// One window per stride step from `start` to `end` inclusive. The window at
/// t views the exams dated in (t - length_days, t]. The stream must be
/// date-sorted (see the vector overload). Throws Error(kInvalidRange) if
/// start > end.
std::vector<DetectionWindow> RollWindows(std::span<const ExamRecord> stream,
                                         const WindowSpec& spec, Date start, Date end);

/// Sorts `stream` by date if needed, then rolls windows over it.
std::vector<DetectionWindow> RollWindows(std::vector<ExamRecord>& stream, const WindowSpec& spec,
                                         Date start, Date end);

/// Reference side of one metric: sorted finite values for K-S metrics, or
/// smoothed category proportions for chi-square metrics.
struct ReferenceSample {
    MetricKind kind = MetricKind::kContinuousKs;
    std::vector<double> sorted_values;
    std::vector<std::string> categories;
    std::vector<double> proportions;
    std::vector<std::int64_t> counts;  // unsmoothed, aligned with categories
    double pseudo_count = 0.5;
};

/// Categories a chi-square metric is evaluated over: the schema's allowed
/// set followed by the missing marker.
std::vector<std::string> MetricCategories(const MetricDescriptor& metric,
                                          const FeatureSchema& schema);

/// Field value of `exam` for a continuous metric; nullopt when missing.
std::optional<double> ContinuousValue(const ExamRecord& exam, const MetricDescriptor& metric);
/// Category of `exam` for a categorical metric; kMissingCategory when missing.
const std::string& CategoryValue(const ExamRecord& exam, const MetricDescriptor& metric);

/// Builds the whole-reference sample for one metric (the reference side is
/// never resampled). Throws Error(kEmptySample) if the reference has no
/// usable value for the metric.
ReferenceSample BuildReferenceSample(std::span<const ExamRecord> reference,
                                     const MetricDescriptor& metric, const FeatureSchema& schema,
                                     double pseudo_count = 0.5);

/// Indices of the K exams drawn (uniformly, with replacement) for repeat
/// `repeat` of `metric_id` on the window indexed at `index_date`.
std::vector<std::size_t> DrawExamIndices(std::uint64_t seed, const std::string& metric_id,
                                         Date index_date, int repeat, std::size_t window_size,
                                         int samples);

/// Per-repeat statistic values psi(theta^K_j(window)), j = 0..N-1. A repeat
/// whose draw contains no usable value for the field yields nullopt.
///
/// With `leave_window_out`, the window's exams are taken to be part of the
/// reference and are removed from it before comparing (out-of-sample
/// comparison for windows cut from the reference stream itself).
std::vector<std::optional<double>> BootstrapReplicates(const DetectionWindow& window,
                                                       const MetricDescriptor& metric,
                                                       const ReferenceSample& reference,
                                                       const BootstrapSpec& spec,
                                                       bool leave_window_out = false);

/// Mean of the replicates (m-hat). Bit-identical for identical inputs.
/// Throws Error(kEmptyEffectiveSample) if the field is missing for every
/// exam of the window.
double BootstrapMetric(const DetectionWindow& window, const MetricDescriptor& metric,
                       const ReferenceSample& reference, const BootstrapSpec& spec,
                       bool leave_window_out = false);

}  // namespace mmc
