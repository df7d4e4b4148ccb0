/// @file report.h
/// @brief Segment summaries of a concordance series

#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmc/core_model.h"

namespace mmc {

struct SegmentSummary {
    std::string label;  // "pre", then one per change point
    std::optional<Date> first;
    std::optional<Date> last;
    int windows = 0;    // non-skipped windows counted
    int skipped = 0;
    std::optional<double> mmcw;
    std::optional<double> mmc0;
    std::optional<double> auroc;
    /// Up to five metrics with the largest |mean standardized value|.
    std::vector<std::pair<std::string, double>> top_metrics;
};

struct SegmentDelta {
    std::string label;  // change point the delta is taken at
    std::optional<double> mmcw;
    std::optional<double> mmc0;
    std::optional<double> auroc;
};

struct Report {
    std::vector<Date> change_points;
    std::vector<SegmentSummary> segments;
    std::vector<SegmentDelta> deltas;
    std::string notice;
};

/// Splits the series at the change points. A segment starting at change
/// point c only counts windows indexed on or after c + settle_days, so that
/// windows straddling a change are left out; windows before the next change
/// point close the segment. Change points must be increasing.
Report BuildReport(const ConcordanceSeries& series, std::span<const Date> change_points,
                   int settle_days);

nlohmann::json ReportToJson(const Report& report);
std::string ReportToText(const Report& report);

}  // namespace mmc
