/// @file windowing.cpp
/// @brief Rolling windows and the bootstrap estimator

#include "mmc/windowing.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmc/error.h"
#include "mmc/keyed_rng.h"
#include "mmc/stats.h"

namespace mmc {

void SortByDate(std::vector<ExamRecord>& stream) {
    std::stable_sort(stream.begin(), stream.end(), [](const ExamRecord& a, const ExamRecord& b) {
        return a.timestamp.date < b.timestamp.date;
    });
}

bool IsDateSorted(std::span<const ExamRecord> stream) {
    return std::is_sorted(stream.begin(), stream.end(),
                          [](const ExamRecord& a, const ExamRecord& b) {
                              return a.timestamp.date < b.timestamp.date;
                          });
}

std::vector<DetectionWindow> RollWindows(std::span<const ExamRecord> stream,
                                         const WindowSpec& spec, Date start, Date end) {
    spec.Validate();
    if (start > end) {
        throw Error(ErrorCode::kInvalidRange,
                    "window range start " + start.ToString() + " after end " + end.ToString());
    }
    if (!IsDateSorted(stream)) {
        throw Error(ErrorCode::kInvalidConfig, "stream is not sorted by date");
    }
    auto date_less = [](const ExamRecord& e, Date d) { return e.timestamp.date < d; };
    auto date_greater = [](Date d, const ExamRecord& e) { return d < e.timestamp.date; };

    std::vector<DetectionWindow> windows;
    for (Date t = start; t <= end; t = t + spec.stride_days) {
        const Date first = t - spec.length_days + 1;
        auto lo = std::lower_bound(stream.begin(), stream.end(), first, date_less);
        auto hi = std::upper_bound(lo, stream.end(), t, date_greater);
        windows.push_back({t, stream.subspan(static_cast<std::size_t>(lo - stream.begin()),
                                             static_cast<std::size_t>(hi - lo))});
    }
    return windows;
}

std::vector<DetectionWindow> RollWindows(std::vector<ExamRecord>& stream, const WindowSpec& spec,
                                         Date start, Date end) {
    if (!IsDateSorted(stream)) {
        SortByDate(stream);
    }
    return RollWindows(std::span<const ExamRecord>(stream), spec, start, end);
}

std::vector<std::string> MetricCategories(const MetricDescriptor& metric,
                                          const FeatureSchema& schema) {
    std::vector<std::string> cats = schema.categorical.at(metric.field_index).categories;
    cats.emplace_back(kMissingCategory);
    return cats;
}

std::optional<double> ContinuousValue(const ExamRecord& exam, const MetricDescriptor& metric) {
    switch (metric.source_group) {
        case SourceGroup::kMetadata:
            return exam.continuous[metric.field_index];
        case SourceGroup::kLatent:
            return exam.latent[metric.field_index];
        case SourceGroup::kPrediction:
            return exam.predictions[metric.field_index];
    }
    return std::nullopt;
}

const std::string& CategoryValue(const ExamRecord& exam, const MetricDescriptor& metric) {
    static const std::string kMissing = kMissingCategory;
    const auto& v = exam.categorical[metric.field_index];
    return v ? *v : kMissing;
}

ReferenceSample BuildReferenceSample(std::span<const ExamRecord> reference,
                                     const MetricDescriptor& metric, const FeatureSchema& schema,
                                     double pseudo_count) {
    ReferenceSample sample;
    sample.kind = metric.kind;
    if (metric.kind == MetricKind::kContinuousKs) {
        for (const auto& e : reference) {
            if (auto v = ContinuousValue(e, metric)) sample.sorted_values.push_back(*v);
        }
        if (sample.sorted_values.empty()) {
            throw Error(ErrorCode::kEmptySample,
                        "reference has no values for metric '" + metric.metric_id + "'");
        }
        std::sort(sample.sorted_values.begin(), sample.sorted_values.end());
        return sample;
    }
    if (reference.empty()) {
        throw Error(ErrorCode::kEmptySample,
                    "reference is empty for metric '" + metric.metric_id + "'");
    }
    std::map<std::string, std::int64_t> counts;
    for (const auto& e : reference) ++counts[CategoryValue(e, metric)];
    const auto categories = MetricCategories(metric, schema);
    auto smoothed = stats::SmoothedProportions(counts, categories, pseudo_count);
    sample.pseudo_count = pseudo_count;
    auto add = [&](const std::string& c) {
        sample.categories.push_back(c);
        sample.proportions.push_back(smoothed.at(c));
        auto it = counts.find(c);
        sample.counts.push_back(it == counts.end() ? 0 : it->second);
    };
    // Keep the schema order; categories outside the schema (unvalidated
    // input) are appended in name order.
    for (const auto& c : categories) add(c);
    for (const auto& [c, p] : smoothed) {
        if (std::find(categories.begin(), categories.end(), c) == categories.end()) add(c);
    }
    return sample;
}

std::vector<std::size_t> DrawExamIndices(std::uint64_t seed, const std::string& metric_id,
                                         Date index_date, int repeat, std::size_t window_size,
                                         int samples) {
    KeyedStream rng(DeriveKey(seed, metric_id, index_date.days(), repeat));
    std::vector<std::size_t> idx(static_cast<std::size_t>(samples));
    for (auto& i : idx) i = static_cast<std::size_t>(rng.Below(window_size));
    return idx;
}

namespace {

// Window-side data for a K-S metric. Exams are mapped to groups of equal
// value in ascending order, with the reference ECDF precomputed just below
// (lt) and at (le) each group value. The K-S statistic of any resample is
// then a single sweep over the groups.
struct PreparedContinuous {
    std::vector<int> group_of_exam;  // -1 when missing
    std::vector<double> ref_lt;
    std::vector<double> ref_le;
};

PreparedContinuous PrepareContinuous(std::span<const ExamRecord> exams,
                                     const MetricDescriptor& metric,
                                     const ReferenceSample& reference, bool leave_window_out) {
    PreparedContinuous p;
    p.group_of_exam.assign(exams.size(), -1);
    std::vector<std::pair<double, std::size_t>> values;
    values.reserve(exams.size());
    for (std::size_t i = 0; i < exams.size(); ++i) {
        if (auto v = ContinuousValue(exams[i], metric)) values.emplace_back(*v, i);
    }
    std::sort(values.begin(), values.end());
    const auto& ref = reference.sorted_values;
    std::int64_t m = static_cast<std::int64_t>(ref.size());
    if (leave_window_out) {
        m -= static_cast<std::int64_t>(values.size());
        if (m <= 0) {
            throw Error(ErrorCode::kEmptySample,
                        "reference minus window is empty for metric '" + metric.metric_id + "'");
        }
    }
    // Both sides are sorted, so one merge pass finds the reference counts
    // below and at every distinct window value.
    std::size_t lt = 0;
    std::size_t le = 0;
    std::int64_t window_before = 0;
    int group = -1;
    std::vector<std::int64_t> lt_count;
    std::vector<std::int64_t> le_count;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double x = values[k].first;
        if (k == 0 || x != values[k - 1].first) {
            ++group;
            while (lt < ref.size() && ref[lt] < x) ++lt;
            le = std::max(le, lt);
            while (le < ref.size() && ref[le] <= x) ++le;
            lt_count.push_back(static_cast<std::int64_t>(lt));
            le_count.push_back(static_cast<std::int64_t>(le));
            if (leave_window_out) lt_count.back() -= window_before;
        }
        ++window_before;
        if (leave_window_out) le_count.back() = static_cast<std::int64_t>(le) - window_before;
        p.group_of_exam[values[k].second] = group;
    }
    p.ref_lt.resize(lt_count.size());
    p.ref_le.resize(le_count.size());
    for (std::size_t g = 0; g < lt_count.size(); ++g) {
        if (lt_count[g] < 0 || le_count[g] < lt_count[g]) {
            throw Error(ErrorCode::kInvalidConfig, "window values of metric '" + metric.metric_id +
                                                       "' are not part of the reference");
        }
        p.ref_lt[g] = static_cast<double>(lt_count[g]) / static_cast<double>(m);
        p.ref_le[g] = static_cast<double>(le_count[g]) / static_cast<double>(m);
    }
    return p;
}

// `counts` must be all zero on entry and is left all zero.
std::optional<double> KsReplicate(const PreparedContinuous& p, std::span<const std::size_t> draw,
                                  std::vector<std::int32_t>& counts) {
    std::int64_t total = 0;
    for (std::size_t idx : draw) {
        const int g = p.group_of_exam[idx];
        if (g >= 0) {
            ++counts[static_cast<std::size_t>(g)];
            ++total;
        }
    }
    if (total == 0) {
        return std::nullopt;
    }
    const double inv_n = 1.0 / static_cast<double>(total);
    std::int64_t cum = 0;
    double d = 0.0;
    for (std::size_t g = 0; g < counts.size(); ++g) {
        // Left of a group value the resample ECDF is flat at cum/n while the
        // reference ECDF has climbed to ref_lt; at the value both jump.
        d = std::max(d, std::abs(p.ref_lt[g] - static_cast<double>(cum) * inv_n));
        cum += counts[g];
        counts[g] = 0;
        d = std::max(d, std::abs(p.ref_le[g] - static_cast<double>(cum) * inv_n));
    }
    // Beyond the last drawn value the resample ECDF is 1 and the reference
    // only climbs toward 1.
    return d;
}

std::vector<int> CategoryIndices(std::span<const ExamRecord> exams, const MetricDescriptor& metric,
                                 const ReferenceSample& reference) {
    std::vector<int> out(exams.size(), -1);
    for (std::size_t i = 0; i < exams.size(); ++i) {
        const std::string& c = CategoryValue(exams[i], metric);
        auto it = std::find(reference.categories.begin(), reference.categories.end(), c);
        if (it == reference.categories.end()) {
            throw Error(ErrorCode::kZeroExpected, "category '" + c + "' of metric '" +
                                                      metric.metric_id +
                                                      "' is unknown to the reference");
        }
        out[i] = static_cast<int>(it - reference.categories.begin());
    }
    return out;
}

std::vector<double> LeaveOutProportions(std::span<const int> cat_index,
                                        const MetricDescriptor& metric,
                                        const ReferenceSample& reference) {
    std::vector<std::int64_t> counts = reference.counts;
    for (int c : cat_index) {
        if (--counts[static_cast<std::size_t>(c)] < 0) {
            throw Error(ErrorCode::kInvalidConfig, "window categories of metric '" +
                                                       metric.metric_id +
                                                       "' are not part of the reference");
        }
    }
    double total = 0.0;
    for (auto n : counts) total += static_cast<double>(n) + reference.pseudo_count;
    if (!(total > 0.0)) {
        throw Error(ErrorCode::kEmptySample,
                    "reference minus window is empty for metric '" + metric.metric_id + "'");
    }
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        p[i] = (static_cast<double>(counts[i]) + reference.pseudo_count) / total;
    }
    return p;
}

}  // namespace

std::vector<std::optional<double>> BootstrapReplicates(const DetectionWindow& window,
                                                       const MetricDescriptor& metric,
                                                       const ReferenceSample& reference,
                                                       const BootstrapSpec& spec,
                                                       bool leave_window_out) {
    spec.Validate();
    if (window.exams.empty()) {
        throw Error(ErrorCode::kEmptyEffectiveSample,
                    "window " + window.index_date.ToString() + " is empty");
    }
    std::vector<std::optional<double>> reps;
    reps.reserve(static_cast<std::size_t>(spec.repeats));

    if (metric.kind == MetricKind::kContinuousKs) {
        const PreparedContinuous prepared = PrepareContinuous(window.exams, metric, reference, leave_window_out);
        if (prepared.ref_le.empty()) {
            throw Error(ErrorCode::kEmptyEffectiveSample,
                        "metric '" + metric.metric_id + "' has no values in window " +
                            window.index_date.ToString());
        }
        std::vector<std::int32_t> counts(prepared.ref_le.size(), 0);
        for (int j = 0; j < spec.repeats; ++j) {
            auto draw = DrawExamIndices(spec.seed, metric.metric_id, window.index_date, j,
                                        window.exams.size(), spec.samples);
            reps.push_back(KsReplicate(prepared, draw, counts));
        }
        return reps;
    }

    const std::vector<int> cat_index = CategoryIndices(window.exams, metric, reference);
    const std::vector<double> proportions = leave_window_out
                                                ? LeaveOutProportions(cat_index, metric, reference)
                                                : reference.proportions;
    std::vector<std::int64_t> counts(reference.categories.size());
    for (int j = 0; j < spec.repeats; ++j) {
        auto draw = DrawExamIndices(spec.seed, metric.metric_id, window.index_date, j,
                                    window.exams.size(), spec.samples);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t idx : draw) ++counts[static_cast<std::size_t>(cat_index[idx])];
        reps.push_back(stats::Chi2FromCounts(proportions, counts));
    }
    return reps;
}

double BootstrapMetric(const DetectionWindow& window, const MetricDescriptor& metric,
                       const ReferenceSample& reference, const BootstrapSpec& spec,
                       bool leave_window_out) {
    const auto reps = BootstrapReplicates(window, metric, reference, spec, leave_window_out);
    double sum = 0.0;
    int valid = 0;
    for (const auto& r : reps) {
        if (r) {
            sum += *r;
            ++valid;
        }
    }
    if (valid == 0) {
        throw Error(ErrorCode::kEmptyEffectiveSample,
                    "no resample of window " + window.index_date.ToString() +
                        " had a value for metric '" + metric.metric_id + "'");
    }
    return sum / valid;
}

}  // namespace mmc
