/// @file concordance.cpp
/// @brief Metric set, calibration and MMC aggregation

#include "mmc/concordance.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mmc/error.h"
#include "mmc/simulator.h"
#include "mmc/stats.h"

namespace mmc {

bool MetricGroups::Enabled(SourceGroup group) const {
    switch (group) {
        case SourceGroup::kMetadata: return metadata;
        case SourceGroup::kLatent: return latent;
        case SourceGroup::kPrediction: return predictions;
    }
    return false;
}

std::vector<MetricDescriptor> BuildMetricSet(const FeatureSchema& schema) {
    std::vector<MetricDescriptor> out;
    for (std::size_t i = 0; i < schema.categorical.size(); ++i) {
        out.push_back({"cat:" + schema.categorical[i].name, MetricKind::kCategoricalChi2,
                       SourceGroup::kMetadata, static_cast<int>(i)});
    }
    for (std::size_t i = 0; i < schema.continuous.size(); ++i) {
        out.push_back({"cont:" + schema.continuous[i].name, MetricKind::kContinuousKs,
                       SourceGroup::kMetadata, static_cast<int>(i)});
    }
    for (int d = 0; d < schema.latent_dim; ++d) {
        out.push_back({"latent:z_" + std::to_string(d), MetricKind::kContinuousKs,
                       SourceGroup::kLatent, d});
    }
    for (std::size_t l = 0; l < schema.labels.size(); ++l) {
        out.push_back({"pred:" + schema.labels[l], MetricKind::kContinuousKs,
                       SourceGroup::kPrediction, static_cast<int>(l)});
    }
    return out;
}

std::vector<MetricDescriptor> FilterMetrics(std::span<const MetricDescriptor> metrics,
                                            const MetricGroups& groups) {
    std::vector<MetricDescriptor> out;
    for (const auto& m : metrics) {
        if (groups.Enabled(m.source_group)) out.push_back(m);
    }
    return out;
}

MetricDescriptor ResolveMetric(const std::string& metric_id, const FeatureSchema& schema) {
    for (const auto& m : BuildMetricSet(schema)) {
        if (m.metric_id == metric_id) return m;
    }
    throw Error(ErrorCode::kInvalidConfig, "metric '" + metric_id + "' is not in the schema");
}

ReferenceSet::ReferenceSet(std::vector<ExamRecord> exams, FeatureSchema schema)
    : exams_(std::move(exams)), schema_(std::move(schema)) {
    if (exams_.empty()) {
        throw Error(ErrorCode::kEmptyInput, "reference set is empty");
    }
    SortByDate(exams_);
    fingerprint_ = Fingerprint(exams_);
    metrics_ = BuildMetricSet(schema_);
    for (const auto& m : metrics_) {
        samples_.emplace(m.metric_id, BuildReferenceSample(exams_, m, schema_));
    }
}

const ReferenceSample& ReferenceSet::Sample(const std::string& metric_id) const {
    auto it = samples_.find(metric_id);
    if (it == samples_.end()) {
        throw Error(ErrorCode::kInvalidConfig, "reference has no metric '" + metric_id + "'");
    }
    return it->second;
}

void ParallelFor(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

WindowMetrics ComputeWindowMetrics(const DetectionWindow& window,
                                   std::span<const MetricDescriptor> metrics,
                                   const ReferenceSet& reference, const BootstrapSpec& spec,
                                   bool leave_window_out) {
    WindowMetrics out;
    out.values.resize(metrics.size());
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        try {
            out.values[i] = BootstrapMetric(window, metrics[i],
                                            reference.Sample(metrics[i].metric_id), spec,
                                            leave_window_out);
        } catch (const Error& e) {
            if (!out.error.empty()) out.error += "; ";
            out.error += metrics[i].metric_id + ": " + e.what();
        }
    }
    return out;
}

std::vector<WindowMetrics> ComputeMetricMatrix(std::span<const DetectionWindow> windows,
                                               std::span<const MetricDescriptor> metrics,
                                               const ReferenceSet& reference,
                                               const BootstrapSpec& spec, int threads,
                                               bool leave_window_out) {
    spec.Validate();
    std::vector<WindowMetrics> out(windows.size());
    ParallelFor(windows.size(), threads, [&](std::size_t w) {
        out[w] = ComputeWindowMetrics(windows[w], metrics, reference, spec, leave_window_out);
    });
    return out;
}

std::vector<Standardization> StandardizeCalibrate(
    std::span<const std::vector<std::optional<double>>> values) {
    if (values.size() < 2) {
        throw Error(ErrorCode::kInsufficientWindows,
                    "standardization needs at least 2 windows, got " +
                        std::to_string(values.size()));
    }
    const std::size_t n_metrics = values.front().size();
    std::vector<Standardization> out(n_metrics);
    std::vector<double> column(values.size());
    for (std::size_t i = 0; i < n_metrics; ++i) {
        for (std::size_t w = 0; w < values.size(); ++w) {
            if (values[w].size() != n_metrics) {
                throw Error(ErrorCode::kDimensionMismatch, "ragged metric matrix");
            }
            if (!values[w][i]) {
                throw Error(ErrorCode::kEmptyEffectiveSample,
                            "metric " + std::to_string(i) + " missing on a calibration window");
            }
            column[w] = *values[w][i];
        }
        out[i].offset = stats::Mean(column);
        out[i].scale = stats::PopulationStdDev(column);
    }
    return out;
}

double Standardize(double m, double zeta, double eta) {
    if (!(eta > 0.0)) {
        throw Error(ErrorCode::kNonPositiveScale, "scale must be positive");
    }
    return (m - zeta) / eta;
}

const char* CorrelationName(CorrelationKind kind) {
    return kind == CorrelationKind::kSpearman ? "spearman" : "pearson";
}

CorrelationKind ParseCorrelationKind(const std::string& name) {
    if (name == "pearson") return CorrelationKind::kPearson;
    if (name == "spearman") return CorrelationKind::kSpearman;
    throw Error(ErrorCode::kInvalidConfig, "unknown correlation '" + name + "'");
}

std::vector<double> WeightCalibrate(std::span<const std::vector<double>> standardized,
                                    std::span<const double> rho, CorrelationKind kind) {
    if (standardized.size() != rho.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "metric rows and AUROC values differ in count");
    }
    if (rho.size() < 3) {
        throw Error(ErrorCode::kInsufficientWindows,
                    "weight calibration needs at least 3 windows, got " +
                        std::to_string(rho.size()));
    }
    const std::size_t n_metrics = standardized.front().size();
    std::vector<double> alpha(n_metrics, 0.0);
    std::vector<double> column(rho.size());
    for (std::size_t i = 0; i < n_metrics; ++i) {
        for (std::size_t w = 0; w < rho.size(); ++w) column[w] = standardized[w][i];
        try {
            const double r = kind == CorrelationKind::kSpearman ? stats::SpearmanCorr(column, rho)
                                                                : stats::PearsonCorr(column, rho);
            alpha[i] = std::abs(r);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kZeroVariance) throw;
        }
    }
    return alpha;
}

namespace {

std::vector<DetectionWindow> FullWindows(std::span<const ExamRecord> stream,
                                         const WindowSpec& spec) {
    const Date first = stream.front().timestamp.date + (spec.length_days - 1);
    const Date last = stream.back().timestamp.date;
    if (first > last) return {};
    auto windows = RollWindows(stream, spec, first, last);
    std::erase_if(windows, [&](const DetectionWindow& w) {
        return static_cast<int>(w.exams.size()) < spec.min_exams;
    });
    return windows;
}

std::optional<double> WindowAuroc(std::span<const ExamRecord> exams, int only_label) {
    try {
        return stats::MicroAuroc(exams, only_label);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateLabels) throw;
        return std::nullopt;
    }
}

std::string Join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) {
        if (!s.empty()) s += ",";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", x);
        s += buf;
    }
    return s;
}

}  // namespace

Calibration Calibrate(const ReferenceSet& reference, const CalibrationOptions& options,
                      CalibrationDiagnostics* diagnostics) {
    options.window_spec.Validate();
    options.bootstrap_spec.Validate();
    if (!options.groups.AnyEnabled()) {
        throw Error(ErrorCode::kInvalidConfig, "at least one metric group must be enabled");
    }
    CalibrationDiagnostics local;
    CalibrationDiagnostics& diag = diagnostics ? *diagnostics : local;
    diag = {};

    const auto metrics = FilterMetrics(reference.metrics(), options.groups);
    const auto& exams = reference.exams();
    const auto ref_windows = FullWindows(exams, options.window_spec);
    diag.reference_windows = static_cast<int>(ref_windows.size());
    if (ref_windows.size() < 2) {
        throw Error(ErrorCode::kInsufficientWindows,
                    "reference yields " + std::to_string(ref_windows.size()) +
                        " windows with at least " + std::to_string(options.window_spec.min_exams) +
                        " exams; need 2");
    }

    const auto ref_values = ComputeMetricMatrix(ref_windows, metrics, reference,
                                                options.bootstrap_spec, options.threads, true);
    std::vector<std::vector<std::optional<double>>> raw(ref_values.size());
    for (std::size_t w = 0; w < ref_values.size(); ++w) {
        if (!ref_values[w].error.empty()) {
            throw Error(ErrorCode::kEmptyEffectiveSample,
                        "reference window " + ref_windows[w].index_date.ToString() + ": " +
                            ref_values[w].error);
        }
        raw[w] = ref_values[w].values;
    }
    const auto standardization = StandardizeCalibrate(raw);

    Calibration cal;
    cal.schema = reference.schema();
    cal.window_spec = options.window_spec;
    cal.bootstrap_spec = options.bootstrap_spec;
    cal.reference_fingerprint = reference.fingerprint();
    cal.created_at = options.created_at;
    cal.normalize_weights = options.normalize_weights;
    cal.provenance["correlation"] = CorrelationName(options.correlation);
    cal.provenance["scale_floor"] = Join({options.scale_floor});
    cal.provenance["reference_windows"] = std::to_string(ref_windows.size());
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        MetricCalibration mc;
        mc.metric = metrics[i];
        mc.offset = standardization[i].offset;
        mc.scale = standardization[i].scale;
        mc.excluded = !(mc.scale >= options.scale_floor);
        if (mc.excluded) diag.excluded_metrics.push_back(mc.metric.metric_id);
        cal.metrics.push_back(mc);
    }

    auto standardize_row = [&](const std::vector<std::optional<double>>& row) {
        std::vector<double> z(row.size(), 0.0);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!cal.metrics[i].excluded) {
                z[i] = Standardize(*row[i], cal.metrics[i].offset, cal.metrics[i].scale);
            }
        }
        return z;
    };
    for (const auto& row : raw) diag.reference_standardized.push_back(standardize_row(row));

    // Weight-calibration set: reference windows plus hard-mined windows.
    const bool has_truth = std::any_of(exams.begin(), exams.end(),
                                       [](const ExamRecord& e) { return e.HasGroundTruth(); });
    if (!options.weights) {
        cal.provenance["weights"] = "disabled";
        return cal;
    }
    if (!has_truth) {
        diag.warnings.push_back("reference has no ground truth; weights left absent (MMC_0 only)");
        return cal;
    }

    std::vector<std::vector<double>> alpha_rows;
    std::vector<double> rho;
    for (std::size_t w = 0; w < ref_windows.size(); ++w) {
        if (auto r = WindowAuroc(ref_windows[w].exams, -1)) {
            alpha_rows.push_back(diag.reference_standardized[w]);
            rho.push_back(*r);
        }
    }

    const auto n_hard = static_cast<std::size_t>(
        std::lround(options.hard_ratio * static_cast<double>(ref_windows.size())));
    std::vector<std::vector<ExamRecord>> hard_streams;
    std::vector<DetectionWindow> hard_windows;
    if (n_hard > 0 && !options.hard_quantiles.empty()) {
        for (double q : options.hard_quantiles) {
            try {
                const auto pool = sim::HardMinePool(exams, q);
                hard_streams.push_back(sim::ReplaceFromPool(exams, pool, exams.front().timestamp.date,
                                                            options.bootstrap_spec.seed));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::kEmptyPool) throw;
                diag.warnings.push_back(std::string("hard mining skipped: ") + e.what());
                hard_streams.clear();
                break;
            }
        }
        for (std::size_t j = 0; j < n_hard && !hard_streams.empty(); ++j) {
            const auto& stream = hard_streams[j % hard_streams.size()];
            const Date t = ref_windows[j % ref_windows.size()].index_date;
            hard_windows.push_back(RollWindows(stream, options.window_spec, t, t).front());
        }
        cal.provenance["hard_quantiles"] = Join(options.hard_quantiles);
        cal.provenance["hard_windows"] = std::to_string(hard_windows.size());
    }
    const auto hard_values = ComputeMetricMatrix(hard_windows, metrics, reference,
                                                 options.bootstrap_spec, options.threads);
    for (std::size_t w = 0; w < hard_windows.size(); ++w) {
        if (!hard_values[w].error.empty()) {
            diag.warnings.push_back("hard-mined window dropped: " + hard_values[w].error);
            continue;
        }
        if (auto r = WindowAuroc(hard_windows[w].exams, -1)) {
            alpha_rows.push_back(standardize_row(hard_values[w].values));
            rho.push_back(*r);
        }
    }
    diag.alpha_windows = static_cast<int>(rho.size());
    if (rho.size() < 3) {
        throw Error(ErrorCode::kInsufficientWindows,
                    "weight calibration has " + std::to_string(rho.size()) +
                        " windows with a defined AUROC; need 3");
    }
    const auto alpha = WeightCalibrate(alpha_rows, rho, options.correlation);
    for (std::size_t i = 0; i < cal.metrics.size(); ++i) {
        cal.metrics[i].weight = cal.metrics[i].excluded ? 0.0 : alpha[i];
    }
    return cal;
}

Calibration RestrictCalibration(const Calibration& calibration, const MetricGroups& groups) {
    if (!groups.AnyEnabled()) {
        throw Error(ErrorCode::kInvalidConfig, "at least one metric group must be enabled");
    }
    Calibration out = calibration;
    std::erase_if(out.metrics, [&](const MetricCalibration& m) {
        return !groups.Enabled(m.metric.source_group);
    });
    return out;
}

WindowConcordance Aggregate(std::span<const std::optional<double>> raw,
                            const Calibration& calibration) {
    if (raw.size() != calibration.metrics.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "raw values do not match the calibration");
    }
    WindowConcordance out;
    out.standardized.resize(raw.size());
    double sum0 = 0.0;
    int n0 = 0;
    double sumw = 0.0;
    double wsum = 0.0;
    bool any_weight = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& mc = calibration.metrics[i];
        if (!raw[i] || mc.excluded) continue;
        const double z = Standardize(*raw[i], mc.offset, mc.scale);
        out.standardized[i] = z;
        // Distance statistics: larger means less concordant.
        const double signed_z = -z;
        sum0 += signed_z;
        ++n0;
        if (mc.weight) {
            any_weight = true;
            sumw += *mc.weight * signed_z;
            wsum += *mc.weight;
        }
    }
    if (n0 > 0) out.mmc0 = sum0 / n0;
    if (any_weight) {
        if (!calibration.normalize_weights) {
            out.mmcw = sumw;
        } else if (wsum > 0.0) {
            out.mmcw = sumw / wsum;
        }
    }
    return out;
}

namespace {

std::vector<MetricDescriptor> CalibratedMetrics(const Calibration& calibration) {
    std::vector<MetricDescriptor> metrics;
    metrics.reserve(calibration.metrics.size());
    for (const auto& m : calibration.metrics) metrics.push_back(m.metric);
    return metrics;
}

void CheckFingerprint(const Calibration& calibration, const ReferenceSet& reference) {
    if (calibration.reference_fingerprint != reference.fingerprint()) {
        throw Error(ErrorCode::kCalibrationMismatch,
                    "calibration was made against " + calibration.reference_fingerprint +
                        ", reference is " + reference.fingerprint());
    }
}

}  // namespace

double Mmc(const DetectionWindow& window, const Calibration& calibration,
           const ReferenceSet& reference, bool weighted) {
    CheckFingerprint(calibration, reference);
    if (static_cast<int>(window.exams.size()) < calibration.window_spec.min_exams) {
        throw Error(ErrorCode::kSkippedWindow,
                    "window " + window.index_date.ToString() + " has " +
                        std::to_string(window.exams.size()) + " exams");
    }
    const auto metrics = CalibratedMetrics(calibration);
    const auto values = ComputeWindowMetrics(window, metrics, reference, calibration.bootstrap_spec);
    const auto agg = Aggregate(values.values, calibration);
    const auto& result = weighted ? agg.mmcw : agg.mmc0;
    if (!result) {
        throw Error(ErrorCode::kEmptyEffectiveSample,
                    weighted ? "no weighted metric available" : "no metric available");
    }
    return *result;
}

ConcordanceSeries RunSeries(std::span<const ExamRecord> stream, const Calibration& calibration,
                            const ReferenceSet& reference, const SeriesOptions& options) {
    CheckFingerprint(calibration, reference);
    const auto& spec = calibration.window_spec;
    ConcordanceSeries series;
    const auto metrics = CalibratedMetrics(calibration);
    for (const auto& m : metrics) series.metric_ids.push_back(m.metric_id);

    std::vector<ExamRecord> sorted;
    if (!IsDateSorted(stream)) {
        sorted.assign(stream.begin(), stream.end());
        SortByDate(sorted);
        stream = sorted;
    }
    if (stream.empty() && (!options.start || !options.end)) {
        return series;
    }
    const Date start = options.start ? *options.start
                                     : stream.front().timestamp.date + (spec.length_days - 1);
    const Date end = options.end ? *options.end : stream.back().timestamp.date;
    if (start > end) {
        return series;
    }
    const auto windows = RollWindows(stream, spec, start, end);
    series.rows.resize(windows.size());
    ParallelFor(windows.size(), options.threads, [&](std::size_t w) {
        const auto& window = windows[w];
        SeriesRow& row = series.rows[w];
        row.index_date = window.index_date;
        row.n_exams = static_cast<int>(window.exams.size());
        row.raw.resize(metrics.size());
        row.standardized.resize(metrics.size());
        if (row.n_exams < spec.min_exams) {
            row.skipped = true;
            return;
        }
        try {
            auto values = ComputeWindowMetrics(window, metrics, reference, calibration.bootstrap_spec);
            row.error = std::move(values.error);
            auto agg = Aggregate(values.values, calibration);
            row.raw = std::move(values.values);
            row.standardized = std::move(agg.standardized);
            row.mmc0 = agg.mmc0;
            row.mmcw = agg.mmcw;
            row.auroc = WindowAuroc(window.exams, options.auroc_label);
        } catch (const Error& e) {
            if (!row.error.empty()) row.error += "; ";
            row.error += e.what();
        }
    });
    return series;
}

}  // namespace mmc
