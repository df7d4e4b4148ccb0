/// @file concordance.h
/// @brief Metric set, reference set, calibration of (zeta, eta, alpha) and
///        the MMC_0 / MMC_w aggregation over a stream

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmc/core_model.h"
#include "mmc/windowing.h"

namespace mmc {

/// Metric-group toggles.
struct MetricGroups {
    bool metadata = true;
    bool latent = true;
    bool predictions = true;

    bool AnyEnabled() const { return metadata || latent || predictions; }
    bool Enabled(SourceGroup group) const;
};

/// One chi-square metric per categorical feature, then one K-S metric per
/// continuous feature, latent dimension and label, in schema order. Ids:
/// "cat:<name>", "cont:<name>", "latent:z_<i>", "pred:<label>".
std::vector<MetricDescriptor> BuildMetricSet(const FeatureSchema& schema);

std::vector<MetricDescriptor> FilterMetrics(std::span<const MetricDescriptor> metrics,
                                            const MetricGroups& groups);

/// Resolves a metric id back to its descriptor. Throws Error(kInvalidConfig)
/// when the id does not address a field of the schema.
MetricDescriptor ResolveMetric(const std::string& metric_id, const FeatureSchema& schema);

/// The reference exams with the per-metric reference samples precomputed.
class ReferenceSet {
public:
    /// Sorts the exams by date. Throws Error(kEmptyInput) when empty and
    /// Error(kEmptySample) when a metric has no usable reference value.
    ReferenceSet(std::vector<ExamRecord> exams, FeatureSchema schema);

    const std::vector<ExamRecord>& exams() const { return exams_; }
    const FeatureSchema& schema() const { return schema_; }
    const std::string& fingerprint() const { return fingerprint_; }
    const std::vector<MetricDescriptor>& metrics() const { return metrics_; }

    /// Throws Error(kInvalidConfig) for an unknown metric id.
    const ReferenceSample& Sample(const std::string& metric_id) const;

private:
    std::vector<ExamRecord> exams_;
    FeatureSchema schema_;
    std::string fingerprint_;
    std::vector<MetricDescriptor> metrics_;
    std::unordered_map<std::string, ReferenceSample> samples_;
};

/// Runs fn(i) for i in [0, n) on `threads` workers (0 = hardware
/// concurrency). Exceptions are rethrown after all workers finish.
void ParallelFor(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Bootstrapped metric values of one window. `values[i]` is nullopt when
/// metric i failed; `error` then names the failures.
struct WindowMetrics {
    std::vector<std::optional<double>> values;
    std::string error;
};

/// `leave_window_out` as in BootstrapReplicates.
WindowMetrics ComputeWindowMetrics(const DetectionWindow& window,
                                   std::span<const MetricDescriptor> metrics,
                                   const ReferenceSet& reference, const BootstrapSpec& spec,
                                   bool leave_window_out = false);

/// ComputeWindowMetrics over many windows. Results do not depend on the
/// thread count.
std::vector<WindowMetrics> ComputeMetricMatrix(std::span<const DetectionWindow> windows,
                                               std::span<const MetricDescriptor> metrics,
                                               const ReferenceSet& reference,
                                               const BootstrapSpec& spec, int threads = 1,
                                               bool leave_window_out = false);

struct Standardization {
    double offset = 0.0;  // zeta
    double scale = 0.0;   // eta
};

/// Mean and population standard deviation of each metric over the windows.
/// `values[w][i]` is metric i on window w. Throws Error(kInsufficientWindows)
/// with fewer than 2 windows, Error(kEmptyEffectiveSample) when a value is
/// missing.
std::vector<Standardization> StandardizeCalibrate(
    std::span<const std::vector<std::optional<double>>> values);

/// (m - zeta) / eta. Throws Error(kNonPositiveScale) unless eta > 0.
double Standardize(double m, double zeta, double eta);

enum class CorrelationKind { kPearson, kSpearman };
const char* CorrelationName(CorrelationKind kind);
CorrelationKind ParseCorrelationKind(const std::string& name);

/// alpha_i = |corr(standardized[.][i], rho)|; 0 when either side is
/// constant. Throws Error(kInsufficientWindows) with fewer than 3 windows.
std::vector<double> WeightCalibrate(std::span<const std::vector<double>> standardized,
                                    std::span<const double> rho,
                                    CorrelationKind kind = CorrelationKind::kPearson);

struct CalibrationOptions {
    WindowSpec window_spec;
    BootstrapSpec bootstrap_spec;
    MetricGroups groups;
    double scale_floor = 1e-9;
    bool normalize_weights = true;
    bool weights = true;  // false: skip weight calibration (MMC_0 only)
    CorrelationKind correlation = CorrelationKind::kPearson;
    /// Hard-mined windows added to the weight-calibration set, as a multiple
    /// of the number of reference windows, cycling through the Q levels.
    double hard_ratio = 1.0;
    std::vector<double> hard_quantiles = {0.25, 0.5};
    int threads = 1;
    std::string created_at;
};

struct CalibrationDiagnostics {
    int reference_windows = 0;
    int alpha_windows = 0;       // windows with a defined AUROC
    std::vector<std::string> excluded_metrics;
    std::vector<std::string> warnings;
    /// Standardized values over the reference windows, for self-checks.
    std::vector<std::vector<double>> reference_standardized;
};

/// Full calibration on the reference stream: (zeta, eta) over the reference
/// windows, alpha over those windows plus hard-mined ones. Reference windows
/// are compared against the reference with their own exams left out, so the
/// offsets match what an unseen window from the same population produces.
/// Without ground truth the weights are left absent and a warning is
/// recorded.
Calibration Calibrate(const ReferenceSet& reference, const CalibrationOptions& options,
                      CalibrationDiagnostics* diagnostics = nullptr);

/// Restricts a calibration to the enabled metric groups.
Calibration RestrictCalibration(const Calibration& calibration, const MetricGroups& groups);

/// Standardized values and both aggregates of one window.
struct WindowConcordance {
    std::vector<std::optional<double>> standardized;
    std::optional<double> mmc0;
    std::optional<double> mmcw;
};

/// Aggregates raw values aligned with `calibration.metrics`. Every distance
/// statistic enters with a negative sign. Excluded or missing metrics are
/// left out; MMC_w is absent when no usable weight remains.
WindowConcordance Aggregate(std::span<const std::optional<double>> raw,
                            const Calibration& calibration);

/// MMC of one window. Throws Error(kCalibrationMismatch) when the
/// fingerprints differ and Error(kSkippedWindow) below min_exams.
double Mmc(const DetectionWindow& window, const Calibration& calibration,
           const ReferenceSet& reference, bool weighted);

struct SeriesOptions {
    std::optional<Date> start;  // default: first date + length - 1
    std::optional<Date> end;    // default: last date
    int threads = 1;
    int auroc_label = -1;       // restrict the AUROC to one label
};

/// One row per window. Component failures are recorded on the row.
/// Throws Error(kCalibrationMismatch) when the fingerprints differ.
ConcordanceSeries RunSeries(std::span<const ExamRecord> stream, const Calibration& calibration,
                            const ReferenceSet& reference, const SeriesOptions& options);

}  // namespace mmc
