/// @file core_model.h
/// @brief Shared data model: feature schema, exam records, windows, metrics,
///        calibration and concordance series

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmc/date.h"

namespace mmc {

/// Category name used for a missing categorical value.
inline constexpr const char* kMissingCategory = "<missing>";

struct CategoricalFeature {
    std::string name;
    std::vector<std::string> categories;
    bool allow_missing = true;

    bool operator==(const CategoricalFeature&) const = default;
};

struct ContinuousFeature {
    std::string name;
    std::string unit;

    bool operator==(const ContinuousFeature&) const = default;
};

/// Describes the three input groups: metadata (categorical + continuous),
/// the appearance latent, and the per-label soft predictions.
struct FeatureSchema {
    std::vector<CategoricalFeature> categorical;
    std::vector<ContinuousFeature> continuous;
    int latent_dim = 1;
    std::vector<std::string> labels;

    /// Throws Error(kSchemaViolation) if names collide, latent_dim < 1 or
    /// the label list is empty.
    void Validate() const;

    int LabelIndex(const std::string& label) const;  // -1 if absent

    bool operator==(const FeatureSchema&) const = default;
};

/// Default schema used by the simulator: four categorical and two continuous
/// metadata fields, a 16-dimensional latent and ten labels.
FeatureSchema DefaultSchema(int latent_dim = 16);

enum class LabelState : std::int8_t { kUnknown = -1, kNegative = 0, kPositive = 1 };

/// One imaging exam. Metadata vectors are aligned with the schema's
/// feature order; std::nullopt marks a missing value.
struct ExamRecord {
    std::string exam_id;
    Timestamp timestamp;
    std::vector<std::optional<std::string>> categorical;
    std::vector<std::optional<double>> continuous;
    std::vector<double> latent;
    std::vector<double> predictions;
    /// Empty when the exam has no ground truth at all.
    std::vector<LabelState> ground_truth;

    bool HasGroundTruth() const { return !ground_truth.empty(); }

    bool operator==(const ExamRecord&) const = default;
};

/// Returns the record unchanged if it satisfies the schema, otherwise throws
/// Error(kSchemaViolation) naming the failing field.
const ExamRecord& ValidateRecord(const ExamRecord& record, const FeatureSchema& schema);

/// SHA-256 over the canonical serialization of the exams, in the given order.
/// Throws Error(kEmptyInput) on an empty list.
std::string Fingerprint(std::span<const ExamRecord> exams);

struct WindowSpec {
    int length_days = 30;
    int stride_days = 1;
    int min_exams = 150;

    void Validate() const;
    bool operator==(const WindowSpec&) const = default;
};

/// Exams with timestamp date in (index_date - length_days, index_date].
/// The span views into a date-sorted stream owned by the caller.
struct DetectionWindow {
    Date index_date;
    std::span<const ExamRecord> exams;
};

enum class MetricKind { kCategoricalChi2, kContinuousKs };
enum class SourceGroup { kMetadata, kLatent, kPrediction };

const char* MetricKindName(MetricKind kind);
const char* SourceGroupName(SourceGroup group);
MetricKind ParseMetricKind(const std::string& text);
SourceGroup ParseSourceGroup(const std::string& text);

/// Identity of one metric function. `field_index` addresses the categorical
/// feature, continuous feature, latent dimension or label, depending on the
/// id prefix ("cat:", "cont:", "latent:", "pred:").
struct MetricDescriptor {
    std::string metric_id;
    MetricKind kind = MetricKind::kContinuousKs;
    SourceGroup source_group = SourceGroup::kMetadata;
    int field_index = 0;

    bool operator==(const MetricDescriptor&) const = default;
};

struct BootstrapSpec {
    int samples = 2500;  // K
    int repeats = 20;    // N
    std::uint64_t seed = 0;

    void Validate() const;
    bool operator==(const BootstrapSpec&) const = default;
};

struct MetricCalibration {
    MetricDescriptor metric;
    double offset = 0.0;           // zeta
    double scale = 1.0;            // eta
    std::optional<double> weight;  // alpha; absent when no ground truth was available
    bool excluded = false;         // scale below the floor
};

/// Persisted output of calibration.
struct Calibration {
    FeatureSchema schema;
    WindowSpec window_spec;
    BootstrapSpec bootstrap_spec;
    std::vector<MetricCalibration> metrics;
    std::string reference_fingerprint;
    std::string created_at;
    bool normalize_weights = true;
    std::map<std::string, std::string> provenance;

    const MetricCalibration* Find(const std::string& metric_id) const;
};

struct SeriesRow {
    Date index_date;
    int n_exams = 0;
    bool skipped = false;
    std::string error;  // empty unless a component failed for this row
    /// Aligned with ConcordanceSeries::metric_ids; nullopt when not computed.
    std::vector<std::optional<double>> raw;
    std::vector<std::optional<double>> standardized;
    std::optional<double> mmc0;
    std::optional<double> mmcw;
    std::optional<double> auroc;
};

struct ConcordanceSeries {
    std::vector<std::string> metric_ids;
    std::vector<SeriesRow> rows;
};

}  // namespace mmc
