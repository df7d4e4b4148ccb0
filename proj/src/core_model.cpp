/// @file core_model.cpp
/// @brief Schema and record validation

#include "mmc/core_model.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "mmc/error.h"

namespace mmc {

std::string_view ErrorCodeName(ErrorCode code) {
    switch (code) {
        case ErrorCode::kSchemaViolation: return "SchemaViolation";
        case ErrorCode::kEmptyInput: return "EmptyInput";
        case ErrorCode::kEmptySample: return "EmptySample";
        case ErrorCode::kEmptyWindow: return "EmptyWindow";
        case ErrorCode::kZeroExpected: return "ZeroExpected";
        case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
        case ErrorCode::kZeroVariance: return "ZeroVariance";
        case ErrorCode::kInvalidRange: return "InvalidRange";
        case ErrorCode::kEmptyEffectiveSample: return "EmptyEffectiveSample";
        case ErrorCode::kInsufficientWindows: return "InsufficientWindows";
        case ErrorCode::kNonPositiveScale: return "NonPositiveScale";
        case ErrorCode::kCalibrationMismatch: return "CalibrationMismatch";
        case ErrorCode::kSkippedWindow: return "SkippedWindow";
        case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
        case ErrorCode::kNonFinite: return "NonFinite";
        case ErrorCode::kEmptyPool: return "EmptyPool";
        case ErrorCode::kInvalidScenarioDates: return "InvalidScenarioDates";
        case ErrorCode::kInvalidConfig: return "InvalidConfig";
        case ErrorCode::kParse: return "ParseError";
        case ErrorCode::kIo: return "IoError";
    }
    return "Unknown";
}

void FeatureSchema::Validate() const {
    std::set<std::string> names;
    auto add = [&](const std::string& name) {
        if (name.empty()) {
            throw Error(ErrorCode::kSchemaViolation, "empty feature name");
        }
        if (!names.insert(name).second) {
            throw Error(ErrorCode::kSchemaViolation, "duplicate feature name '" + name + "'");
        }
    };
    for (const auto& f : categorical) {
        add(f.name);
        if (f.categories.empty()) {
            throw Error(ErrorCode::kSchemaViolation,
                        "categorical feature '" + f.name + "' has no categories");
        }
        std::set<std::string> cats(f.categories.begin(), f.categories.end());
        if (cats.size() != f.categories.size() || cats.count(kMissingCategory)) {
            throw Error(ErrorCode::kSchemaViolation,
                        "categorical feature '" + f.name + "' has invalid categories");
        }
    }
    for (const auto& f : continuous) {
        add(f.name);
    }
    if (latent_dim < 1) {
        throw Error(ErrorCode::kSchemaViolation, "latent_dim must be >= 1");
    }
    if (labels.empty()) {
        throw Error(ErrorCode::kSchemaViolation, "label list is empty");
    }
    std::set<std::string> label_names(labels.begin(), labels.end());
    if (label_names.size() != labels.size()) {
        throw Error(ErrorCode::kSchemaViolation, "duplicate label name");
    }
}

int FeatureSchema::LabelIndex(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

FeatureSchema DefaultSchema(int latent_dim) {
    FeatureSchema schema;
    schema.categorical = {
        {"view_position", {"PA", "AP", "AP_horizontal", "LATERAL", "other"}, true},
        {"sex", {"M", "F"}, true},
        {"manufacturer", {"Philips", "Siemens", "ImagingDynamics"}, true},
        {"modality", {"CR", "DX"}, true},
    };
    schema.continuous = {{"age", "years"}, {"exposure", "mAs"}};
    schema.latent_dim = latent_dim;
    schema.labels = {"atelectasis",  "cardiomegaly", "consolidation",
                     "edema",        "lesion",       "fracture",
                     "opacity",      "pleural_abnormalities",
                     "pleural_effusion", "pneumonia"};
    return schema;
}

const ExamRecord& ValidateRecord(const ExamRecord& record, const FeatureSchema& schema) {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorCode::kSchemaViolation, "exam '" + record.exam_id + "': " + what);
    };
    if (record.categorical.size() != schema.categorical.size()) {
        fail("categorical field count mismatch");
    }
    for (std::size_t i = 0; i < schema.categorical.size(); ++i) {
        const auto& feature = schema.categorical[i];
        const auto& value = record.categorical[i];
        if (!value) {
            if (!feature.allow_missing) {
                fail("categorical '" + feature.name + "' is missing");
            }
            continue;
        }
        if (std::find(feature.categories.begin(), feature.categories.end(), *value) ==
            feature.categories.end()) {
            fail("categorical '" + feature.name + "' has unknown category '" + *value + "'");
        }
    }
    if (record.continuous.size() != schema.continuous.size()) {
        fail("continuous field count mismatch");
    }
    for (std::size_t i = 0; i < schema.continuous.size(); ++i) {
        if (record.continuous[i] && !std::isfinite(*record.continuous[i])) {
            fail("continuous '" + schema.continuous[i].name + "' is not finite");
        }
    }
    if (static_cast<int>(record.latent.size()) != schema.latent_dim) {
        fail("latent length " + std::to_string(record.latent.size()) + " != latent_dim " +
             std::to_string(schema.latent_dim));
    }
    for (double v : record.latent) {
        if (!std::isfinite(v)) {
            fail("latent is not finite");
        }
    }
    if (record.predictions.size() != schema.labels.size()) {
        fail("predictions length mismatch");
    }
    for (double p : record.predictions) {
        if (!(p >= 0.0 && p <= 1.0)) {
            fail("predictions out of range [0,1]");
        }
    }
    if (record.HasGroundTruth() && record.ground_truth.size() != record.predictions.size()) {
        fail("ground_truth length differs from predictions");
    }
    return record;
}

void WindowSpec::Validate() const {
    if (length_days < 1 || stride_days < 1 || min_exams < 0) {
        throw Error(ErrorCode::kInvalidConfig,
                    "window spec requires length >= 1, stride >= 1, min_exams >= 0");
    }
}

void BootstrapSpec::Validate() const {
    if (samples < 1 || repeats < 1) {
        throw Error(ErrorCode::kInvalidConfig, "bootstrap requires K >= 1 and N >= 1");
    }
}

const char* MetricKindName(MetricKind kind) {
    return kind == MetricKind::kCategoricalChi2 ? "categorical-chi2" : "continuous-ks";
}

const char* SourceGroupName(SourceGroup group) {
    switch (group) {
        case SourceGroup::kMetadata: return "metadata";
        case SourceGroup::kLatent: return "latent";
        case SourceGroup::kPrediction: return "prediction";
    }
    return "metadata";
}

MetricKind ParseMetricKind(const std::string& text) {
    if (text == "categorical-chi2") return MetricKind::kCategoricalChi2;
    if (text == "continuous-ks") return MetricKind::kContinuousKs;
    throw Error(ErrorCode::kParse, "unknown metric kind '" + text + "'");
}

SourceGroup ParseSourceGroup(const std::string& text) {
    if (text == "metadata") return SourceGroup::kMetadata;
    if (text == "latent") return SourceGroup::kLatent;
    if (text == "prediction") return SourceGroup::kPrediction;
    throw Error(ErrorCode::kParse, "unknown source group '" + text + "'");
}

const MetricCalibration* Calibration::Find(const std::string& metric_id) const {
    for (const auto& m : metrics) {
        if (m.metric.metric_id == metric_id) {
            return &m;
        }
    }
    return nullptr;
}

}  // namespace mmc
