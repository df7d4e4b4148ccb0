/// @file calibration_io.cpp

#include "mmc/calibration_io.h"

#include "mmc/error.h"
#include "mmc/record_io.h"

namespace mmc {

using json = nlohmann::json;

json CalibrationToJson(const Calibration& cal) {
    json j;
    j["format_version"] = kCalibrationFormatVersion;
    j["created_at"] = cal.created_at;
    j["reference_fingerprint"] = cal.reference_fingerprint;
    j["schema"] = SchemaToJson(cal.schema);
    j["window"] = {{"length_days", cal.window_spec.length_days},
                   {"stride_days", cal.window_spec.stride_days},
                   {"min_exams", cal.window_spec.min_exams}};
    j["bootstrap"] = {{"samples", cal.bootstrap_spec.samples},
                      {"repeats", cal.bootstrap_spec.repeats},
                      {"seed", cal.bootstrap_spec.seed}};
    j["normalize_weights"] = cal.normalize_weights;
    j["provenance"] = cal.provenance;
    j["metrics"] = json::array();
    for (const auto& m : cal.metrics) {
        json jm = {{"metric_id", m.metric.metric_id},
                   {"kind", MetricKindName(m.metric.kind)},
                   {"source_group", SourceGroupName(m.metric.source_group)},
                   {"field_index", m.metric.field_index},
                   {"offset", m.offset},
                   {"scale", m.scale},
                   {"excluded", m.excluded}};
        jm["weight"] = m.weight ? json(*m.weight) : json(nullptr);
        j["metrics"].push_back(std::move(jm));
    }
    return j;
}

Calibration CalibrationFromJson(const json& j) {
    Calibration cal;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kCalibrationFormatVersion) {
            throw Error(ErrorCode::kParse,
                        "unsupported calibration format version " + std::to_string(version));
        }
        cal.created_at = j.value("created_at", std::string());
        cal.reference_fingerprint = j.at("reference_fingerprint").get<std::string>();
        cal.schema = SchemaFromJson(j.at("schema"));
        const auto& w = j.at("window");
        cal.window_spec = {w.at("length_days").get<int>(), w.at("stride_days").get<int>(),
                           w.at("min_exams").get<int>()};
        const auto& b = j.at("bootstrap");
        cal.bootstrap_spec = {b.at("samples").get<int>(), b.at("repeats").get<int>(),
                              b.at("seed").get<std::uint64_t>()};
        cal.normalize_weights = j.value("normalize_weights", true);
        cal.provenance = j.value("provenance", std::map<std::string, std::string>());
        for (const auto& jm : j.at("metrics")) {
            MetricCalibration m;
            m.metric.metric_id = jm.at("metric_id").get<std::string>();
            m.metric.kind = ParseMetricKind(jm.at("kind").get<std::string>());
            m.metric.source_group = ParseSourceGroup(jm.at("source_group").get<std::string>());
            m.metric.field_index = jm.at("field_index").get<int>();
            m.offset = jm.at("offset").get<double>();
            m.scale = jm.at("scale").get<double>();
            m.excluded = jm.value("excluded", false);
            if (jm.contains("weight") && !jm.at("weight").is_null()) {
                m.weight = jm.at("weight").get<double>();
                if (*m.weight < 0.0) {
                    throw Error(ErrorCode::kParse, "negative weight for " + m.metric.metric_id);
                }
            }
            if (!m.excluded && !(m.scale > 0.0)) {
                throw Error(ErrorCode::kParse, "non-positive scale for " + m.metric.metric_id);
            }
            cal.metrics.push_back(std::move(m));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("calibration: ") + e.what());
    }
    cal.window_spec.Validate();
    cal.bootstrap_spec.Validate();
    return cal;
}

void WriteCalibration(const std::string& path, const Calibration& calibration) {
    WriteFileAtomic(path, CalibrationToJson(calibration).dump(2) + "\n");
}

Calibration ReadCalibration(const std::string& path) {
    json j;
    try {
        j = json::parse(ReadFile(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, "calibration '" + path + "': " + e.what());
    }
    return CalibrationFromJson(j);
}

}  // namespace mmc
