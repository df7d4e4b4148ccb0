/// @file pipeline.cpp

#include "mmc/pipeline.h"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <set>

#include <spdlog/spdlog.h>

#include "mmc/error.h"
#include "mmc/record_io.h"
#include "mmc/windowing.h"

namespace mmc {

std::vector<ExamRecord> LoadStream(const std::string& path, const std::string& schema_path,
                                   FeatureSchema* schema_out) {
    FeatureSchema schema;
    if (!schema_path.empty()) {
        schema = ReadSchema(schema_path);
    } else if (std::filesystem::exists(SchemaSidecarPath(path))) {
        schema = ReadSchema(SchemaSidecarPath(path));
    } else {
        spdlog::warn("no schema for '{}', assuming the default schema", path);
        schema = DefaultSchema();
    }
    auto records = ReadStream(path, schema);
    if (schema_out) *schema_out = schema;
    return records;
}

std::string CreationTimestamp() {
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        char* end = nullptr;
        const long long v = std::strtoll(epoch, &end, 10);
        if (*end != '\0' || v < 0) {
            throw Error(ErrorCode::kInvalidConfig, "SOURCE_DATE_EPOCH is not a timestamp");
        }
        t = static_cast<std::time_t>(v);
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

SimulateSummary Simulate(const SimulateRequest& request) {
    if (request.out.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "an output path is required");
    }
    sim::PopulationSpec pop = sim::DefaultPopulation(request.seed, request.latent_dim);
    if (!request.population_config.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(ReadFile(request.population_config));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::kInvalidConfig, request.population_config + ": " + e.what());
        }
        sim::PopulationFromJson(j, pop);
    }
    const sim::ScenarioSpec& scenario = request.scenario;
    scenario.Validate();

    auto base = sim::GenerateBaseline(pop, scenario.start, scenario.end);
    auto stream = sim::ApplyScenario(std::move(base), scenario, pop);
    WriteStream(request.out, stream, pop.schema);
    WriteSchema(SchemaSidecarPath(request.out), pop.schema);

    SimulateSummary s;
    s.first = scenario.start;
    s.last = scenario.end;
    s.exams = stream.size();
    std::set<std::int32_t> days;
    for (const auto& e : stream) days.insert(e.timestamp.date.days());
    s.days = days.size();
    s.text = std::string("scenario ") + sim::ScenarioName(scenario.kind) + ": " +
             std::to_string(s.exams) + " exams over " + std::to_string(s.days) + " days, " +
             scenario.start.ToString() + " to " + scenario.end.ToString();
    switch (scenario.kind) {
        case sim::ScenarioKind::kBaseline:
            break;
        case sim::ScenarioKind::kHardMining: {
            char q[32];
            std::snprintf(q, sizeof(q), "%g", scenario.q);
            s.text += "; pool replacement from " + scenario.point_a.ToString() + " (Q=" + q + ")";
            break;
        }
        case sim::ScenarioKind::kMetadataFilterFailure:
        case sim::ScenarioKind::kNoMetadataOod:
            s.text += "; point A " + scenario.point_a.ToString() + ", point B " +
                      scenario.point_b.ToString();
            break;
    }
    return s;
}

ConcordanceSeries Monitor(const ReferenceSet& reference, const Calibration& calibration,
                          const MonitorRequest& request) {
    FeatureSchema schema;
    auto stream = LoadStream(request.stream, request.schema, &schema);
    if (!(schema == calibration.schema)) {
        throw Error(ErrorCode::kCalibrationMismatch, "stream schema differs from the calibration");
    }
    SortByDate(stream);
    const Calibration restricted = RestrictCalibration(calibration, request.groups);
    return RunSeries(stream, restricted, reference, request.series);
}

}  // namespace mmc
