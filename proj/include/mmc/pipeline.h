/// @file pipeline.h
/// @brief Command-level workflows shared by the C API

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmc/concordance.h"
#include "mmc/report.h"
#include "mmc/simulator.h"
#include "mmc/vae.h"

namespace mmc {

/// Reads a stream with its schema: `schema_path` if given, else the sidecar
/// next to the stream, else the default schema.
std::vector<ExamRecord> LoadStream(const std::string& path, const std::string& schema_path,
                                   FeatureSchema* schema_out);

/// Creation time for artifacts: SOURCE_DATE_EPOCH when set, else now (UTC).
std::string CreationTimestamp();

struct SimulateRequest {
    std::string out;
    std::string population_config;  // optional JSON file
    std::string scenario_config;    // optional JSON file, applied before the overrides below
    std::uint64_t seed = 7;
    int latent_dim = 16;
    sim::ScenarioSpec scenario;
};

struct SimulateSummary {
    Date first;
    Date last;
    std::size_t exams = 0;
    std::size_t days = 0;
    std::string text;  // human-readable description
};

SimulateSummary Simulate(const SimulateRequest& request);

struct MonitorRequest {
    std::string stream;
    std::string schema;
    MetricGroups groups;
    SeriesOptions series;
};

ConcordanceSeries Monitor(const ReferenceSet& reference, const Calibration& calibration,
                          const MonitorRequest& request);

}  // namespace mmc
