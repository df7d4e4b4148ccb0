/// @file record_io.h
/// @brief Line-delimited JSON exam streams and schema documents

#pragma once

#include <string>
#include <vector>

#include "mmc/core_model.h"
#include <nlohmann/json.hpp>

namespace mmc {

nlohmann::json SchemaToJson(const FeatureSchema& schema);
FeatureSchema SchemaFromJson(const nlohmann::json& j);

/// One exam as a JSON object. Missing values are written as null; the
/// ground_truth key is omitted when the exam carries no labels.
nlohmann::json RecordToJson(const ExamRecord& record, const FeatureSchema& schema);
ExamRecord RecordFromJson(const nlohmann::json& j, const FeatureSchema& schema);

/// Compact single-line serialization used for stream files and fingerprints.
std::string RecordToLine(const ExamRecord& record, const FeatureSchema& schema);

/// Reads and validates a stream, one exam per line. Blank lines are skipped.
std::vector<ExamRecord> ReadStream(const std::string& path, const FeatureSchema& schema);
void WriteStream(const std::string& path, const std::vector<ExamRecord>& records,
                 const FeatureSchema& schema);

FeatureSchema ReadSchema(const std::string& path);
void WriteSchema(const std::string& path, const FeatureSchema& schema);

/// Sidecar path conventionally holding the schema of a stream file.
std::string SchemaSidecarPath(const std::string& stream_path);

/// Writes to a temporary file next to `path` and renames it into place.
void WriteFileAtomic(const std::string& path, const std::string& content);
std::string ReadFile(const std::string& path);

}  // namespace mmc
