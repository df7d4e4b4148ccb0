/// @file calibration_io.h
/// @brief JSON document for a Calibration

#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mmc/core_model.h"

namespace mmc {

inline constexpr int kCalibrationFormatVersion = 1;

nlohmann::json CalibrationToJson(const Calibration& calibration);
/// Throws Error(kParse) on a malformed or wrong-version document.
Calibration CalibrationFromJson(const nlohmann::json& j);

void WriteCalibration(const std::string& path, const Calibration& calibration);
Calibration ReadCalibration(const std::string& path);

}  // namespace mmc
