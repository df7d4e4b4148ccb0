/// @file series_io.h
/// @brief Comma-separated export and import of concordance series

#pragma once

#include <string>

#include "mmc/core_model.h"

namespace mmc {

/// Header: date,n_exams,skipped,mmc0,mmcw,auroc,error, then raw_<id> for
/// every metric, then std_<id>. Absent values are empty cells; numbers use
/// the shortest round-trip form.
std::string SeriesToCsv(const ConcordanceSeries& series);

/// Throws Error(kParse) on malformed input.
ConcordanceSeries SeriesFromCsv(const std::string& text);

void WriteSeries(const std::string& path, const ConcordanceSeries& series);
ConcordanceSeries ReadSeries(const std::string& path);

}  // namespace mmc
