/// @file series_io.cpp

#include "mmc/series_io.h"

#include <charconv>
#include <sstream>

#include "mmc/error.h"
#include "mmc/record_io.h"

namespace mmc {

namespace {

constexpr int kFixedColumns = 7;

void AppendNumber(std::string& out, const std::optional<double>& v) {
    if (!v) return;
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), *v);
    out.append(buf, end);
}

void AppendQuoted(std::string& out, const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        out += text;
        return;
    }
    out += '"';
    for (char c : text) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    out += '"';
}

std::vector<std::string> SplitCsvLine(const std::string& line, int line_no) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cells.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.emplace_back();
        } else {
            cells.back() += c;
        }
    }
    if (quoted) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": unterminated quote");
    }
    return cells;
}

std::optional<double> ParseCell(const std::string& cell, int line_no) {
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(line_no) + ": bad number '" + cell + "'");
    }
    return v;
}

}  // namespace

std::string SeriesToCsv(const ConcordanceSeries& series) {
    std::string out = "date,n_exams,skipped,mmc0,mmcw,auroc,error";
    for (const auto& id : series.metric_ids) out += ",raw_" + id;
    for (const auto& id : series.metric_ids) out += ",std_" + id;
    out += '\n';
    for (const auto& row : series.rows) {
        out += row.index_date.ToString();
        out += ',' + std::to_string(row.n_exams);
        out += row.skipped ? ",1," : ",0,";
        AppendNumber(out, row.mmc0);
        out += ',';
        AppendNumber(out, row.mmcw);
        out += ',';
        AppendNumber(out, row.auroc);
        out += ',';
        AppendQuoted(out, row.error);
        for (std::size_t i = 0; i < series.metric_ids.size(); ++i) {
            out += ',';
            if (i < row.raw.size()) AppendNumber(out, row.raw[i]);
        }
        for (std::size_t i = 0; i < series.metric_ids.size(); ++i) {
            out += ',';
            if (i < row.standardized.size()) AppendNumber(out, row.standardized[i]);
        }
        out += '\n';
    }
    return out;
}

ConcordanceSeries SeriesFromCsv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 1;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::kParse, "series file is empty");
    }
    const auto header = SplitCsvLine(line, line_no);
    static const char* kExpected[kFixedColumns] = {"date", "n_exams", "skipped", "mmc0",
                                                   "mmcw", "auroc",   "error"};
    if (header.size() < kFixedColumns || (header.size() - kFixedColumns) % 2 != 0) {
        throw Error(ErrorCode::kParse, "series header has an unexpected column count");
    }
    for (int i = 0; i < kFixedColumns; ++i) {
        if (header[i] != kExpected[i]) {
            throw Error(ErrorCode::kParse, "series header column " + std::to_string(i + 1) +
                                               " should be '" + kExpected[i] + "'");
        }
    }
    ConcordanceSeries series;
    const std::size_t n_metrics = (header.size() - kFixedColumns) / 2;
    for (std::size_t i = 0; i < n_metrics; ++i) {
        const auto& raw = header[kFixedColumns + i];
        const auto& std_col = header[kFixedColumns + n_metrics + i];
        if (raw.rfind("raw_", 0) != 0 || std_col != "std_" + raw.substr(4)) {
            throw Error(ErrorCode::kParse, "metric columns are not paired raw_/std_");
        }
        series.metric_ids.push_back(raw.substr(4));
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = SplitCsvLine(line, line_no);
        if (cells.size() != header.size()) {
            throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(header.size()) + " cells");
        }
        SeriesRow row;
        try {
            row.index_date = Date::Parse(cells[0]);
        } catch (const Error& e) {
            throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.what());
        }
        const auto n = ParseCell(cells[1], line_no);
        if (!n) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": no n_exams");
        row.n_exams = static_cast<int>(*n);
        if (cells[2] != "0" && cells[2] != "1") {
            throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": bad skipped flag");
        }
        row.skipped = cells[2] == "1";
        row.mmc0 = ParseCell(cells[3], line_no);
        row.mmcw = ParseCell(cells[4], line_no);
        row.auroc = ParseCell(cells[5], line_no);
        row.error = cells[6];
        for (std::size_t i = 0; i < n_metrics; ++i) {
            row.raw.push_back(ParseCell(cells[kFixedColumns + i], line_no));
            row.standardized.push_back(ParseCell(cells[kFixedColumns + n_metrics + i], line_no));
        }
        series.rows.push_back(std::move(row));
    }
    return series;
}

void WriteSeries(const std::string& path, const ConcordanceSeries& series) {
    WriteFileAtomic(path, SeriesToCsv(series));
}

ConcordanceSeries ReadSeries(const std::string& path) { return SeriesFromCsv(ReadFile(path)); }

}  // namespace mmc
