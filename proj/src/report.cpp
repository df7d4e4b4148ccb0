/// @file report.cpp

#include "mmc/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mmc/error.h"

namespace mmc {

namespace {

struct Accumulator {
    double sum = 0.0;
    int n = 0;
    void Add(const std::optional<double>& v) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    std::optional<double> Mean() const {
        return n > 0 ? std::optional<double>(sum / n) : std::nullopt;
    }
};

std::optional<double> Diff(const std::optional<double>& a, const std::optional<double>& b) {
    if (a && b) return *a - *b;
    return std::nullopt;
}

std::string ChangeLabel(std::size_t i) {
    return i < 26 ? std::string(1, static_cast<char>('A' + i)) : "cp" + std::to_string(i + 1);
}

}  // namespace

Report BuildReport(const ConcordanceSeries& series, std::span<const Date> change_points,
                   int settle_days) {
    for (std::size_t i = 1; i < change_points.size(); ++i) {
        if (!(change_points[i - 1] < change_points[i])) {
            throw Error(ErrorCode::kInvalidConfig, "change points must be increasing");
        }
    }
    if (settle_days < 0) {
        throw Error(ErrorCode::kInvalidConfig, "settle days must be non-negative");
    }
    Report report;
    report.change_points.assign(change_points.begin(), change_points.end());
    if (series.rows.empty()) {
        report.notice = "series is empty; nothing to report";
        return report;
    }

    const std::size_t n_segments = change_points.size() + 1;
    std::vector<Accumulator> mmcw(n_segments), mmc0(n_segments), auroc(n_segments);
    std::vector<std::vector<Accumulator>> metric(
        n_segments, std::vector<Accumulator>(series.metric_ids.size()));
    report.segments.resize(n_segments);
    for (std::size_t s = 0; s < n_segments; ++s) {
        report.segments[s].label = s == 0 ? "pre" : "post-" + ChangeLabel(s - 1);
    }

    for (const auto& row : series.rows) {
        const auto seg = static_cast<std::size_t>(
            std::upper_bound(change_points.begin(), change_points.end(), row.index_date) -
            change_points.begin());
        if (seg > 0 && row.index_date < change_points[seg - 1] + settle_days) continue;
        auto& summary = report.segments[seg];
        if (row.skipped) {
            ++summary.skipped;
            continue;
        }
        if (!summary.first) summary.first = row.index_date;
        summary.last = row.index_date;
        ++summary.windows;
        mmcw[seg].Add(row.mmcw);
        mmc0[seg].Add(row.mmc0);
        auroc[seg].Add(row.auroc);
        for (std::size_t i = 0; i < row.standardized.size() && i < series.metric_ids.size(); ++i) {
            metric[seg][i].Add(row.standardized[i]);
        }
    }

    for (std::size_t s = 0; s < n_segments; ++s) {
        auto& summary = report.segments[s];
        summary.mmcw = mmcw[s].Mean();
        summary.mmc0 = mmc0[s].Mean();
        summary.auroc = auroc[s].Mean();
        for (std::size_t i = 0; i < series.metric_ids.size(); ++i) {
            if (auto m = metric[s][i].Mean()) {
                summary.top_metrics.emplace_back(series.metric_ids[i], *m);
            }
        }
        std::stable_sort(summary.top_metrics.begin(), summary.top_metrics.end(),
                         [](const auto& a, const auto& b) {
                             return std::abs(a.second) > std::abs(b.second);
                         });
        if (summary.top_metrics.size() > 5) summary.top_metrics.resize(5);
    }
    for (std::size_t s = 1; s < n_segments; ++s) {
        const auto& cur = report.segments[s];
        const auto& prev = report.segments[s - 1];
        report.deltas.push_back({ChangeLabel(s - 1), Diff(cur.mmcw, prev.mmcw),
                                 Diff(cur.mmc0, prev.mmc0), Diff(cur.auroc, prev.auroc)});
    }
    return report;
}

nlohmann::json ReportToJson(const Report& report) {
    using json = nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["change_points"] = json::array();
    for (const auto& c : report.change_points) j["change_points"].push_back(c.ToString());
    if (!report.notice.empty()) j["notice"] = report.notice;
    j["segments"] = json::array();
    for (const auto& s : report.segments) {
        json js = {{"label", s.label}, {"windows", s.windows}, {"skipped", s.skipped},
                   {"mmcw", opt(s.mmcw)},  {"mmc0", opt(s.mmc0)},     {"auroc", opt(s.auroc)}};
        js["first"] = s.first ? json(s.first->ToString()) : json(nullptr);
        js["last"] = s.last ? json(s.last->ToString()) : json(nullptr);
        js["top_metrics"] = json::array();
        for (const auto& [id, v] : s.top_metrics) {
            js["top_metrics"].push_back({{"metric_id", id}, {"mean_standardized", v}});
        }
        j["segments"].push_back(std::move(js));
    }
    j["deltas"] = json::array();
    for (const auto& d : report.deltas) {
        j["deltas"].push_back({{"at", d.label},
                               {"mmcw", opt(d.mmcw)},
                               {"mmc0", opt(d.mmc0)},
                               {"auroc", opt(d.auroc)}});
    }
    return j;
}

std::string ReportToText(const Report& report) {
    auto fmt = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", *v);
        return std::string(buf);
    };
    std::string out;
    if (!report.notice.empty()) {
        return report.notice + "\n";
    }
    for (const auto& s : report.segments) {
        out += s.label + ": windows=" + std::to_string(s.windows) +
               " skipped=" + std::to_string(s.skipped) + " mmcw=" + fmt(s.mmcw) +
               " mmc0=" + fmt(s.mmc0) + " auroc=" + fmt(s.auroc) + "\n";
        for (const auto& [id, v] : s.top_metrics) {
            out += "    " + id + " " + fmt(v) + "\n";
        }
    }
    for (const auto& d : report.deltas) {
        out += "delta at " + d.label + ": mmcw=" + fmt(d.mmcw) + " mmc0=" + fmt(d.mmc0) +
               " auroc=" + fmt(d.auroc) + "\n";
    }
    return out;
}

}  // namespace mmc
