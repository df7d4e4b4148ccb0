/// @file c_api.cpp
/// @brief extern "C" wrappers over the core library

#include "mmc/mmc.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mmc/calibration_io.h"
#include "mmc/concordance.h"
#include "mmc/error.h"
#include "mmc/images.h"
#include "mmc/pipeline.h"
#include "mmc/record_io.h"
#include "mmc/report.h"
#include "mmc/series_io.h"
#include "mmc/vae.h"

struct mmc_reference {
    mmc::ReferenceSet set;
};

struct mmc_calibration {
    mmc::Calibration cal;
    std::string warnings;
};

struct mmc_series {
    mmc::ConcordanceSeries series;
};

namespace {

thread_local std::string g_last_error;

void EnsureLogger() {
    static std::once_flag once;
    std::call_once(once, [] {
        auto logger = spdlog::stderr_color_mt("mmc");
        logger->set_pattern("%l: %v");
        spdlog::set_default_logger(logger);
    });
}

mmc_status StatusOf(mmc::ErrorCode code) {
    using mmc::ErrorCode;
    switch (code) {
        case ErrorCode::kInvalidConfig:
        case ErrorCode::kInvalidScenarioDates:
        case ErrorCode::kInvalidRange:
            return MMC_ERR_CONFIG;
        case ErrorCode::kCalibrationMismatch:
            return MMC_ERR_CALIBRATION_MISMATCH;
        case ErrorCode::kIo:
            return MMC_ERR_IO;
        default:
            return MMC_ERR_DATA;
    }
}

template <class F>
mmc_status Guard(F&& fn) {
    EnsureLogger();
    g_last_error.clear();
    try {
        fn();
        return MMC_OK;
    } catch (const mmc::Error& e) {
        g_last_error = e.what();
        return StatusOf(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return MMC_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MMC_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return MMC_ERR_INTERNAL;
    }
}

void Require(bool condition, const char* message) {
    if (!condition) throw mmc::Error(mmc::ErrorCode::kInvalidConfig, message);
}

mmc::Date OptionDate(const std::string& text) {
    try {
        return mmc::Date::Parse(text);
    } catch (const mmc::Error& e) {
        throw mmc::Error(mmc::ErrorCode::kInvalidConfig, e.what());
    }
}

char* CopyString(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string Str(const char* s) { return s ? std::string(s) : std::string(); }

mmc::MetricGroups Groups(const mmc_metric_groups& g) {
    return {g.metadata != 0, g.latent != 0, g.predictions != 0};
}

std::vector<mmc::Image> LoadImages(const char* const* paths, std::size_t count, int height,
                                   int width) {
    std::vector<mmc::Image> images;
    images.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Require(paths[i] != nullptr, "image path is null");
        images.push_back(mmc::ReadImage(paths[i], height, width));
    }
    return images;
}

}  // namespace

extern "C" {

const char* mmc_version(void) { return "0.1.0"; }

const char* mmc_last_error(void) { return g_last_error.c_str(); }

void mmc_string_free(char* s) { std::free(s); }

void mmc_set_log_level(mmc_log_level level) {
    EnsureLogger();
    switch (level) {
        case MMC_LOG_DEBUG: spdlog::set_level(spdlog::level::debug); break;
        case MMC_LOG_INFO: spdlog::set_level(spdlog::level::info); break;
        case MMC_LOG_WARN: spdlog::set_level(spdlog::level::warn); break;
        case MMC_LOG_ERROR: spdlog::set_level(spdlog::level::err); break;
        default: spdlog::set_level(spdlog::level::off); break;
    }
}

void mmc_simulate_options_init(mmc_simulate_options* options) {
    if (!options) return;
    const mmc::sim::ScenarioSpec defaults;
    *options = {};
    options->seed = 7;
    options->latent_dim = 16;
    options->scenario = MMC_SCENARIO_BASELINE;
    options->q = defaults.q;
    options->lateral_ratio = defaults.lateral_ratio;
    options->ood_ratio = defaults.ood_ratio;
}

mmc_status mmc_scenario_parse(const char* name, mmc_scenario* out) {
    return Guard([&] {
        Require(name && out, "null argument");
        *out = static_cast<mmc_scenario>(mmc::sim::ParseScenarioKind(name));
    });
}

mmc_status mmc_simulate(const mmc_simulate_options* options, char** summary) {
    return Guard([&] {
        Require(options != nullptr, "null options");
        Require(options->scenario >= MMC_SCENARIO_BASELINE &&
                    options->scenario <= MMC_SCENARIO_NO_METADATA_OOD,
                "unknown scenario");
        mmc::SimulateRequest request;
        request.out = Str(options->out);
        request.population_config = Str(options->population_config);
        request.seed = options->seed;
        request.latent_dim = options->latent_dim;
        auto& sc = request.scenario;
        sc.kind = static_cast<mmc::sim::ScenarioKind>(options->scenario);
        if (options->start) sc.start = OptionDate(options->start);
        if (options->end) sc.end = OptionDate(options->end);
        if (options->point_a) sc.point_a = OptionDate(options->point_a);
        if (options->point_b) sc.point_b = OptionDate(options->point_b);
        sc.q = options->q;
        sc.lateral_ratio = options->lateral_ratio;
        sc.ood_ratio = options->ood_ratio;
        const auto result = mmc::Simulate(request);
        if (summary) *summary = CopyString(result.text);
    });
}

mmc_status mmc_reference_load(const char* stream_path, const char* schema_path,
                              mmc_reference** out) {
    return Guard([&] {
        Require(stream_path && out, "null argument");
        *out = nullptr;
        mmc::FeatureSchema schema;
        auto exams = mmc::LoadStream(stream_path, Str(schema_path), &schema);
        *out = new mmc_reference{mmc::ReferenceSet(std::move(exams), std::move(schema))};
    });
}

void mmc_reference_free(mmc_reference* reference) { delete reference; }

const char* mmc_reference_fingerprint(const mmc_reference* reference) {
    return reference ? reference->set.fingerprint().c_str() : "";
}

size_t mmc_reference_exam_count(const mmc_reference* reference) {
    return reference ? reference->set.exams().size() : 0;
}

void mmc_calibrate_options_init(mmc_calibrate_options* options) {
    if (!options) return;
    const mmc::WindowSpec window;
    const mmc::BootstrapSpec bootstrap;
    *options = {};
    options->window = {window.length_days, window.stride_days, window.min_exams,
                       bootstrap.samples,  bootstrap.repeats,  7};
    options->groups = {1, 1, 1};
    options->hard_ratio = mmc::CalibrationOptions{}.hard_ratio;
}

mmc_status mmc_calibrate(const mmc_reference* reference, const mmc_calibrate_options* options,
                         mmc_calibration** out) {
    return Guard([&] {
        Require(reference && options && out, "null argument");
        *out = nullptr;
        mmc::CalibrationOptions opts;
        opts.window_spec = {options->window.window_days, options->window.stride_days,
                            options->window.min_exams};
        opts.bootstrap_spec = {options->window.bootstrap_k, options->window.bootstrap_n,
                               options->window.seed};
        opts.groups = Groups(options->groups);
        opts.weights = options->unweighted == 0;
        opts.normalize_weights = options->raw_weights == 0;
        opts.correlation =
            options->spearman ? mmc::CorrelationKind::kSpearman : mmc::CorrelationKind::kPearson;
        opts.hard_ratio = options->hard_ratio;
        Require(opts.hard_ratio >= 0.0, "hard ratio must be non-negative");
        opts.threads = options->threads;
        opts.created_at = mmc::CreationTimestamp();

        mmc::CalibrationDiagnostics diag;
        auto cal = mmc::Calibrate(reference->set, opts, &diag);
        std::string warnings;
        for (const auto& id : diag.excluded_metrics) {
            warnings += "metric " + id + " excluded: scale below the floor\n";
        }
        for (const auto& w : diag.warnings) warnings += w + "\n";
        for (const auto& id : diag.excluded_metrics) spdlog::warn("metric {} excluded", id);
        for (const auto& w : diag.warnings) spdlog::warn("{}", w);
        *out = new mmc_calibration{std::move(cal), std::move(warnings)};
    });
}

const char* mmc_calibration_warnings(const mmc_calibration* calibration) {
    return calibration ? calibration->warnings.c_str() : "";
}

mmc_status mmc_calibration_save(const mmc_calibration* calibration, const char* path) {
    return Guard([&] {
        Require(calibration && path, "null argument");
        mmc::WriteCalibration(path, calibration->cal);
    });
}

mmc_status mmc_calibration_load(const char* path, mmc_calibration** out) {
    return Guard([&] {
        Require(path && out, "null argument");
        *out = nullptr;
        *out = new mmc_calibration{mmc::ReadCalibration(path), {}};
    });
}

void mmc_calibration_free(mmc_calibration* calibration) { delete calibration; }

size_t mmc_calibration_metric_count(const mmc_calibration* calibration) {
    return calibration ? calibration->cal.metrics.size() : 0;
}

mmc_status mmc_calibration_metric(const mmc_calibration* calibration, size_t index,
                                  mmc_metric_info* out) {
    return Guard([&] {
        Require(calibration && out, "null argument");
        if (index >= calibration->cal.metrics.size()) {
            throw mmc::Error(mmc::ErrorCode::kInvalidRange, "metric index out of range");
        }
        const auto& m = calibration->cal.metrics[index];
        out->metric_id = m.metric.metric_id.c_str();
        out->offset = m.offset;
        out->scale = m.scale;
        out->has_weight = m.weight.has_value();
        out->weight = m.weight.value_or(0.0);
        out->excluded = m.excluded;
    });
}

void mmc_monitor_options_init(mmc_monitor_options* options) {
    if (!options) return;
    *options = {};
    options->groups = {1, 1, 1};
}

mmc_status mmc_monitor(const mmc_reference* reference, const mmc_calibration* calibration,
                       const mmc_monitor_options* options, mmc_series** out) {
    return Guard([&] {
        Require(reference && calibration && options && out, "null argument");
        Require(options->stream != nullptr, "a stream path is required");
        *out = nullptr;
        mmc::MonitorRequest request;
        request.stream = options->stream;
        request.schema = Str(options->schema);
        request.groups = Groups(options->groups);
        if (options->start) request.series.start = OptionDate(options->start);
        if (options->end) request.series.end = OptionDate(options->end);
        request.series.threads = options->threads;
        if (options->auroc_label) {
            const int label = calibration->cal.schema.LabelIndex(options->auroc_label);
            if (label < 0) {
                throw mmc::Error(mmc::ErrorCode::kInvalidConfig,
                                 std::string("unknown label '") + options->auroc_label + "'");
            }
            request.series.auroc_label = label;
        }
        auto series = mmc::Monitor(reference->set, calibration->cal, request);
        if (options->unweighted) {
            for (auto& row : series.rows) row.mmcw.reset();
        }
        *out = new mmc_series{std::move(series)};
    });
}

mmc_status mmc_series_save(const mmc_series* series, const char* path) {
    return Guard([&] {
        Require(series && path, "null argument");
        mmc::WriteSeries(path, series->series);
    });
}

mmc_status mmc_series_load(const char* path, mmc_series** out) {
    return Guard([&] {
        Require(path && out, "null argument");
        *out = nullptr;
        *out = new mmc_series{mmc::ReadSeries(path)};
    });
}

void mmc_series_free(mmc_series* series) { delete series; }

size_t mmc_series_row_count(const mmc_series* series) {
    return series ? series->series.rows.size() : 0;
}

mmc_status mmc_series_row_get(const mmc_series* series, size_t index, mmc_series_row* out) {
    return Guard([&] {
        Require(series && out, "null argument");
        if (index >= series->series.rows.size()) {
            throw mmc::Error(mmc::ErrorCode::kInvalidRange, "row index out of range");
        }
        const auto& row = series->series.rows[index];
        const std::string date = row.index_date.ToString();
        std::snprintf(out->index_date, sizeof(out->index_date), "%s", date.c_str());
        out->n_exams = row.n_exams;
        out->skipped = row.skipped;
        out->has_mmc0 = row.mmc0.has_value();
        out->mmc0 = row.mmc0.value_or(0.0);
        out->has_mmcw = row.mmcw.has_value();
        out->mmcw = row.mmcw.value_or(0.0);
        out->has_auroc = row.auroc.has_value();
        out->auroc = row.auroc.value_or(0.0);
        out->error = row.error.c_str();
    });
}

mmc_status mmc_report(const mmc_series* series, const char* change_points, int settle_days,
                      char** json_out, char** text_out) {
    return Guard([&] {
        Require(series != nullptr, "null series");
        Require(settle_days >= 0, "settle days must be non-negative");
        std::vector<mmc::Date> cps;
        if (change_points && *change_points) {
            std::stringstream ss(change_points);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) cps.push_back(OptionDate(item));
            }
        }
        const auto report = mmc::BuildReport(series->series, cps, settle_days);
        std::string json = mmc::ReportToJson(report).dump(2) + "\n";
        std::string text = mmc::ReportToText(report);
        if (json_out) *json_out = CopyString(json);
        if (text_out) *text_out = CopyString(text);
    });
}

void mmc_vae_options_init(mmc_vae_options* options) {
    if (!options) return;
    const mmc::vae::VaeConfig c;
    *options = {c.height,        c.width,    c.latent_dim, c.hidden.front(), c.kl_coeff,
                c.learning_rate, c.momentum, c.batch_size, c.max_epochs,     c.seed};
}

mmc_status mmc_vae_train(const mmc_vae_options* options, const char* const* images,
                         size_t count, int synthetic, const char* model_path, char** history) {
    return Guard([&] {
        Require(options && model_path, "null argument");
        Require(count == 0 || images != nullptr, "null image list");
        mmc::vae::VaeConfig config;
        config.height = options->height;
        config.width = options->width;
        config.latent_dim = options->latent_dim;
        config.hidden = {options->hidden};
        config.kl_coeff = options->kl_coeff;
        config.learning_rate = options->learning_rate;
        config.momentum = options->momentum;
        config.batch_size = options->batch_size;
        config.max_epochs = options->epochs;
        config.seed = options->seed;
        config.Validate();

        std::vector<mmc::Image> dataset;
        if (count > 0) {
            dataset = LoadImages(images, count, config.height, config.width);
        } else {
            Require(synthetic > 1, "need image files or at least 2 synthetic images");
            const int half = synthetic / 2;
            dataset = mmc::SyntheticImages(0, config.seed, synthetic - half, config.height,
                                           config.width);
            auto other = mmc::SyntheticImages(1, config.seed, half, config.height, config.width);
            dataset.insert(dataset.end(), other.begin(), other.end());
        }
        const auto result = mmc::vae::Train(dataset, config);
        mmc::vae::SaveParams(model_path, result.params);
        if (history) {
            std::ostringstream out;
            out.precision(9);
            out << "epoch,loss,train_loss,learning_rate\n0," << result.initial_loss << ",,\n";
            for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
                out << i + 1 << ',' << result.loss_history[i] << ','
                    << result.train_loss_history[i] << ',' << result.learning_rates[i] << '\n';
            }
            *history = CopyString(out.str());
        }
    });
}

mmc_status mmc_vae_encode(const char* model_path, const char* const* images, size_t count,
                          const char* out_path) {
    return Guard([&] {
        Require(model_path && out_path, "null argument");
        Require(count > 0 && images != nullptr, "no images to encode");
        const auto params = mmc::vae::LoadParams(model_path);
        const auto dataset = LoadImages(images, count, params.config.height, params.config.width);
        std::ostringstream out;
        out.precision(17);
        out << "path";
        for (int d = 0; d < params.config.latent_dim; ++d) out << ",mu_" << d;
        out << '\n';
        for (std::size_t i = 0; i < count; ++i) {
            const auto enc = mmc::vae::Encode(params, dataset[i]);
            out << images[i];
            for (Eigen::Index d = 0; d < enc.mu.size(); ++d) out << ',' << enc.mu[d];
            out << '\n';
        }
        mmc::WriteFileAtomic(out_path, out.str());
    });
}

}  // extern "C"
