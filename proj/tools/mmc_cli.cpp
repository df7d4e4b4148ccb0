// mmc command-line tool: simulate, calibrate, monitor, report, vae-train, vae-encode.
// Links only the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmc/mmc.h"

namespace {

enum ExitCode {
    kExitOk = 0,
    kExitConfig = 2,
    kExitData = 3,
    kExitMismatch = 4,
    kExitIo = 5,
    kExitInternal = 6,
};

int ExitFor(mmc_status status) {
    switch (status) {
        case MMC_OK: return kExitOk;
        case MMC_ERR_CONFIG: return kExitConfig;
        case MMC_ERR_DATA: return kExitData;
        case MMC_ERR_CALIBRATION_MISMATCH: return kExitMismatch;
        case MMC_ERR_IO: return kExitIo;
        default: return kExitInternal;
    }
}

struct Failure {
    int code;
};

void Check(mmc_status status) {
    if (status != MMC_OK) {
        std::cerr << "mmc: " << mmc_last_error() << "\n";
        throw Failure{ExitFor(status)};
    }
}

[[noreturn]] void ConfigError(const std::string& message) {
    std::cerr << "mmc: " << message << "\n";
    throw Failure{kExitConfig};
}

struct StringDeleter {
    void operator()(char* s) const { mmc_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

template <class T, void (*Free)(T*)>
struct HandleDeleter {
    void operator()(T* p) const { Free(p); }
};
using Reference = std::unique_ptr<mmc_reference, HandleDeleter<mmc_reference, mmc_reference_free>>;
using CalibrationHandle =
    std::unique_ptr<mmc_calibration, HandleDeleter<mmc_calibration, mmc_calibration_free>>;
using Series = std::unique_ptr<mmc_series, HandleDeleter<mmc_series, mmc_series_free>>;

const char* OrNull(const std::optional<std::string>& s) { return s ? s->c_str() : nullptr; }

void RequireDistinct(const std::vector<std::string>& paths) {
    namespace fs = std::filesystem;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        for (std::size_t j = i + 1; j < paths.size(); ++j) {
            if (paths[i].empty() || paths[j].empty()) continue;
            if (fs::weakly_canonical(paths[i]) == fs::weakly_canonical(paths[j])) {
                ConfigError("paths must be distinct: '" + paths[i] + "'");
            }
        }
    }
}

void WriteText(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size()))) {
        std::cerr << "mmc: cannot write '" << path << "'\n";
        throw Failure{kExitIo};
    }
}

struct GroupFlags {
    bool no_metadata = false;
    bool no_latent = false;
    bool no_predictions = false;

    void Add(CLI::App* app) {
        app->add_flag("--no-metadata", no_metadata, "Disable the metadata metrics");
        app->add_flag("--no-latent", no_latent, "Disable the latent metrics");
        app->add_flag("--no-predictions", no_predictions, "Disable the prediction metrics");
    }

    mmc_metric_groups Groups() const {
        if (no_metadata && no_latent && no_predictions) {
            ConfigError("at least one metric group must be enabled");
        }
        return {!no_metadata, !no_latent, !no_predictions};
    }
};

struct SimulateArgs {
    std::string out;
    std::string scenario = "baseline";
    std::uint64_t seed = 7;
    int latent_dim = 16;
    std::optional<std::string> config, start, end, point_a, point_b;
    std::optional<double> q, lateral_ratio, ood_ratio;
};

int RunSimulate(const SimulateArgs& a) {
    mmc_simulate_options o;
    mmc_simulate_options_init(&o);
    Check(mmc_scenario_parse(a.scenario.c_str(), &o.scenario));
    o.out = a.out.c_str();
    o.population_config = OrNull(a.config);
    o.seed = a.seed;
    o.latent_dim = a.latent_dim;
    o.start = OrNull(a.start);
    o.end = OrNull(a.end);
    o.point_a = OrNull(a.point_a);
    o.point_b = OrNull(a.point_b);
    if (a.q) o.q = *a.q;
    if (a.lateral_ratio) o.lateral_ratio = *a.lateral_ratio;
    if (a.ood_ratio) o.ood_ratio = *a.ood_ratio;
    if (a.config) RequireDistinct({a.out, *a.config});
    char* summary = nullptr;
    Check(mmc_simulate(&o, &summary));
    OwnedString owned(summary);
    std::cout << summary << "\n";
    return kExitOk;
}

struct CalibrateArgs {
    std::string reference;
    std::optional<std::string> schema;
    std::string out;
    int window_days = 30;
    int stride_days = 1;
    int min_exams = 150;
    int bootstrap_k = 2500;
    int bootstrap_n = 20;
    std::uint64_t seed = 7;
    GroupFlags groups;
    bool unweighted = false;
    bool raw_weights = false;
    std::string correlation = "pearson";
    double hard_ratio = 1.0;
    int threads = 0;
};

int RunCalibrate(const CalibrateArgs& a) {
    RequireDistinct({a.reference, a.out, a.schema.value_or("")});
    mmc_calibrate_options o;
    mmc_calibrate_options_init(&o);
    o.window = {a.window_days, a.stride_days, a.min_exams, a.bootstrap_k, a.bootstrap_n, a.seed};
    o.groups = a.groups.Groups();
    o.unweighted = a.unweighted;
    o.raw_weights = a.raw_weights;
    o.spearman = a.correlation == "spearman";
    o.hard_ratio = a.hard_ratio;
    o.threads = a.threads;

    mmc_reference* ref = nullptr;
    Check(mmc_reference_load(a.reference.c_str(), OrNull(a.schema), &ref));
    Reference reference(ref);
    mmc_calibration* cal = nullptr;
    Check(mmc_calibrate(reference.get(), &o, &cal));
    CalibrationHandle calibration(cal);
    Check(mmc_calibration_save(calibration.get(), a.out.c_str()));

    const std::size_t n = mmc_calibration_metric_count(calibration.get());
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mmc_metric_info info;
        Check(mmc_calibration_metric(calibration.get(), i, &info));
        excluded += info.excluded ? 1 : 0;
    }
    std::cout << "calibrated " << n << " metrics (" << excluded << " excluded) on "
              << mmc_reference_exam_count(reference.get()) << " reference exams\n"
              << "reference " << mmc_reference_fingerprint(reference.get()) << "\n";
    return kExitOk;
}

struct MonitorArgs {
    std::string stream;
    std::optional<std::string> schema;
    std::string reference;
    std::optional<std::string> reference_schema;
    std::string calibration;
    std::string out;
    GroupFlags groups;
    bool unweighted = false;
    std::optional<std::string> start, end, auroc_label;
    int threads = 0;
};

int RunMonitor(const MonitorArgs& a) {
    RequireDistinct({a.stream, a.reference, a.calibration, a.out});
    mmc_monitor_options o;
    mmc_monitor_options_init(&o);
    o.stream = a.stream.c_str();
    o.schema = OrNull(a.schema);
    o.groups = a.groups.Groups();
    o.start = OrNull(a.start);
    o.end = OrNull(a.end);
    o.auroc_label = OrNull(a.auroc_label);
    o.unweighted = a.unweighted;
    o.threads = a.threads;

    mmc_calibration* cal = nullptr;
    Check(mmc_calibration_load(a.calibration.c_str(), &cal));
    CalibrationHandle calibration(cal);
    mmc_reference* ref = nullptr;
    Check(mmc_reference_load(a.reference.c_str(), OrNull(a.reference_schema), &ref));
    Reference reference(ref);
    mmc_series* s = nullptr;
    Check(mmc_monitor(reference.get(), calibration.get(), &o, &s));
    Series series(s);
    Check(mmc_series_save(series.get(), a.out.c_str()));

    const std::size_t rows = mmc_series_row_count(series.get());
    std::size_t skipped = 0;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        mmc_series_row row;
        Check(mmc_series_row_get(series.get(), i, &row));
        skipped += row.skipped ? 1 : 0;
        failed += (row.error && *row.error) ? 1 : 0;
    }
    std::cout << "wrote " << rows << " windows (" << skipped << " skipped, " << failed
              << " with errors) to " << a.out << "\n";
    return kExitOk;
}

struct ReportArgs {
    std::string series;
    std::optional<std::string> change_points;
    int settle_days = 30;
    std::optional<std::string> out;
    std::string format = "text";
};

int RunReport(const ReportArgs& a) {
    if (a.out) RequireDistinct({a.series, *a.out});
    mmc_series* s = nullptr;
    Check(mmc_series_load(a.series.c_str(), &s));
    Series series(s);
    char* json = nullptr;
    char* text = nullptr;
    Check(mmc_report(series.get(), OrNull(a.change_points), a.settle_days, &json, &text));
    OwnedString owned_json(json);
    OwnedString owned_text(text);
    const std::string body = a.format == "json" ? json : text;
    if (a.out) {
        WriteText(*a.out, body);
    } else {
        std::cout << body;
    }
    return kExitOk;
}

struct VaeTrainArgs {
    std::vector<std::string> images;
    int synthetic = 0;
    std::string out;
    std::optional<std::string> history;
    mmc_vae_options options;
};

int RunVaeTrain(const VaeTrainArgs& a) {
    if (a.images.empty() && a.synthetic < 2) {
        ConfigError("give --images or --synthetic N (N >= 2)");
    }
    std::vector<const char*> paths;
    for (const auto& p : a.images) paths.push_back(p.c_str());
    char* history = nullptr;
    Check(mmc_vae_train(&a.options, paths.data(), paths.size(), a.synthetic, a.out.c_str(),
                        &history));
    OwnedString owned(history);
    if (a.history) {
        WriteText(*a.history, history);
    } else {
        std::cout << history;
    }
    return kExitOk;
}

struct VaeEncodeArgs {
    std::string model;
    std::vector<std::string> images;
    std::string out;
};

int RunVaeEncode(const VaeEncodeArgs& a) {
    std::vector<const char*> paths;
    for (const auto& p : a.images) paths.push_back(p.c_str());
    Check(mmc_vae_encode(a.model.c_str(), paths.data(), paths.size(), a.out.c_str()));
    std::cout << "encoded " << paths.size() << " images to " << a.out << "\n";
    return kExitOk;
}

void AddWindowFlags(CLI::App* cmd, CalibrateArgs& a) {
    cmd->add_option("--window-days", a.window_days, "Window length in days")
        ->capture_default_str();
    cmd->add_option("--stride-days", a.stride_days, "Window stride in days")->capture_default_str();
    cmd->add_option("--min-exams", a.min_exams, "Skip windows with fewer exams")
        ->capture_default_str();
    cmd->add_option("--bootstrap-k", a.bootstrap_k, "Exams per bootstrap replicate")
        ->capture_default_str();
    cmd->add_option("--bootstrap-n", a.bootstrap_n, "Bootstrap replicates per window")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-modal concordance drift monitoring"};
    app.require_subcommand(1);
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Errors only");
    app.set_version_flag("--version", std::string(mmc_version()));

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic exam stream");
    simulate->add_option("--out", sim.out, "Output stream (line-delimited JSON)")->required();
    simulate->add_option("--scenario", sim.scenario,
                         "baseline, hard_mining, metadata_filter_failure or no_metadata_ood")
        ->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate->add_option("--q", sim.q, "Hard-mining quantile");
    simulate->add_option("--config", sim.config, "Population configuration (JSON)");
    simulate->add_option("--latent-dim", sim.latent_dim, "Latent dimensions")
        ->capture_default_str();
    simulate->add_option("--start", sim.start, "First day (YYYY-MM-DD)");
    simulate->add_option("--end", sim.end, "Last day (YYYY-MM-DD)");
    simulate->add_option("--point-a", sim.point_a, "First change point");
    simulate->add_option("--point-b", sim.point_b, "Second change point");
    simulate->add_option("--lateral-ratio", sim.lateral_ratio,
                         "Lateral exams per original exam after point A");
    simulate->add_option("--ood-ratio", sim.ood_ratio,
                         "Out-of-population exams per original exam after point A");

    CalibrateArgs calib;
    auto* calibrate = app.add_subcommand("calibrate", "Calibrate on a reference stream");
    calibrate->add_option("--reference", calib.reference, "Reference stream")->required();
    calibrate->add_option("--schema", calib.schema, "Schema of the reference stream");
    calibrate->add_option("--out", calib.out, "Output calibration (JSON)")->required();
    AddWindowFlags(calibrate, calib);
    calibrate->add_option("--seed", calib.seed, "Bootstrap seed")->capture_default_str();
    calib.groups.Add(calibrate);
    calibrate->add_flag("--unweighted", calib.unweighted, "Skip weight calibration");
    calibrate->add_flag("--raw-weights", calib.raw_weights, "Do not normalize the weights");
    calibrate->add_option("--correlation", calib.correlation, "pearson or spearman")
        ->check(CLI::IsMember({"pearson", "spearman"}))
        ->capture_default_str();
    calibrate->add_option("--hard-ratio", calib.hard_ratio,
                          "Hard-mined windows per reference window for the weights")
        ->capture_default_str();
    calibrate->add_option("--threads", calib.threads, "Worker threads (0 = all cores)");

    MonitorArgs mon;
    auto* monitor = app.add_subcommand("monitor", "Compute the concordance series of a stream");
    monitor->add_option("--stream", mon.stream, "Stream to monitor")->required();
    monitor->add_option("--schema", mon.schema, "Schema of the monitored stream");
    monitor->add_option("--reference", mon.reference, "Reference stream")->required();
    monitor->add_option("--reference-schema", mon.reference_schema, "Schema of the reference");
    monitor->add_option("--calibration", mon.calibration, "Calibration file")->required();
    monitor->add_option("--out", mon.out, "Output series (CSV)")->required();
    mon.groups.Add(monitor);
    monitor->add_flag("--unweighted", mon.unweighted, "Report MMC_0 only");
    monitor->add_option("--start", mon.start, "First index date");
    monitor->add_option("--end", mon.end, "Last index date");
    monitor->add_option("--auroc-label", mon.auroc_label, "Restrict the AUROC to one label");
    monitor->add_option("--threads", mon.threads, "Worker threads (0 = all cores)");

    ReportArgs rep;
    auto* report = app.add_subcommand("report", "Summarize a concordance series");
    report->add_option("--series", rep.series, "Series file")->required();
    report->add_option("--change-points", rep.change_points, "Comma-separated dates");
    report->add_option("--settle-days", rep.settle_days,
                       "Days after a change point before windows count")
        ->capture_default_str();
    report->add_option("--format", rep.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    report->add_option("--out", rep.out, "Output file (default stdout)");

    VaeTrainArgs vt;
    mmc_vae_options_init(&vt.options);
    auto* vae_train = app.add_subcommand("vae-train", "Train the image autoencoder");
    vae_train->add_option("--images", vt.images, "PGM or text images");
    vae_train->add_option("--synthetic", vt.synthetic, "Train on N synthetic images instead");
    vae_train->add_option("--out", vt.out, "Output model (JSON)")->required();
    vae_train->add_option("--history", vt.history, "Loss history (CSV, default stdout)");
    vae_train->add_option("--height", vt.options.height)->capture_default_str();
    vae_train->add_option("--width", vt.options.width)->capture_default_str();
    vae_train->add_option("--latent-dim", vt.options.latent_dim)->capture_default_str();
    vae_train->add_option("--hidden", vt.options.hidden)->capture_default_str();
    vae_train->add_option("--kl", vt.options.kl_coeff, "KL coefficient")->capture_default_str();
    vae_train->add_option("--lr", vt.options.learning_rate)->capture_default_str();
    vae_train->add_option("--momentum", vt.options.momentum)->capture_default_str();
    vae_train->add_option("--batch-size", vt.options.batch_size)->capture_default_str();
    vae_train->add_option("--epochs", vt.options.epochs)->capture_default_str();
    vae_train->add_option("--seed", vt.options.seed)->capture_default_str();

    VaeEncodeArgs ve;
    auto* vae_encode = app.add_subcommand("vae-encode", "Encode images to latent means");
    vae_encode->add_option("--model", ve.model, "Trained model")->required();
    vae_encode->add_option("--images", ve.images, "PGM or text images")->required();
    vae_encode->add_option("--out", ve.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    mmc_set_log_level(verbose ? MMC_LOG_DEBUG : quiet ? MMC_LOG_ERROR : MMC_LOG_INFO);
    try {
        if (*simulate) return RunSimulate(sim);
        if (*calibrate) return RunCalibrate(calib);
        if (*monitor) return RunMonitor(mon);
        if (*report) return RunReport(rep);
        if (*vae_train) return RunVaeTrain(vt);
        if (*vae_encode) return RunVaeEncode(ve);
    } catch (const Failure& f) {
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "mmc: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}
