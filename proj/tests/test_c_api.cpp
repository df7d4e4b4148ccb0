#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "mmc/mmc.h"

namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CApiTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        mmc_set_log_level(MMC_LOG_ERROR);
        dir_ = fs::temp_directory_path() / "mmc_c_api_test";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ASSERT_EQ(Simulate(Path("ref.jsonl"), 7, "2013-01-01", "2013-03-31"), MMC_OK);
        ASSERT_EQ(Simulate(Path("live.jsonl"), 8, "2013-04-01", "2013-05-31"), MMC_OK);
    }
    static void TearDownTestSuite() { fs::remove_all(dir_); }

    static std::string Path(const char* name) { return (dir_ / name).string(); }

    static mmc_status Simulate(const std::string& out, std::uint64_t seed, const char* start,
                               const char* end) {
        mmc_simulate_options o;
        mmc_simulate_options_init(&o);
        o.out = out.c_str();
        o.seed = seed;
        o.start = start;
        o.end = end;
        return mmc_simulate(&o, nullptr);
    }

    static mmc_calibrate_options SmallCalibration() {
        mmc_calibrate_options o;
        mmc_calibrate_options_init(&o);
        o.window.window_days = 14;
        o.window.min_exams = 100;
        o.window.bootstrap_k = 150;
        o.window.bootstrap_n = 3;
        return o;
    }

    static fs::path dir_;
};

fs::path CApiTest::dir_;

TEST_F(CApiTest, VersionAndScenarioNames) {
    EXPECT_STREQ(mmc_version(), "0.1.0");
    mmc_scenario s;
    ASSERT_EQ(mmc_scenario_parse("hard_mining", &s), MMC_OK);
    EXPECT_EQ(s, MMC_SCENARIO_HARD_MINING);
    ASSERT_EQ(mmc_scenario_parse("no_metadata_ood", &s), MMC_OK);
    EXPECT_EQ(s, MMC_SCENARIO_NO_METADATA_OOD);
    EXPECT_EQ(mmc_scenario_parse("sideways", &s), MMC_ERR_CONFIG);
    EXPECT_NE(std::strlen(mmc_last_error()), 0u);
    EXPECT_EQ(mmc_scenario_parse(nullptr, &s), MMC_ERR_CONFIG);
}

TEST_F(CApiTest, SimulateIsDeterministic) {
    ASSERT_EQ(Simulate(Path("a.jsonl"), 7, "2013-01-01", "2013-01-20"), MMC_OK);
    ASSERT_EQ(Simulate(Path("b.jsonl"), 7, "2013-01-01", "2013-01-20"), MMC_OK);
    EXPECT_EQ(Slurp(Path("a.jsonl")), Slurp(Path("b.jsonl")));
    EXPECT_EQ(Slurp(Path("a.jsonl.schema.json")), Slurp(Path("b.jsonl.schema.json")));
    ASSERT_EQ(Simulate(Path("c.jsonl"), 9, "2013-01-01", "2013-01-20"), MMC_OK);
    EXPECT_NE(Slurp(Path("a.jsonl")), Slurp(Path("c.jsonl")));
}

TEST_F(CApiTest, SimulateSummary) {
    mmc_simulate_options o;
    mmc_simulate_options_init(&o);
    const std::string out = Path("s.jsonl");
    o.out = out.c_str();
    o.start = "2013-01-01";
    o.end = "2013-01-05";
    char* summary = nullptr;
    ASSERT_EQ(mmc_simulate(&o, &summary), MMC_OK);
    ASSERT_NE(summary, nullptr);
    EXPECT_NE(std::string(summary).find("2013-01-05"), std::string::npos);
    mmc_string_free(summary);
}

TEST_F(CApiTest, SimulateRejectsBadOptions) {
    EXPECT_EQ(mmc_simulate(nullptr, nullptr), MMC_ERR_CONFIG);
    EXPECT_EQ(Simulate(Path("x.jsonl"), 7, "2013-02-30", "2013-03-01"), MMC_ERR_CONFIG);
    EXPECT_EQ(Simulate(Path("x.jsonl"), 7, "2013-03-01", "2013-02-01"), MMC_ERR_CONFIG);
    mmc_simulate_options o;
    mmc_simulate_options_init(&o);
    const std::string out = Path("x.jsonl");
    o.out = out.c_str();
    o.scenario = static_cast<mmc_scenario>(42);
    EXPECT_EQ(mmc_simulate(&o, nullptr), MMC_ERR_CONFIG);
    EXPECT_EQ(Simulate("/nonexistent-dir/x.jsonl", 7, "2013-01-01", "2013-01-02"), MMC_ERR_IO);
}

TEST_F(CApiTest, ReferenceLoadErrors) {
    mmc_reference* ref = nullptr;
    EXPECT_EQ(mmc_reference_load("/nonexistent/stream.jsonl", nullptr, &ref), MMC_ERR_IO);
    EXPECT_EQ(ref, nullptr);
    const std::string bad = Path("bad.jsonl");
    std::ofstream(bad) << "{not json\n";
    EXPECT_EQ(mmc_reference_load(bad.c_str(), Path("ref.jsonl.schema.json").c_str(), &ref),
              MMC_ERR_DATA);
    EXPECT_EQ(mmc_reference_load(nullptr, nullptr, &ref), MMC_ERR_CONFIG);
}

TEST_F(CApiTest, NullHandlesAreHarmless) {
    mmc_reference_free(nullptr);
    mmc_calibration_free(nullptr);
    mmc_series_free(nullptr);
    mmc_string_free(nullptr);
    EXPECT_EQ(mmc_reference_exam_count(nullptr), 0u);
    EXPECT_EQ(mmc_calibration_metric_count(nullptr), 0u);
    EXPECT_EQ(mmc_series_row_count(nullptr), 0u);
}

TEST_F(CApiTest, CalibrateMonitorReport) {
    mmc_reference* ref = nullptr;
    ASSERT_EQ(mmc_reference_load(Path("ref.jsonl").c_str(), nullptr, &ref), MMC_OK)
        << mmc_last_error();
    EXPECT_GT(mmc_reference_exam_count(ref), 10000u);
    const std::string fp = mmc_reference_fingerprint(ref);
    EXPECT_EQ(fp.rfind("sha256:", 0), 0u);
    EXPECT_EQ(fp.size(), 7u + 64u);

    const mmc_calibrate_options copts = SmallCalibration();
    mmc_calibration* cal = nullptr;
    ASSERT_EQ(mmc_calibrate(ref, &copts, &cal), MMC_OK) << mmc_last_error();
    const size_t metrics = mmc_calibration_metric_count(cal);
    ASSERT_GT(metrics, 0u);
    mmc_metric_info info;
    ASSERT_EQ(mmc_calibration_metric(cal, 0, &info), MMC_OK);
    EXPECT_GT(std::strlen(info.metric_id), 0u);
    EXPECT_EQ(mmc_calibration_metric(cal, metrics, &info), MMC_ERR_CONFIG);
    double weight_sum = 0.0;
    for (size_t i = 0; i < metrics; ++i) {
        ASSERT_EQ(mmc_calibration_metric(cal, i, &info), MMC_OK);
        ASSERT_TRUE(info.has_weight);
        EXPECT_GE(info.weight, 0.0);
        EXPECT_LE(info.weight, 1.0);
        weight_sum += info.weight;
    }
    EXPECT_GT(weight_sum, 0.0);

    ASSERT_EQ(mmc_calibration_save(cal, Path("cal.json").c_str()), MMC_OK);
    mmc_calibration* loaded = nullptr;
    ASSERT_EQ(mmc_calibration_load(Path("cal.json").c_str(), &loaded), MMC_OK);
    EXPECT_EQ(mmc_calibration_metric_count(loaded), metrics);

    mmc_monitor_options mopts;
    mmc_monitor_options_init(&mopts);
    const std::string live = Path("live.jsonl");
    mopts.stream = live.c_str();
    mmc_series* series = nullptr;
    ASSERT_EQ(mmc_monitor(ref, loaded, &mopts, &series), MMC_OK) << mmc_last_error();
    const size_t rows = mmc_series_row_count(series);
    ASSERT_GT(rows, 30u);
    mmc_series_row row;
    ASSERT_EQ(mmc_series_row_get(series, 0, &row), MMC_OK);
    EXPECT_STREQ(row.index_date, "2013-04-14");
    EXPECT_TRUE(row.has_mmc0);
    EXPECT_TRUE(row.has_mmcw);
    EXPECT_TRUE(row.has_auroc);
    EXPECT_STREQ(row.error, "");
    EXPECT_EQ(mmc_series_row_get(series, rows, &row), MMC_ERR_CONFIG);

    ASSERT_EQ(mmc_series_save(series, Path("series.csv").c_str()), MMC_OK);
    mmc_series* reread = nullptr;
    ASSERT_EQ(mmc_series_load(Path("series.csv").c_str(), &reread), MMC_OK);
    ASSERT_EQ(mmc_series_row_count(reread), rows);
    mmc_series_row again;
    ASSERT_EQ(mmc_series_row_get(reread, rows - 1, &again), MMC_OK);
    ASSERT_EQ(mmc_series_row_get(series, rows - 1, &row), MMC_OK);
    EXPECT_STREQ(again.index_date, row.index_date);
    EXPECT_EQ(again.mmcw, row.mmcw);

    char* json = nullptr;
    char* text = nullptr;
    ASSERT_EQ(mmc_report(series, "2013-05-10", 7, &json, &text), MMC_OK) << mmc_last_error();
    EXPECT_NE(std::string(json).find("2013-05-10"), std::string::npos);
    EXPECT_NE(std::string(text).find("delta at A"), std::string::npos) << text;
    mmc_string_free(json);
    mmc_string_free(text);
    EXPECT_EQ(mmc_report(series, "2013-05-99", 7, &json, &text), MMC_ERR_CONFIG);
    EXPECT_EQ(mmc_report(series, nullptr, -1, &json, &text), MMC_ERR_CONFIG);

    mopts.unweighted = 1;
    mmc_series* plain = nullptr;
    ASSERT_EQ(mmc_monitor(ref, loaded, &mopts, &plain), MMC_OK);
    ASSERT_EQ(mmc_series_row_get(plain, 0, &row), MMC_OK);
    EXPECT_TRUE(row.has_mmc0);
    EXPECT_FALSE(row.has_mmcw);

    mopts.unweighted = 0;
    mopts.auroc_label = "no_such_label";
    mmc_series* unused = nullptr;
    EXPECT_EQ(mmc_monitor(ref, loaded, &mopts, &unused), MMC_ERR_CONFIG);
    EXPECT_EQ(unused, nullptr);

    mmc_series_free(plain);
    mmc_series_free(reread);
    mmc_series_free(series);
    mmc_calibration_free(loaded);
    mmc_calibration_free(cal);
    mmc_reference_free(ref);
}

TEST_F(CApiTest, CalibrationMismatch) {
    mmc_reference* ref = nullptr;
    ASSERT_EQ(mmc_reference_load(Path("ref.jsonl").c_str(), nullptr, &ref), MMC_OK);
    mmc_reference* other = nullptr;
    ASSERT_EQ(mmc_reference_load(Path("live.jsonl").c_str(), nullptr, &other), MMC_OK);
    const mmc_calibrate_options copts = SmallCalibration();
    mmc_calibration* cal = nullptr;
    ASSERT_EQ(mmc_calibrate(ref, &copts, &cal), MMC_OK);

    mmc_monitor_options mopts;
    mmc_monitor_options_init(&mopts);
    const std::string live = Path("live.jsonl");
    mopts.stream = live.c_str();
    mmc_series* series = nullptr;
    EXPECT_EQ(mmc_monitor(other, cal, &mopts, &series), MMC_ERR_CALIBRATION_MISMATCH);
    EXPECT_NE(std::string(mmc_last_error()).find("calibration was made against"), std::string::npos)
        << mmc_last_error();
    mmc_calibration_free(cal);
    mmc_reference_free(other);
    mmc_reference_free(ref);
}

TEST_F(CApiTest, CalibrateRejectsBadWindows) {
    mmc_reference* ref = nullptr;
    ASSERT_EQ(mmc_reference_load(Path("ref.jsonl").c_str(), nullptr, &ref), MMC_OK);
    mmc_calibrate_options copts = SmallCalibration();
    copts.window.window_days = 0;
    mmc_calibration* cal = nullptr;
    EXPECT_EQ(mmc_calibrate(ref, &copts, &cal), MMC_ERR_CONFIG);
    copts = SmallCalibration();
    copts.window.min_exams = 100000;
    EXPECT_EQ(mmc_calibrate(ref, &copts, &cal), MMC_ERR_DATA);
    EXPECT_EQ(cal, nullptr);
    mmc_reference_free(ref);
}

TEST_F(CApiTest, EmptySeriesReportsNotice) {
    const std::string path = Path("empty.csv");
    {
        mmc_reference* ref = nullptr;
        ASSERT_EQ(mmc_reference_load(Path("ref.jsonl").c_str(), nullptr, &ref), MMC_OK);
        mmc_calibration* cal = nullptr;
        const mmc_calibrate_options copts = SmallCalibration();
        ASSERT_EQ(mmc_calibrate(ref, &copts, &cal), MMC_OK);
        mmc_monitor_options mopts;
        mmc_monitor_options_init(&mopts);
        const std::string live = Path("live.jsonl");
        mopts.stream = live.c_str();
        mmc_series* s = nullptr;
        ASSERT_EQ(mmc_monitor(ref, cal, &mopts, &s), MMC_OK);
        ASSERT_EQ(mmc_series_save(s, path.c_str()), MMC_OK);
        mmc_series_free(s);
        mmc_calibration_free(cal);
        mmc_reference_free(ref);
    }
    std::string header;
    {
        std::ifstream in(path);
        std::getline(in, header);
    }
    std::ofstream(path, std::ios::trunc) << header << "\n";
    mmc_series* empty = nullptr;
    ASSERT_EQ(mmc_series_load(path.c_str(), &empty), MMC_OK) << mmc_last_error();
    EXPECT_EQ(mmc_series_row_count(empty), 0u);
    char* text = nullptr;
    ASSERT_EQ(mmc_report(empty, nullptr, 30, nullptr, &text), MMC_OK);
    EXPECT_NE(std::string(text).find("empty"), std::string::npos);
    mmc_string_free(text);
    mmc_series_free(empty);
}

TEST_F(CApiTest, VaeTrainAndEncode) {
    mmc_vae_options o;
    mmc_vae_options_init(&o);
    o.height = 8;
    o.width = 8;
    o.latent_dim = 2;
    o.hidden = 6;
    o.epochs = 3;
    const std::string model = Path("vae.json");
    char* history = nullptr;
    ASSERT_EQ(mmc_vae_train(&o, nullptr, 0, 20, model.c_str(), &history), MMC_OK)
        << mmc_last_error();
    const std::string h(history);
    mmc_string_free(history);
    EXPECT_EQ(h.rfind("epoch,loss,train_loss,learning_rate\n0,", 0), 0u) << h;
    EXPECT_EQ(std::count(h.begin(), h.end(), '\n'), 5);

    const std::string img = Path("img.pgm");
    {
        std::ofstream out(img);
        out << "P2\n8 8\n255\n";
        for (int i = 0; i < 64; ++i) out << (i * 4) << ' ';
        out << "\n";
    }
    const char* images[] = {img.c_str(), img.c_str()};
    const std::string enc = Path("enc.csv");
    ASSERT_EQ(mmc_vae_encode(model.c_str(), images, 2, enc.c_str()), MMC_OK) << mmc_last_error();
    const std::string csv = Slurp(enc);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3) << csv;
    EXPECT_NE(csv.find(img), std::string::npos);

    const std::string wrong = Path("wrong.pgm");
    std::ofstream(wrong) << "P2\n4 4\n255\n" << std::string(16 * 2, ' ') << "\n";
    const char* bad[] = {wrong.c_str()};
    EXPECT_NE(mmc_vae_encode(model.c_str(), bad, 1, enc.c_str()), MMC_OK);
    EXPECT_EQ(mmc_vae_train(&o, nullptr, 0, 1, model.c_str(), nullptr), MMC_ERR_CONFIG);
    o.kl_coeff = 0.0;
    EXPECT_EQ(mmc_vae_train(&o, nullptr, 0, 20, model.c_str(), nullptr), MMC_ERR_CONFIG);
}

}  // namespace
