#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmc/concordance.h"
#include "mmc/error.h"
#include "mmc/simulator.h"
#include "mmc/stats.h"
#include "mmc/windowing.h"
#include "test_support.h"

namespace mmc {
namespace {

using testing::Gen;

ErrorCode CodeOf(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::kIo;
}

using Rows = std::vector<std::vector<std::optional<double>>>;

TEST(StandardizeCalibrate, Examples) {
    const Rows two{{1.0, 5.0}, {3.0, 5.0}};
    const auto s = StandardizeCalibrate(two);
    EXPECT_DOUBLE_EQ(s[0].offset, 2.0);
    EXPECT_DOUBLE_EQ(s[0].scale, 1.0);
    EXPECT_DOUBLE_EQ(s[1].offset, 5.0);
    EXPECT_DOUBLE_EQ(s[1].scale, 0.0);
    EXPECT_EQ(s[0].offset, StandardizeCalibrate(two)[0].offset);

    EXPECT_EQ(CodeOf([] { StandardizeCalibrate(Rows{{1.0}}); }), ErrorCode::kInsufficientWindows);
    EXPECT_EQ(CodeOf([] { StandardizeCalibrate(Rows{{1.0}, {std::nullopt}}); }),
              ErrorCode::kEmptyEffectiveSample);
}

TEST(Standardize, Examples) {
    EXPECT_DOUBLE_EQ(Standardize(2.0, 2.0, 1.5), 0.0);
    EXPECT_DOUBLE_EQ(Standardize(3.5, 2.0, 1.5), 1.0);
    EXPECT_DOUBLE_EQ(Standardize(5.0, 2.0, 1.5), 2.0);
    EXPECT_EQ(CodeOf([] { Standardize(1.0, 0.0, 0.0); }), ErrorCode::kNonPositiveScale);
    EXPECT_EQ(CodeOf([] { Standardize(1.0, 0.0, -1.0); }), ErrorCode::kNonPositiveScale);
}

std::vector<std::vector<double>> Columns(const std::vector<std::vector<double>>& cols) {
    std::vector<std::vector<double>> rows(cols[0].size(), std::vector<double>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        for (std::size_t r = 0; r < cols[c].size(); ++r) rows[r][c] = cols[c][r];
    }
    return rows;
}

TEST(WeightCalibrate, Examples) {
    const std::vector rho{0.9, 0.85, 0.8, 0.75};
    const auto rows = Columns({{0.1, 0.2, 0.3, 0.4}, {1.0, 1.0, 1.0, 1.0}, {-1.0, 2.0, -3.0, 4.0}});
    const auto alpha = WeightCalibrate(rows, rho);
    EXPECT_NEAR(alpha[0], 1.0, 1e-12);
    EXPECT_EQ(alpha[1], 0.0);
    EXPECT_GE(alpha[2], 0.0);
    EXPECT_EQ(CodeOf([] {
                  WeightCalibrate(Columns({{1.0, 2.0}}), std::vector{0.5, 0.6});
              }),
              ErrorCode::kInsufficientWindows);
    // Constant rho: nothing to correlate with.
    const auto flat = WeightCalibrate(rows, std::vector{0.8, 0.8, 0.8, 0.8});
    EXPECT_EQ(flat, std::vector<double>(3, 0.0));
}

TEST(WeightCalibrate, PlantedSignalDominatesNoise) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Gen gen(seed);
        constexpr int kWindows = 600;
        std::vector<double> rho(kWindows);
        std::vector<std::vector<double>> cols(4, std::vector<double>(kWindows));
        for (int w = 0; w < kWindows; ++w) {
            rho[w] = 0.8 + 0.1 * gen.Uniform() - (w % 2 ? 0.05 * gen.Uniform() : 0.0);
            cols[0][w] = std::exp(-5.0 * rho[w]);
            for (int c = 1; c < 4; ++c) cols[c][w] = gen.Normal();
        }
        for (auto kind : {CorrelationKind::kPearson, CorrelationKind::kSpearman}) {
            const auto alpha = WeightCalibrate(Columns(cols), rho, kind);
            ASSERT_GT(alpha[0], 0.9);
            for (int c = 1; c < 4; ++c) {
                ASSERT_LT(alpha[c], 0.3);
                ASSERT_LT(alpha[c], alpha[0]);
            }
        }
    }
}

Calibration ManualCalibration(const std::vector<double>& offsets,
                              const std::vector<double>& scales,
                              const std::vector<std::optional<double>>& weights) {
    Calibration cal;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        MetricCalibration mc;
        mc.metric.metric_id = "latent:z_" + std::to_string(i);
        mc.offset = offsets[i];
        mc.scale = scales[i];
        mc.weight = weights[i];
        cal.metrics.push_back(mc);
    }
    return cal;
}

TEST(Aggregate, Examples) {
    const auto cal = ManualCalibration({1.0, 2.0}, {0.5, 2.0}, {0.3, 0.7});
    const auto zero = Aggregate(std::vector<std::optional<double>>{1.0, 2.0}, cal);
    EXPECT_EQ(*zero.mmc0, 0.0);
    EXPECT_EQ(*zero.mmcw, 0.0);

    const auto one = ManualCalibration({1.0}, {0.5}, {0.4});
    const auto r1 = Aggregate(std::vector<std::optional<double>>{2.0}, one);
    EXPECT_DOUBLE_EQ(*r1.mmc0, -2.0);
    EXPECT_DOUBLE_EQ(*r1.mmcw, -2.0);

    const auto equal = ManualCalibration({0.0, 0.0}, {1.0, 1.0}, {1.0, 1.0});
    const auto r2 = Aggregate(std::vector<std::optional<double>>{1.0, 3.0}, equal);
    EXPECT_DOUBLE_EQ(*r2.mmc0, -2.0);
    EXPECT_DOUBLE_EQ(*r2.mmcw, -2.0);
    ASSERT_EQ(r2.standardized.size(), 2u);
    EXPECT_DOUBLE_EQ(*r2.standardized[1], 3.0);
}

TEST(Aggregate, RawWeightsAreNotNormalized) {
    auto cal = ManualCalibration({0.0, 0.0}, {1.0, 1.0}, {0.5, 0.25});
    cal.normalize_weights = false;
    const auto r = Aggregate(std::vector<std::optional<double>>{2.0, 4.0}, cal);
    EXPECT_DOUBLE_EQ(*r.mmcw, -(0.5 * 2.0 + 0.25 * 4.0));
}

TEST(Aggregate, ExcludedMissingAndUnweighted) {
    auto cal = ManualCalibration({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0});
    cal.metrics[2].excluded = true;
    const auto r = Aggregate(std::vector<std::optional<double>>{2.0, std::nullopt, 100.0}, cal);
    EXPECT_DOUBLE_EQ(*r.mmc0, -2.0);
    EXPECT_DOUBLE_EQ(*r.mmcw, -2.0);
    EXPECT_FALSE(r.standardized[2].has_value());

    const auto none = ManualCalibration({0.0}, {1.0}, {std::nullopt});
    const auto u = Aggregate(std::vector<std::optional<double>>{1.0}, none);
    EXPECT_TRUE(u.mmc0.has_value());
    EXPECT_FALSE(u.mmcw.has_value());
}

TEST(Aggregate, OrderScaleAndMonotonicityProperties) {
    Gen gen(21);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = gen.Int(1, 12);
        std::vector<double> off(n), sc(n);
        std::vector<std::optional<double>> w(n), raw(n);
        for (int i = 0; i < n; ++i) {
            off[i] = gen.Normal();
            sc[i] = gen.Uniform(0.1, 3.0);
            w[i] = gen.Uniform(0.01, 1.0);
            raw[i] = gen.Normal(off[i], 2.0);
        }
        const auto cal = ManualCalibration(off, sc, w);
        const auto base = Aggregate(raw, cal);

        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), gen.engine());
        std::vector<double> poff(n), psc(n);
        std::vector<std::optional<double>> pw(n), praw(n);
        for (int i = 0; i < n; ++i) {
            poff[i] = off[perm[i]];
            psc[i] = sc[perm[i]];
            pw[i] = w[perm[i]];
            praw[i] = raw[perm[i]];
        }
        const auto permuted = Aggregate(praw, ManualCalibration(poff, psc, pw));
        ASSERT_NEAR(*permuted.mmc0, *base.mmc0, 1e-12);
        ASSERT_NEAR(*permuted.mmcw, *base.mmcw, 1e-12);

        const double c = gen.Uniform(0.1, 10.0);
        std::vector<std::optional<double>> cw(n);
        for (int i = 0; i < n; ++i) cw[i] = *w[i] * c;
        ASSERT_NEAR(*Aggregate(raw, ManualCalibration(off, sc, cw)).mmcw, *base.mmcw, 1e-12);

        auto bumped = raw;
        const int k = gen.Int(0, n - 1);
        *bumped[k] += gen.Uniform(0.01, 1.0);
        const auto after = Aggregate(bumped, cal);
        ASSERT_LT(*after.mmc0, *base.mmc0);
        ASSERT_LT(*after.mmcw, *base.mmcw);
    }
}

// Small simulated reference shared by the calibration tests.
class CalibrationTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        auto pop = sim::DefaultPopulation(3, 4);
        pop.exams_per_day = 60;
        pop.low_day_probability = 0.0;
        exams_ = new std::vector<ExamRecord>(
            sim::GenerateBaseline(pop, Date(2013, 1, 1), Date(2013, 3, 31)));
        reference_ = new ReferenceSet(*exams_, pop.schema);
        options_.window_spec = {14, 1, 100};
        options_.bootstrap_spec = {150, 3, 5};
        options_.threads = 2;
        diag_ = new CalibrationDiagnostics();
        cal_ = new Calibration(Calibrate(*reference_, options_, diag_));
    }
    static void TearDownTestSuite() {
        delete cal_;
        delete diag_;
        delete reference_;
        delete exams_;
    }

    static inline std::vector<ExamRecord>* exams_ = nullptr;
    static inline ReferenceSet* reference_ = nullptr;
    static inline CalibrationOptions options_;
    static inline CalibrationDiagnostics* diag_ = nullptr;
    static inline Calibration* cal_ = nullptr;
};

TEST_F(CalibrationTest, StandardizedReferenceWindowsAreExactlyStandard) {
    ASSERT_GE(diag_->reference_windows, 2);
    const auto& z = diag_->reference_standardized;
    ASSERT_EQ(z.size(), static_cast<std::size_t>(diag_->reference_windows));
    for (std::size_t i = 0; i < cal_->metrics.size(); ++i) {
        if (cal_->metrics[i].excluded) continue;
        std::vector<double> col;
        for (const auto& row : z) col.push_back(row[i]);
        EXPECT_LE(std::abs(stats::Mean(col)), 1e-9) << cal_->metrics[i].metric.metric_id;
        EXPECT_NEAR(stats::PopulationStdDev(col), 1.0, 1e-9) << cal_->metrics[i].metric.metric_id;
    }
}

TEST_F(CalibrationTest, RecordsWeightsAndProvenance) {
    EXPECT_EQ(cal_->reference_fingerprint, reference_->fingerprint());
    EXPECT_EQ(cal_->metrics.size(), BuildMetricSet(reference_->schema()).size());
    for (const auto& m : cal_->metrics) {
        ASSERT_TRUE(m.weight.has_value());
        EXPECT_GE(*m.weight, 0.0);
        EXPECT_LE(*m.weight, 1.0);
        EXPECT_GT(m.scale, 0.0);
    }
    EXPECT_EQ(cal_->provenance.at("hard_windows"), cal_->provenance.at("reference_windows"));
    EXPECT_GT(diag_->alpha_windows, diag_->reference_windows);
}

TEST_F(CalibrationTest, DeterministicAcrossThreadCounts) {
    auto options = options_;
    options.threads = 1;
    const auto again = Calibrate(*reference_, options);
    ASSERT_EQ(again.metrics.size(), cal_->metrics.size());
    for (std::size_t i = 0; i < again.metrics.size(); ++i) {
        EXPECT_EQ(again.metrics[i].offset, cal_->metrics[i].offset);
        EXPECT_EQ(again.metrics[i].scale, cal_->metrics[i].scale);
        EXPECT_EQ(again.metrics[i].weight, cal_->metrics[i].weight);
    }
}

TEST_F(CalibrationTest, WithoutGroundTruthWeightsAreAbsent) {
    auto exams = *exams_;
    for (auto& e : exams) e.ground_truth.clear();
    const ReferenceSet unlabeled(exams, reference_->schema());
    CalibrationDiagnostics diag;
    const auto cal = Calibrate(unlabeled, options_, &diag);
    for (const auto& m : cal.metrics) EXPECT_FALSE(m.weight.has_value());
    ASSERT_FALSE(diag.warnings.empty());
    EXPECT_NE(diag.warnings.front().find("ground truth"), std::string::npos);
}

TEST_F(CalibrationTest, ConstantMetricIsExcluded) {
    auto exams = *exams_;
    for (auto& e : exams) e.latent[0] = 0.25;
    const ReferenceSet flat(exams, reference_->schema());
    CalibrationDiagnostics diag;
    auto options = options_;
    options.hard_ratio = 0.0;
    const auto cal = Calibrate(flat, options, &diag);
    EXPECT_TRUE(cal.Find("latent:z_0")->excluded);
    EXPECT_EQ(diag.excluded_metrics, std::vector<std::string>{"latent:z_0"});
}

TEST_F(CalibrationTest, TooFewWindows) {
    auto options = options_;
    options.window_spec.min_exams = 100000;
    EXPECT_EQ(CodeOf([&] { Calibrate(*reference_, options); }), ErrorCode::kInsufficientWindows);
    options = options_;
    options.groups = {false, false, false};
    EXPECT_EQ(CodeOf([&] { Calibrate(*reference_, options); }), ErrorCode::kInvalidConfig);
}

TEST_F(CalibrationTest, MmcChecksFingerprintAndSkipRule) {
    auto stream = *exams_;
    const auto windows = RollWindows(stream, cal_->window_spec, Date(2013, 2, 1), Date(2013, 2, 1));
    EXPECT_NO_THROW(Mmc(windows[0], *cal_, *reference_, true));
    auto other = *cal_;
    other.reference_fingerprint = "sha256:0";
    EXPECT_EQ(CodeOf([&] { Mmc(windows[0], other, *reference_, true); }),
              ErrorCode::kCalibrationMismatch);
    const DetectionWindow tiny{windows[0].index_date, windows[0].exams.first(10)};
    EXPECT_EQ(CodeOf([&] { Mmc(tiny, *cal_, *reference_, false); }), ErrorCode::kSkippedWindow);
}

TEST_F(CalibrationTest, SeriesSkipsLowVolumeWindowsAndHandlesEmptyRanges) {
    std::vector<ExamRecord> stream;
    for (const auto& e : *exams_) {
        // Two-week gap keeps only a handful of exams in the windows around it.
        if (e.timestamp.date >= Date(2013, 2, 10) && e.timestamp.date < Date(2013, 2, 24)) continue;
        stream.push_back(e);
    }
    SeriesOptions options;
    options.threads = 2;
    const auto series = RunSeries(stream, *cal_, *reference_, options);
    ASSERT_FALSE(series.rows.empty());
    EXPECT_EQ(series.rows.front().index_date, Date(2013, 1, 1) + 13);
    int skipped = 0;
    for (const auto& row : series.rows) {
        EXPECT_EQ(row.skipped, row.n_exams < cal_->window_spec.min_exams);
        if (row.skipped) {
            ++skipped;
            EXPECT_FALSE(row.mmc0.has_value());
        } else {
            EXPECT_TRUE(row.mmcw.has_value());
            EXPECT_TRUE(row.auroc.has_value());
        }
    }
    EXPECT_GT(skipped, 0);

    options.start = Date(2013, 3, 1);
    options.end = Date(2013, 2, 1);
    EXPECT_TRUE(RunSeries(stream, *cal_, *reference_, options).rows.empty());
    EXPECT_TRUE(RunSeries({}, *cal_, *reference_, SeriesOptions{}).rows.empty());
}

TEST_F(CalibrationTest, RestrictionDropsGroups) {
    const auto restricted = RestrictCalibration(*cal_, {false, true, true});
    EXPECT_EQ(restricted.metrics.size(), cal_->metrics.size() - 6);
    for (const auto& m : restricted.metrics) {
        EXPECT_NE(m.metric.source_group, SourceGroup::kMetadata);
    }
}

}  // namespace
}  // namespace mmc
