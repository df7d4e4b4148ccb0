#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "mmc/error.h"
#include "mmc/simulator.h"
#include "mmc/stats.h"
#include "mmc/windowing.h"
#include "test_support.h"

namespace mmc {
namespace {

using sim::ScenarioKind;
using sim::ScenarioSpec;

sim::PopulationSpec SmallPopulation(std::uint64_t seed = 7) {
    auto pop = sim::DefaultPopulation(seed, 16);
    pop.exams_per_day = 120;
    return pop;
}

std::map<std::int32_t, std::vector<const ExamRecord*>> ByDay(const std::vector<ExamRecord>& s) {
    std::map<std::int32_t, std::vector<const ExamRecord*>> out;
    for (const auto& e : s) out[e.timestamp.date.days()].push_back(&e);
    return out;
}

bool IsOod(const ExamRecord& e) { return e.exam_id.rfind("ood-", 0) == 0; }
bool IsLateral(const ExamRecord& e) { return e.exam_id.rfind("lat-", 0) == 0; }

TEST(Population, DefaultsValidate) {
    const auto pop = sim::DefaultPopulation();
    EXPECT_NO_THROW(pop.Validate());
    EXPECT_EQ(pop.schema, DefaultSchema(16));
}

TEST(Baseline, DeterministicValidAndDayStable) {
    const auto pop = SmallPopulation();
    const auto a = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 1, 20));
    const auto b = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 1, 20));
    ASSERT_EQ(a, b);
    for (const auto& e : a) ASSERT_NO_THROW(ValidateRecord(e, pop.schema));
    EXPECT_TRUE(IsDateSorted(a));

    // A day's exams depend only on (seed, day).
    const auto c = sim::GenerateBaseline(pop, Date(2014, 1, 10), Date(2014, 1, 12));
    const auto day_a = ByDay(a).at(Date(2014, 1, 11).days());
    const auto day_c = ByDay(c).at(Date(2014, 1, 11).days());
    ASSERT_EQ(day_a.size(), day_c.size());
    for (std::size_t i = 0; i < day_a.size(); ++i) EXPECT_EQ(*day_a[i], *day_c[i]);

    const auto other = sim::GenerateBaseline(SmallPopulation(8), Date(2014, 1, 1), Date(2014, 1, 20));
    EXPECT_NE(a, other);
}

TEST(Baseline, ZeroPrevalenceMeansNoPositives) {
    auto pop = SmallPopulation();
    pop.prevalence[3] = 0.0;
    const auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 1, 15));
    for (const auto& e : s) ASSERT_NE(e.ground_truth[3], LabelState::kPositive);
}

TEST(Baseline, HasOccasionalLowVolumeDays) {
    const auto pop = sim::DefaultPopulation();
    const auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 12, 31));
    const auto days = ByDay(s);
    EXPECT_EQ(days.size(), 365u);
    int low = 0;
    double total = 0.0;
    for (const auto& [d, exams] : days) {
        total += static_cast<double>(exams.size());
        low += exams.size() < 100 ? 1 : 0;
    }
    EXPECT_NEAR(total / 365.0, 200.0, 10.0);
    EXPECT_GT(low, 0);
    EXPECT_LT(low, 20);
}

TEST(Baseline, WindowedAurocIsStable) {
    const auto pop = sim::DefaultPopulation();
    auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 12, 31));
    const auto windows = RollWindows(s, WindowSpec{30, 1, 150}, Date(2014, 1, 30),
                                     Date(2014, 12, 31));
    std::vector<double> auroc;
    for (const auto& w : windows) auroc.push_back(stats::MicroAuroc(w.exams));
    const double mean = stats::Mean(auroc);
    for (double a : auroc) ASSERT_NEAR(a, mean, 0.05);
}

ExamRecord Scored(double score, LabelState y, int i) {
    ExamRecord e;
    e.exam_id = "x" + std::to_string(i);
    e.predictions = {score};
    e.ground_truth = {y};
    return e;
}

TEST(HardMinePool, TwoPositiveExample) {
    using enum LabelState;
    const std::vector<ExamRecord> s{Scored(0.1, kPositive, 0), Scored(0.9, kPositive, 1)};
    const auto pool = sim::HardMinePool(s, 0.25);
    ASSERT_EQ(pool.size(), 1u);
    EXPECT_EQ(pool[0].exam_id, "x0");
}

TEST(HardMinePool, NegativesAboveUpperQuantile) {
    using enum LabelState;
    std::vector<ExamRecord> s;
    for (int i = 0; i < 5; ++i) s.push_back(Scored(0.1 * (i + 1), kNegative, i));
    const auto pool = sim::HardMinePool(s, 0.25);
    ASSERT_EQ(pool.size(), 2u);
    EXPECT_EQ(pool[0].exam_id, "x3");
    EXPECT_EQ(pool[1].exam_id, "x4");
}

TEST(HardMinePool, FullQuantileKeepsEverythingAndLowQuantileHurtsAuroc) {
    const auto pop = SmallPopulation();
    const auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 1, 30));
    EXPECT_EQ(sim::HardMinePool(s, 1.0), s);
    const auto pool = sim::HardMinePool(s, 0.25);
    EXPECT_LT(pool.size(), s.size());
    EXPECT_LT(stats::MicroAuroc(pool), stats::MicroAuroc(s) - 0.02);
    EXPECT_THROW(sim::HardMinePool(std::vector<ExamRecord>{}, 0.5), Error);
}

TEST(Scenario, BaselineIsIdentity) {
    const auto pop = SmallPopulation();
    const auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 1, 10));
    ScenarioSpec sc;
    EXPECT_EQ(sim::ApplyScenario(s, sc, pop), s);
}

TEST(Scenario, HardMiningReplacesFromPointA) {
    const auto pop = SmallPopulation();
    const auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 2, 28));
    ScenarioSpec sc;
    sc.kind = ScenarioKind::kHardMining;
    sc.point_a = Date(2014, 2, 1);
    sc.q = 0.25;
    const auto out = sim::ApplyScenario(s, sc, pop);
    ASSERT_EQ(out.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_EQ(out[i].timestamp, s[i].timestamp);
        if (s[i].timestamp.date < sc.point_a) {
            ASSERT_EQ(out[i], s[i]);
        } else {
            ASSERT_NE(out[i].exam_id.find('@'), std::string::npos);
        }
    }
    EXPECT_EQ(out, sim::ApplyScenario(s, sc, pop));
}

TEST(Scenario, MetadataFilterFailure) {
    const auto pop = SmallPopulation();
    const auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 3, 31));
    ScenarioSpec sc;
    sc.kind = ScenarioKind::kMetadataFilterFailure;
    sc.point_a = Date(2014, 2, 1);
    sc.point_b = Date(2014, 3, 1);
    const auto out = sim::ApplyScenario(s, sc, pop);
    const auto before = ByDay(s);
    for (const auto& [d, exams] : ByDay(out)) {
        const Date day(d);
        const auto lateral = std::count_if(exams.begin(), exams.end(),
                                           [](const ExamRecord* e) { return IsLateral(*e); });
        const auto original = static_cast<long>(before.at(d).size());
        for (const auto* e : exams) {
            ASSERT_NO_THROW(ValidateRecord(*e, pop.schema));
            if (IsLateral(*e)) ASSERT_EQ(e->categorical[0], "LATERAL");
        }
        if (day < sc.point_a) {
            ASSERT_EQ(lateral, 0);
        } else if (day < sc.point_b) {
            ASSERT_EQ(lateral, original);
            ASSERT_EQ(static_cast<long>(exams.size()), 2 * original);
        } else {
            // Frontal exams are gone.
            ASSERT_EQ(lateral, static_cast<long>(exams.size()));
        }
    }
}

TEST(Scenario, NoMetadataOodRatioAndMissingness) {
    const auto pop = SmallPopulation();
    const auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 3, 31));
    ScenarioSpec sc;
    sc.kind = ScenarioKind::kNoMetadataOod;
    sc.point_a = Date(2014, 2, 1);
    sc.point_b = Date(2014, 3, 20);
    const auto out = sim::ApplyScenario(s, sc, pop);
    const auto before = ByDay(s);
    const int pneumonia = pop.schema.LabelIndex("pneumonia");
    for (const auto& [d, exams] : ByDay(out)) {
        const Date day(d);
        const auto ood = std::count_if(exams.begin(), exams.end(),
                                       [](const ExamRecord* e) { return IsOod(*e); });
        const auto original = static_cast<long>(before.at(d).size());
        for (const auto* e : exams) {
            if (!IsOod(*e)) continue;
            for (const auto& c : e->categorical) ASSERT_FALSE(c.has_value());
            for (const auto& c : e->continuous) ASSERT_FALSE(c.has_value());
            for (std::size_t l = 0; l < e->ground_truth.size(); ++l) {
                ASSERT_EQ(e->ground_truth[l] == LabelState::kUnknown,
                          static_cast<int>(l) != pneumonia);
            }
        }
        if (day < sc.point_a) {
            ASSERT_EQ(ood, 0);
        } else if (day < sc.point_b) {
            ASSERT_EQ(ood, 3 * original);
        } else {
            ASSERT_EQ(ood, static_cast<long>(exams.size()));
        }
    }

    // Missing rate of each categorical field over 30-day windows after A.
    auto sorted = out;
    const auto windows = RollWindows(sorted, WindowSpec{30, 1, 0}, sc.point_a + 29, sc.point_b - 1);
    for (const auto& w : windows) {
        for (std::size_t f = 0; f < pop.schema.categorical.size(); ++f) {
            double missing = 0.0;
            for (const auto& e : w.exams) missing += e.categorical[f] ? 0.0 : 1.0;
            EXPECT_NEAR(missing / static_cast<double>(w.exams.size()), 0.75, 0.02);
        }
    }
}

TEST(Scenario, OodPoolIsDrawnWithoutReplacement) {
    auto pop = SmallPopulation();
    pop.ood_pool_size = 1000;
    const auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 1, 10));
    ScenarioSpec sc;
    sc.kind = ScenarioKind::kNoMetadataOod;
    sc.point_a = Date(2014, 1, 2);
    sc.point_b = Date(2014, 1, 10);
    const auto out = sim::ApplyScenario(s, sc, pop);
    std::map<std::string, int> uses;
    std::vector<std::string> order;
    for (const auto& e : out) {
        if (!IsOod(e)) continue;
        const auto id = e.exam_id.substr(0, e.exam_id.find('@'));
        ++uses[id];
        order.push_back(id);
    }
    // Within each pass over the pool every exam appears once.
    for (std::size_t start = 0; start + 1000 <= order.size(); start += 1000) {
        std::set<std::string> pass(order.begin() + start, order.begin() + start + 1000);
        EXPECT_EQ(pass.size(), 1000u);
    }
}

TEST(Scenario, RejectsChangePointsOutsideTheStream) {
    const auto pop = SmallPopulation();
    const auto s = sim::GenerateBaseline(pop, Date(2014, 1, 1), Date(2014, 1, 31));
    ScenarioSpec sc;
    sc.kind = ScenarioKind::kMetadataFilterFailure;
    sc.point_a = Date(2014, 1, 10);
    sc.point_b = Date(2014, 3, 1);
    try {
        sim::ApplyScenario(s, sc, pop);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kInvalidScenarioDates);
    }
    sc.point_b = Date(2014, 1, 5);
    EXPECT_THROW(sim::ApplyScenario(s, sc, pop), Error);
}

TEST(ScenarioConfig, JsonRoundTripAndOverrides) {
    ScenarioSpec sc;
    sc.kind = ScenarioKind::kNoMetadataOod;
    sc.ood_ratio = 2.0;
    sc.point_a = Date(2014, 5, 5);
    ScenarioSpec back;
    sim::ScenarioFromJson(sim::ScenarioToJson(sc), back);
    EXPECT_EQ(back.kind, sc.kind);
    EXPECT_EQ(back.point_a, sc.point_a);
    EXPECT_EQ(back.point_b, sc.point_b);
    EXPECT_EQ(back.ood_ratio, sc.ood_ratio);

    ScenarioSpec mined;
    mined.kind = ScenarioKind::kHardMining;
    mined.q = 0.25;
    ScenarioSpec mined_back;
    sim::ScenarioFromJson(sim::ScenarioToJson(mined), mined_back);
    EXPECT_EQ(mined_back.q, 0.25);

    auto pop = sim::DefaultPopulation();
    sim::PopulationFromJson(nlohmann::json::parse(R"({"exams_per_day": 50, "signal": 0.5})"), pop);
    EXPECT_EQ(pop.exams_per_day, 50.0);
    EXPECT_EQ(pop.signal, 0.5);
    EXPECT_EQ(sim::ParseScenarioKind("hard_mining"), ScenarioKind::kHardMining);
    EXPECT_THROW(sim::ParseScenarioKind("nope"), Error);
}

}  // namespace
}  // namespace mmc
