/// @file simulator.cpp
/// @brief Synthetic exam streams and drift scenarios

#include "mmc/simulator.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mmc/error.h"
#include "mmc/keyed_rng.h"
#include "mmc/stats.h"

namespace mmc::sim {

namespace {

// Keyed stream plus Box-Muller normals; avoids the implementation-defined
// std:: distributions so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t key) : stream_(key) {}

    double Uniform() { return stream_.Uniform(); }
    std::uint64_t Below(std::uint64_t n) { return stream_.Below(n); }

    double Normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = stream_.Uniform();
        const double u2 = stream_.Uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    KeyedStream stream_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int DrawCategory(Rng& rng, const std::vector<double>& probs) {
    double u = rng.Uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    // Rounding slack: last category with non-zero mass.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return static_cast<int>(i);
    }
    return 0;
}

int DailyCount(const PopulationSpec& pop, Date day) {
    Rng rng(DeriveKey(pop.seed, "daily-count", day.days(), 0));
    double mean = pop.exams_per_day;
    if (rng.Uniform() < pop.low_day_probability) {
        mean *= pop.low_day_fraction;
    }
    const double n = std::round(mean + std::sqrt(mean) * rng.Normal());
    return static_cast<int>(std::max(0.0, n));
}

std::vector<int> SortedTimesOfDay(Rng& rng, int count) {
    std::vector<int> secs(static_cast<std::size_t>(count));
    for (auto& s : secs) s = 7 * 3600 + static_cast<int>(rng.Below(13 * 3600));
    std::sort(secs.begin(), secs.end());
    return secs;
}

int LabelDim(const PopulationSpec& pop, std::size_t label) {
    const int d = pop.schema.latent_dim;
    return d > 1 ? static_cast<int>(label % static_cast<std::size_t>(d - 1)) : 0;
}

ExamRecord DrawExam(const PopulationSpec& pop, const PopulationVariant& variant, Rng& rng) {
    const auto& schema = pop.schema;
    const std::size_t n_labels = schema.labels.size();
    const int dim = schema.latent_dim;
    const auto& prevalence = variant.prevalence.empty() ? pop.prevalence : variant.prevalence;

    ExamRecord e;
    const double severity = rng.Normal();

    std::vector<bool> positive(n_labels, false);
    for (std::size_t l = 0; l < n_labels; ++l) {
        const double p0 = prevalence[l];
        const double u = rng.Uniform();
        if (p0 <= 0.0) continue;
        if (p0 >= 1.0) {
            positive[l] = true;
            continue;
        }
        const double logit = std::log(p0 / (1.0 - p0)) + pop.severity_label_coeff * severity;
        positive[l] = u < Sigmoid(logit);
    }

    e.latent.resize(static_cast<std::size_t>(dim));
    for (auto& z : e.latent) z = pop.latent_sd * rng.Normal();
    for (std::size_t l = 0; l < n_labels; ++l) {
        if (positive[l]) e.latent[static_cast<std::size_t>(LabelDim(pop, l))] += pop.label_shift;
    }
    const double severity_noise = rng.Normal();
    if (dim > 1) {
        e.latent.back() = severity + pop.severity_latent_noise * severity_noise;
    }
    for (std::size_t d = 0; d < variant.latent_shift.size() && d < e.latent.size(); ++d) {
        e.latent[d] += variant.latent_shift[d];
    }

    const double severity_feature = dim > 1 ? e.latent.back() : severity;
    e.predictions.resize(n_labels);
    for (std::size_t l = 0; l < n_labels; ++l) {
        const double z = e.latent[static_cast<std::size_t>(LabelDim(pop, l))];
        const double logit = pop.signal * variant.signal_scale * (z - 0.5 * pop.label_shift) +
                             pop.severity_score_coeff * severity_feature + pop.score_bias +
                             pop.score_noise * variant.noise_scale * rng.Normal();
        e.predictions[l] = std::clamp(Sigmoid(logit), 0.0, 1.0);
    }

    e.categorical.resize(schema.categorical.size());
    for (std::size_t i = 0; i < schema.categorical.size(); ++i) {
        const auto& dist = pop.categorical[i];
        const double u = rng.Uniform();
        const int c = DrawCategory(rng, dist.probabilities);
        if (variant.metadata_missing) continue;
        if (schema.categorical[i].name == "view_position" && !variant.forced_view_position.empty()) {
            e.categorical[i] = variant.forced_view_position;
        } else if (u >= dist.missing_rate) {
            e.categorical[i] = schema.categorical[i].categories[static_cast<std::size_t>(c)];
        }
    }
    e.continuous.resize(schema.continuous.size());
    for (std::size_t i = 0; i < schema.continuous.size(); ++i) {
        const auto& dist = pop.continuous[i];
        const double u = rng.Uniform();
        double v = dist.location + dist.spread * rng.Normal();
        if (dist.family == ContinuousDistribution::Family::kLogNormal) v = std::exp(v);
        if (variant.metadata_missing || u < dist.missing_rate) continue;
        const auto& name = schema.continuous[i].name;
        if (name == "age") v += variant.age_shift;
        if (name == "exposure") v *= variant.exposure_scale;
        e.continuous[i] = std::clamp(v, dist.min, dist.max);
    }

    e.ground_truth.resize(n_labels);
    for (std::size_t l = 0; l < n_labels; ++l) {
        if (variant.only_labeled >= 0 && static_cast<int>(l) != variant.only_labeled) {
            e.ground_truth[l] = LabelState::kUnknown;
        } else {
            e.ground_truth[l] = positive[l] ? LabelState::kPositive : LabelState::kNegative;
        }
    }
    return e;
}

std::string ExamId(const std::string& tag, Date day, int k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", k);
    return tag + "-" + day.ToString() + "-" + buf;
}

// Groups a date-sorted stream by day: [begin, end) index ranges.
std::map<std::int32_t, std::pair<std::size_t, std::size_t>> DayRanges(
    std::span<const ExamRecord> stream) {
    std::map<std::int32_t, std::pair<std::size_t, std::size_t>> days;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        auto d = stream[i].timestamp.date.days();
        auto [it, inserted] = days.try_emplace(d, i, i + 1);
        if (!inserted) it->second.second = i + 1;
    }
    return days;
}

void SortDay(std::vector<ExamRecord>& day) {
    std::stable_sort(day.begin(), day.end(), [](const ExamRecord& a, const ExamRecord& b) {
        return a.timestamp < b.timestamp;
    });
}

}  // namespace

void PopulationSpec::Validate() const {
    schema.Validate();
    if (prevalence.size() != schema.labels.size()) {
        throw Error(ErrorCode::kInvalidConfig, "prevalence count must match labels");
    }
    for (double p : prevalence) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(ErrorCode::kInvalidConfig, "prevalences must lie in [0,1]");
        }
    }
    if (categorical.size() != schema.categorical.size() ||
        continuous.size() != schema.continuous.size()) {
        throw Error(ErrorCode::kInvalidConfig, "metadata distributions must match the schema");
    }
    for (std::size_t i = 0; i < categorical.size(); ++i) {
        const auto& probs = categorical[i].probabilities;
        if (probs.size() != schema.categorical[i].categories.size()) {
            throw Error(ErrorCode::kInvalidConfig,
                        "distribution for '" + schema.categorical[i].name + "' has wrong size");
        }
        double sum = 0.0;
        for (double p : probs) {
            if (p < 0.0) throw Error(ErrorCode::kInvalidConfig, "negative category probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw Error(ErrorCode::kInvalidConfig,
                        "distribution for '" + schema.categorical[i].name + "' must sum to 1");
        }
    }
    if (exams_per_day < 0.0 || latent_sd < 0.0 || score_noise < 0.0) {
        throw Error(ErrorCode::kInvalidConfig, "negative generator parameter");
    }
    for (const auto* v : {&lateral, &ood}) {
        if (!v->prevalence.empty() && v->prevalence.size() != schema.labels.size()) {
            throw Error(ErrorCode::kInvalidConfig, "variant prevalence count must match labels");
        }
    }
}

PopulationSpec DefaultPopulation(std::uint64_t seed, int latent_dim) {
    PopulationSpec pop;
    pop.schema = DefaultSchema(latent_dim);
    pop.seed = seed;
    pop.prevalence = {0.07, 0.09, 0.02, 0.01, 0.03, 0.02, 0.17, 0.11, 0.07, 0.04};
    pop.categorical = {
        {{0.55, 0.20, 0.15, 0.0, 0.10}, 0.005},  // view_position
        {{0.52, 0.48}, 0.01},                     // sex
        {{0.55, 0.30, 0.15}, 0.01},               // manufacturer
        {{0.75, 0.25}, 0.005},                    // modality
    };
    using Family = ContinuousDistribution::Family;
    pop.continuous = {
        {Family::kNormal, 62.0, 17.0, 0.0, 105.0, 0.01},          // age
        {Family::kLogNormal, std::log(8.0), 0.35, 0.0, 1e6, 0.02},  // exposure
    };

    // Lateral views: different appearance on four free latent dimensions,
    // weaker and noisier model response.
    pop.lateral.forced_view_position = "LATERAL";
    pop.lateral.latent_shift.assign(static_cast<std::size_t>(latent_dim), 0.0);
    for (int d = 10; d < 14 && d < latent_dim - 1; ++d) pop.lateral.latent_shift[d] = 0.75;
    pop.lateral.signal_scale = 0.45;
    pop.lateral.noise_scale = 3.0;
    pop.lateral.exposure_scale = 1.6;

    // Out-of-population (pediatric-like) exams: no metadata, one labeled
    // pathology, shifted appearance.
    pop.ood.metadata_missing = true;
    pop.ood.age_shift = -55.0;
    pop.ood.latent_shift.assign(static_cast<std::size_t>(latent_dim), 0.0);
    for (int d = 10; d < latent_dim - 1; ++d) pop.ood.latent_shift[d] = (d % 2 == 0) ? 0.6 : -0.6;
    pop.ood.signal_scale = 0.7;
    pop.ood.noise_scale = 2.0;
    const auto& labels = pop.schema.labels;
    pop.ood.only_labeled = pop.schema.LabelIndex("pneumonia");
    pop.ood.prevalence = pop.prevalence;
    if (pop.ood.only_labeled >= 0) pop.ood.prevalence[static_cast<std::size_t>(pop.ood.only_labeled)] = 0.6;
    (void)labels;
    return pop;
}

const char* ScenarioName(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::kBaseline: return "baseline";
        case ScenarioKind::kHardMining: return "hard_mining";
        case ScenarioKind::kMetadataFilterFailure: return "metadata_filter_failure";
        case ScenarioKind::kNoMetadataOod: return "no_metadata_ood";
    }
    return "baseline";
}

ScenarioKind ParseScenarioKind(const std::string& name) {
    for (auto k : {ScenarioKind::kBaseline, ScenarioKind::kHardMining,
                   ScenarioKind::kMetadataFilterFailure, ScenarioKind::kNoMetadataOod}) {
        if (name == ScenarioName(k)) return k;
    }
    throw Error(ErrorCode::kInvalidConfig, "unknown scenario '" + name + "'");
}

void ScenarioSpec::Validate() const {
    if (start > end) {
        throw Error(ErrorCode::kInvalidScenarioDates, "scenario start after end");
    }
    if (kind == ScenarioKind::kBaseline) return;
    if (point_a < start || point_a > end) {
        throw Error(ErrorCode::kInvalidScenarioDates, "point A outside the scenario range");
    }
    if (kind == ScenarioKind::kHardMining) {
        if (!(q > 0.0 && q <= 1.0)) {
            throw Error(ErrorCode::kInvalidConfig, "Q must lie in (0, 1]");
        }
        return;
    }
    if (!(point_a < point_b) || point_b > end) {
        throw Error(ErrorCode::kInvalidScenarioDates, "requires A < B within the range");
    }
    if (lateral_ratio <= 0.0 || ood_ratio <= 0.0) {
        throw Error(ErrorCode::kInvalidConfig, "injection ratios must be positive");
    }
}

std::vector<ExamRecord> GenerateVariantDay(const PopulationSpec& pop,
                                           const PopulationVariant& variant,
                                           const std::string& tag, Date day, int count) {
    Rng rng(DeriveKey(pop.seed, tag, day.days(), 1));
    const auto times = SortedTimesOfDay(rng, count);
    std::vector<ExamRecord> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        ExamRecord e = DrawExam(pop, variant, rng);
        e.exam_id = ExamId(tag, day, k);
        e.timestamp = {day, times[static_cast<std::size_t>(k)]};
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ExamRecord> GenerateBaseline(const PopulationSpec& pop, Date start, Date end) {
    pop.Validate();
    if (start > end) {
        throw Error(ErrorCode::kInvalidRange, "baseline range start after end");
    }
    const PopulationVariant base;
    std::vector<ExamRecord> stream;
    stream.reserve(static_cast<std::size_t>((end - start + 1) * pop.exams_per_day * 1.1));
    for (Date d = start; d <= end; d = d + 1) {
        auto day = GenerateVariantDay(pop, base, "b", d, DailyCount(pop, d));
        std::move(day.begin(), day.end(), std::back_inserter(stream));
    }
    return stream;
}

std::vector<ExamRecord> HardMinePool(std::span<const ExamRecord> stream, double q) {
    if (!(q > 0.0 && q <= 1.0)) {
        throw Error(ErrorCode::kInvalidConfig, "Q must lie in (0, 1]");
    }
    std::vector<bool> selected(stream.size(), false);
    std::size_t n_labels = 0;
    for (const auto& e : stream) n_labels = std::max(n_labels, e.ground_truth.size());
    for (std::size_t l = 0; l < n_labels; ++l) {
        std::vector<double> pos;
        std::vector<double> neg;
        for (const auto& e : stream) {
            if (l >= e.ground_truth.size()) continue;
            if (e.ground_truth[l] == LabelState::kPositive) pos.push_back(e.predictions[l]);
            if (e.ground_truth[l] == LabelState::kNegative) neg.push_back(e.predictions[l]);
        }
        const double pos_cut = pos.empty() ? 0.0 : stats::Quantile(pos, q);
        const double neg_cut = neg.empty() ? 0.0 : stats::Quantile(neg, 1.0 - q);
        for (std::size_t i = 0; i < stream.size(); ++i) {
            const auto& e = stream[i];
            if (l >= e.ground_truth.size()) continue;
            if (e.ground_truth[l] == LabelState::kPositive && e.predictions[l] <= pos_cut) {
                selected[i] = true;
            }
            if (e.ground_truth[l] == LabelState::kNegative && e.predictions[l] >= neg_cut) {
                selected[i] = true;
            }
        }
    }
    std::vector<ExamRecord> pool;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (selected[i]) pool.push_back(stream[i]);
    }
    if (pool.empty()) {
        throw Error(ErrorCode::kEmptyPool, "no exam qualifies for the hard-mining pool");
    }
    return pool;
}

std::vector<ExamRecord> ReplaceFromPool(std::span<const ExamRecord> stream,
                                        std::span<const ExamRecord> pool, Date from,
                                        std::uint64_t seed) {
    if (pool.empty()) {
        throw Error(ErrorCode::kEmptyPool, "replacement pool is empty");
    }
    KeyedStream rng(DeriveKey(seed, "pool-replacement", from.days(), 0));
    std::vector<ExamRecord> out;
    out.reserve(stream.size());
    for (const auto& e : stream) {
        if (e.timestamp.date < from) {
            out.push_back(e);
            continue;
        }
        ExamRecord r = pool[rng.Below(pool.size())];
        r.exam_id = r.exam_id + "@" + e.exam_id;
        r.timestamp = e.timestamp;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ExamRecord> ApplyScenario(std::vector<ExamRecord> base, const ScenarioSpec& scenario,
                                      const PopulationSpec& pop) {
    scenario.Validate();
    if (scenario.kind == ScenarioKind::kBaseline) {
        return base;
    }
    if (base.empty()) {
        throw Error(ErrorCode::kInvalidScenarioDates, "scenario applied to an empty stream");
    }
    std::stable_sort(base.begin(), base.end(), [](const ExamRecord& a, const ExamRecord& b) {
        return a.timestamp.date < b.timestamp.date;
    });
    const Date first = base.front().timestamp.date;
    const Date last = base.back().timestamp.date;
    if (scenario.point_a < first || scenario.point_a > last ||
        (scenario.kind != ScenarioKind::kHardMining &&
         (scenario.point_b < first || scenario.point_b > last))) {
        throw Error(ErrorCode::kInvalidScenarioDates,
                    "change points must lie inside the stream range " + first.ToString() + ".." +
                        last.ToString());
    }

    if (scenario.kind == ScenarioKind::kHardMining) {
        const auto pool = HardMinePool(base, scenario.q);
        return ReplaceFromPool(base, pool, scenario.point_a, pop.seed);
    }

    const bool lateral = scenario.kind == ScenarioKind::kMetadataFilterFailure;
    const double ratio = lateral ? scenario.lateral_ratio : scenario.ood_ratio;

    // Finite out-of-population pool, drawn without replacement and reshuffled
    // whenever it runs out.
    std::vector<ExamRecord> ood_pool;
    std::vector<std::size_t> order;
    std::size_t next = 0;
    int cycle = 0;
    auto reshuffle = [&]() {
        KeyedStream rng(DeriveKey(pop.seed, "ood-shuffle", cycle++, 0));
        order.resize(ood_pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.Below(i)]);
        }
        next = 0;
    };
    if (!lateral) {
        ood_pool = GenerateVariantDay(pop, pop.ood, "ood", Date(0),
                                      static_cast<int>(pop.ood_pool_size));
        if (ood_pool.empty()) {
            throw Error(ErrorCode::kEmptyPool, "out-of-population pool is empty");
        }
        for (std::size_t i = 0; i < ood_pool.size(); ++i) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "ood-pool-%05zu", i);
            ood_pool[i].exam_id = buf;
        }
        reshuffle();
    }

    std::vector<ExamRecord> out;
    out.reserve(base.size() * 2);
    for (const auto& [day_num, range] : DayRanges(base)) {
        const Date day(day_num);
        std::vector<ExamRecord> day_exams(base.begin() + static_cast<std::ptrdiff_t>(range.first),
                                          base.begin() + static_cast<std::ptrdiff_t>(range.second));
        if (day < scenario.point_a) {
            std::move(day_exams.begin(), day_exams.end(), std::back_inserter(out));
            continue;
        }
        const int original = static_cast<int>(day_exams.size());
        const int added = static_cast<int>(std::lround(ratio * original));
        if (day >= scenario.point_b) {
            day_exams.clear();
        }
        if (lateral) {
            auto extra = GenerateVariantDay(pop, pop.lateral, "lat", day, added);
            std::move(extra.begin(), extra.end(), std::back_inserter(day_exams));
        } else {
            Rng times_rng(DeriveKey(pop.seed, "ood-times", day.days(), 0));
            const auto times = SortedTimesOfDay(times_rng, added);
            for (int k = 0; k < added; ++k) {
                if (next == order.size()) reshuffle();
                ExamRecord e = ood_pool[order[next++]];
                e.exam_id = e.exam_id + "@" + ExamId("ood", day, k);
                e.timestamp = {day, times[static_cast<std::size_t>(k)]};
                day_exams.push_back(std::move(e));
            }
        }
        SortDay(day_exams);
        std::move(day_exams.begin(), day_exams.end(), std::back_inserter(out));
    }
    return out;
}

namespace {

void VariantFromJson(const nlohmann::json& j, PopulationVariant& v) {
    v.latent_shift = j.value("latent_shift", v.latent_shift);
    v.signal_scale = j.value("signal_scale", v.signal_scale);
    v.noise_scale = j.value("noise_scale", v.noise_scale);
    v.forced_view_position = j.value("forced_view_position", v.forced_view_position);
    v.exposure_scale = j.value("exposure_scale", v.exposure_scale);
    v.age_shift = j.value("age_shift", v.age_shift);
    v.metadata_missing = j.value("metadata_missing", v.metadata_missing);
    v.only_labeled = j.value("only_labeled", v.only_labeled);
    v.prevalence = j.value("prevalence", v.prevalence);
}

}  // namespace

void PopulationFromJson(const nlohmann::json& j, PopulationSpec& pop) {
    try {
        pop.seed = j.value("seed", pop.seed);
        pop.prevalence = j.value("prevalence", pop.prevalence);
        pop.latent_sd = j.value("latent_sd", pop.latent_sd);
        pop.label_shift = j.value("label_shift", pop.label_shift);
        pop.severity_label_coeff = j.value("severity_label_coeff", pop.severity_label_coeff);
        pop.severity_latent_noise = j.value("severity_latent_noise", pop.severity_latent_noise);
        pop.signal = j.value("signal", pop.signal);
        pop.severity_score_coeff = j.value("severity_score_coeff", pop.severity_score_coeff);
        pop.score_bias = j.value("score_bias", pop.score_bias);
        pop.score_noise = j.value("score_noise", pop.score_noise);
        pop.exams_per_day = j.value("exams_per_day", pop.exams_per_day);
        pop.low_day_probability = j.value("low_day_probability", pop.low_day_probability);
        pop.low_day_fraction = j.value("low_day_fraction", pop.low_day_fraction);
        pop.ood_pool_size = j.value("ood_pool_size", pop.ood_pool_size);
        if (j.contains("categorical")) {
            const auto& cat = j.at("categorical");
            for (std::size_t i = 0; i < pop.schema.categorical.size(); ++i) {
                const auto& name = pop.schema.categorical[i].name;
                if (!cat.contains(name)) continue;
                pop.categorical[i].probabilities =
                    cat.at(name).value("probabilities", pop.categorical[i].probabilities);
                pop.categorical[i].missing_rate =
                    cat.at(name).value("missing_rate", pop.categorical[i].missing_rate);
            }
        }
        if (j.contains("lateral")) VariantFromJson(j.at("lateral"), pop.lateral);
        if (j.contains("ood")) VariantFromJson(j.at("ood"), pop.ood);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidConfig, std::string("population config: ") + e.what());
    }
    pop.Validate();
}

void ScenarioFromJson(const nlohmann::json& j, ScenarioSpec& s) {
    try {
        if (j.contains("kind")) s.kind = ParseScenarioKind(j.at("kind").get<std::string>());
        if (j.contains("start")) s.start = Date::Parse(j.at("start").get<std::string>());
        if (j.contains("end")) s.end = Date::Parse(j.at("end").get<std::string>());
        if (j.contains("point_a")) s.point_a = Date::Parse(j.at("point_a").get<std::string>());
        if (j.contains("point_b")) s.point_b = Date::Parse(j.at("point_b").get<std::string>());
        s.q = j.value("q", s.q);
        s.lateral_ratio = j.value("lateral_ratio", s.lateral_ratio);
        s.ood_ratio = j.value("ood_ratio", s.ood_ratio);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidConfig, std::string("scenario config: ") + e.what());
    }
    s.Validate();
}

nlohmann::json ScenarioToJson(const ScenarioSpec& s) {
    nlohmann::json j;
    j["kind"] = ScenarioName(s.kind);
    j["start"] = s.start.ToString();
    j["end"] = s.end.ToString();
    if (s.kind != ScenarioKind::kBaseline) j["point_a"] = s.point_a.ToString();
    if (s.kind == ScenarioKind::kMetadataFilterFailure || s.kind == ScenarioKind::kNoMetadataOod) {
        j["point_b"] = s.point_b.ToString();
    }
    if (s.kind == ScenarioKind::kHardMining) j["q"] = s.q;
    if (s.kind == ScenarioKind::kMetadataFilterFailure) j["lateral_ratio"] = s.lateral_ratio;
    if (s.kind == ScenarioKind::kNoMetadataOod) j["ood_ratio"] = s.ood_ratio;
    return j;
}

}  // namespace mmc::sim
