/// @file simulator.h
/// @brief Deterministic synthetic exam streams and drift-scenario injection

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmc/core_model.h"

namespace mmc::sim {

struct CategoricalDistribution {
    std::vector<double> probabilities;  // aligned with the schema's categories
    double missing_rate = 0.0;
};

struct ContinuousDistribution {
    enum class Family { kNormal, kLogNormal };
    Family family = Family::kNormal;
    double location = 0.0;  // mean, or log-mean for kLogNormal
    double spread = 1.0;    // sd, or log-sd for kLogNormal
    double min = -1e300;
    double max = 1e300;
    double missing_rate = 0.0;
};

/// Deviation of a sub-population (lateral views, out-of-population exams)
/// from the base population.
struct PopulationVariant {
    std::vector<double> latent_shift;       // added to the latent; empty = none
    double signal_scale = 1.0;              // scales the label term of the score
    double noise_scale = 1.0;               // scales the per-label score noise
    std::string forced_view_position;       // empty = draw from base
    double exposure_scale = 1.0;
    double age_shift = 0.0;
    bool metadata_missing = false;          // every categorical/continuous field missing
    int only_labeled = -1;                  // label index; others become unknown
    std::vector<double> prevalence;         // empty = base prevalence
};

/// Base population and generator parameters.
///
/// Labels: an exam-level severity u ~ N(0,1) raises every label's log-odds
/// by `severity_label_coeff * u`. Latent: z ~ N(0, latent_sd^2) per
/// dimension, plus `label_shift` on the dimension assigned to each positive
/// label; the last dimension carries u plus noise. Predictions:
///   sigmoid(signal * (z_l - label_shift/2) + severity_score_coeff * z_last
///           + score_bias + score_noise * eps).
struct PopulationSpec {
    FeatureSchema schema;
    std::vector<double> prevalence;
    std::vector<CategoricalDistribution> categorical;
    std::vector<ContinuousDistribution> continuous;

    double latent_sd = 0.5;
    double label_shift = 3.0;
    double severity_label_coeff = 1.0;
    double severity_latent_noise = 0.3;
    double signal = 1.0;
    double severity_score_coeff = 3.0;
    double score_bias = 0.0;
    double score_noise = 0.3;

    double exams_per_day = 200.0;
    double low_day_probability = 0.02;
    double low_day_fraction = 0.15;

    PopulationVariant lateral;
    PopulationVariant ood;
    std::size_t ood_pool_size = 5856;

    std::uint64_t seed = 7;

    void Validate() const;
};

/// Default base population over DefaultSchema(latent_dim).
PopulationSpec DefaultPopulation(std::uint64_t seed = 7, int latent_dim = 16);

enum class ScenarioKind { kBaseline, kHardMining, kMetadataFilterFailure, kNoMetadataOod };

const char* ScenarioName(ScenarioKind kind);
ScenarioKind ParseScenarioKind(const std::string& name);

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::kBaseline;
    Date start = Date(2014, 1, 1);
    Date end = Date(2014, 12, 31);
    Date point_a = Date(2014, 6, 1);
    Date point_b = Date(2014, 9, 1);
    double q = 1.0;
    double lateral_ratio = 1.0;
    double ood_ratio = 3.0;

    void Validate() const;
};

/// Date-ordered stream for [start, end]; exams of a given day depend only on
/// (seed, day), so overlapping ranges agree.
std::vector<ExamRecord> GenerateBaseline(const PopulationSpec& pop, Date start, Date end);

/// Exams of one sub-population for one day. `tag` distinguishes streams.
std::vector<ExamRecord> GenerateVariantDay(const PopulationSpec& pop,
                                           const PopulationVariant& variant,
                                           const std::string& tag, Date day, int count);

/// Hard-data-mining pool: per label, positives scoring at or below the
/// label's Q-quantile among positives and negatives scoring at or above the
/// (1-Q)-quantile among negatives; union over labels, in stream order.
/// Throws Error(kEmptyPool) when nothing qualifies.
std::vector<ExamRecord> HardMinePool(std::span<const ExamRecord> stream, double q);

/// Replaces every exam dated on or after `from` with a uniform draw (with
/// replacement) from `pool`, keeping timestamps and daily counts.
std::vector<ExamRecord> ReplaceFromPool(std::span<const ExamRecord> stream,
                                        std::span<const ExamRecord> pool, Date from,
                                        std::uint64_t seed);

/// Applies a drift scenario to a base stream. Baseline returns the input.
/// Throws Error(kInvalidScenarioDates) when the change points fall outside
/// the stream range or are out of order.
std::vector<ExamRecord> ApplyScenario(std::vector<ExamRecord> base, const ScenarioSpec& scenario,
                                      const PopulationSpec& pop);

/// JSON configuration. Absent keys keep the defaults.
void PopulationFromJson(const nlohmann::json& j, PopulationSpec& pop);
void ScenarioFromJson(const nlohmann::json& j, ScenarioSpec& scenario);
nlohmann::json ScenarioToJson(const ScenarioSpec& scenario);

}  // namespace mmc::sim
