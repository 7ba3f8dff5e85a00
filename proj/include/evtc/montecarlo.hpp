#pragma once

// Seeded Monte Carlo engine: median/MSE study of the adapted index and
// quantile estimators over a k grid, and the normality experiment that
// checks the limiting law empirically. Replicates draw from independent
// counter-based streams (seed xor replicate index) and may run on several
// threads; aggregation order is fixed by replicate index, so results are
// identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evtc/index_estimators.hpp"
#include "evtc/model_families.hpp"

namespace evtc {

struct SimConfig {
    FamilyPair pair;
    std::size_t n = 500;
    std::size_t reps = 100;
    std::vector<std::size_t> k_grid;  // subset of [1, n-2], strictly increasing
    double eps = 0.02;                // quantile exceedance probability
    std::uint64_t seed = 0;
    std::vector<EstimatorKind> estimators{EstimatorKind::Hill, EstimatorKind::Moment,
                                          EstimatorKind::UH, EstimatorKind::ML};
    PPolicy p_policy;  // per-k p-hat unless fixed
};

void validate_config(const SimConfig& config);
SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& config);

struct CellSummary {
    EstimatorKind kind = EstimatorKind::Hill;
    std::size_t k = 0;
    double median = 0.0;
    double mean = 0.0;
    double mse = 0.0;       // against the truth value
    double variance = 0.0;  // spread of the estimates, 1/m denominator
    std::size_t failures = 0;
    std::map<std::string, std::size_t> failure_causes;
};

struct SimSummary {
    SimConfig config;
    TruthValues truth;
    double true_quantile = 0.0;  // F^{-1}(1 - eps)
    std::vector<CellSummary> index_cells;
    std::vector<CellSummary> quantile_cells;  // moment/uh/ml kinds only
    std::string generator_id;
    std::string version;
};

SimSummary run_study(const SimConfig& config, int threads = 1);

// (1/m) sum (v - truth)^2, pairwise summation; errors on empty input.
double mse(std::span<const double> values, double truth);

// Order-fixed pairwise sum (deterministic reduction helper).
double pairwise_sum(std::span<const double> values);

struct NormalityReport {
    std::vector<double> standardized;  // sqrt(k) (gamma-hat - gamma1), replicate order
    double empirical_mean = 0.0;
    double empirical_variance = 0.0;
    std::optional<double> theory_mean;  // bias overlay when the pair supports it
    double theory_variance = 0.0;
    std::optional<double> ks_distance;  // against the matched-moment normal
    std::size_t failures = 0;
};

// Runs config.reps replicates at sample size config.n, estimating with
// `kind` at the single threshold count k.
NormalityReport normality_experiment(const SimConfig& config, EstimatorKind kind, std::size_t k,
                                     int threads = 1);

// summary.csv + quantile_summary.csv (estimator,k,median,mean,mse,failures)
// and metadata.json (config echo, generator id, version, truth values,
// itemized failures) under out_dir.
void write_summary_files(const SimSummary& summary, const std::filesystem::path& out_dir);

}  // namespace evtc
