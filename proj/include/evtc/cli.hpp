#pragma once

// Command implementations behind the evtc binary: survival-data
// preparation, the real-data analysis pipeline, simulation runs and
// truth-value queries. All outputs are plain CSV/JSON; every number is a
// direct library call on the parsed data.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evtc/index_estimators.hpp"

namespace evtc::cli {

struct PrepareRequest {
    std::filesystem::path input;
    std::filesystem::path output;
    std::string col_diagnosis = "diagnosis";
    std::string col_end = "end";
    std::string col_status = "status";
    std::string col_sex = "sex";
    std::optional<std::string> filter_sex;  // keep rows whose sex column equals this
};

struct PrepareResult {
    std::size_t rows = 0;
    std::size_t events = 0;
};

// Event records (ISO-8601 dates, status dead/censored) -> z,delta CSV,
// z in whole days. Nonpositive durations and unknown tokens are errors
// naming the row.
PrepareResult cmd_prepare_survival(const PrepareRequest& request);

struct AnalysisRequest {
    std::filesystem::path input;  // z,delta CSV
    std::filesystem::path out_dir;
    std::vector<EstimatorKind> estimators{EstimatorKind::Hill, EstimatorKind::Moment,
                                          EstimatorKind::UH, EstimatorKind::ML};
    std::size_t k_min = 1;
    std::size_t k_max = 0;  // 0: n-2
    std::vector<double> eps_list;
    std::optional<double> fixed_p;  // per-k p-hat when absent
    bool years = false;             // divide reported quantiles by 365.25
    // confidence intervals are emitted only when the user asserts a case
    std::optional<int> ci_case;  // 1, 2 or 3
    double ci_level = 0.95;
    std::optional<double> gamma1_hypothesis;
};

// Writes phat.csv, gamma_<kind>.csv and quantile_<kind>_<eps>.csv.
void cmd_analyze(const AnalysisRequest& request);

// Reads a JSON SimConfig, runs the study, writes the montecarlo outputs.
// seed_override replaces the config seed when present.
void cmd_simulate(const std::filesystem::path& config_path,
                  const std::filesystem::path& out_dir, int threads = 1,
                  std::optional<std::uint64_t> seed_override = std::nullopt);

// Truth values and the per-estimator asymptotic variances for a pair.
nlohmann::json cmd_truth(const nlohmann::json& pair_json);

}  // namespace evtc::cli
