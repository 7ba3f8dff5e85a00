#include "evtc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "evtc/asymptotics.hpp"
#include "evtc/error.hpp"
#include "evtc/rng.hpp"
#include "evtc/quantile.hpp"

namespace evtc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kVersion = "0.1.0";

double pairwise_sum_impl(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    if (m % 2 == 1) return v[m / 2];
    return 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

TailCase case_of_pair(const FamilyPair& pair) {
    if (std::holds_alternative<BurrParams>(pair.f_spec)) return TailCase::Case1;
    if (std::holds_alternative<ReverseBurrParams>(pair.f_spec)) return TailCase::Case2;
    return TailCase::Case3;
}

// Run `reps` independent replicate jobs over `threads` threads; job r is a
// pure function writing only into its own slots.
template <typename Job>
void run_replicates(std::size_t reps, int threads, Job&& job) {
    const int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        for (std::size_t r = 0; r < reps; ++r) job(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= reps) return;
            job(r);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_impl(values.data(), values.size());
}

double mse(std::span<const double> values, double truth) {
    if (values.empty()) throw ValidationError("mse: empty input");
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - truth;
        sq[i] = d * d;
    }
    return pairwise_sum(sq) / static_cast<double>(values.size());
}

void validate_config(const SimConfig& config) {
    validate_pair(config.pair);
    if (config.n < 3) throw ValidationError("config: /n must be >= 3");
    if (config.reps < 1) throw ValidationError("config: /reps must be >= 1");
    if (config.k_grid.empty()) throw ValidationError("config: /k_grid must be nonempty");
    for (std::size_t i = 0; i < config.k_grid.size(); ++i) {
        const std::size_t k = config.k_grid[i];
        if (k < 1 || k > config.n - 2)
            throw ValidationError("config: /k_grid/" + std::to_string(i) +
                                  " outside [1, n-2]");
        if (i > 0 && config.k_grid[i] <= config.k_grid[i - 1])
            throw ValidationError("config: /k_grid must be strictly increasing");
    }
    if (!(config.eps > 0.0 && config.eps < 1.0))
        throw ValidationError("config: /eps outside (0,1)");
    if (config.estimators.empty()) throw ValidationError("config: /estimators must be nonempty");
    if (config.p_policy.fixed && !(*config.p_policy.fixed > 0.0 && *config.p_policy.fixed <= 1.0))
        throw ValidationError("config: /p_policy fixed value outside (0,1]");
}

namespace {

bool is_nonneg_int(const nlohmann::json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::uint64_t get_uint(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !is_nonneg_int(j[key]))
        throw ValidationError(std::string("config: /") + key +
                              " missing or not a nonnegative integer");
    return j[key].get<std::uint64_t>();
}

}  // namespace

SimConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config: want a JSON object");
    SimConfig c;
    if (!j.contains("pair")) throw ValidationError("config: /pair missing");
    c.pair = pair_from_json(j["pair"]);
    c.n = static_cast<std::size_t>(get_uint(j, "n"));
    c.reps = static_cast<std::size_t>(get_uint(j, "reps"));
    c.seed = get_uint(j, "seed");

    if (!j.contains("k_grid")) throw ValidationError("config: /k_grid missing");
    const auto& kg = j["k_grid"];
    if (kg.is_array()) {
        for (std::size_t i = 0; i < kg.size(); ++i) {
            if (!is_nonneg_int(kg[i]))
                throw ValidationError("config: /k_grid/" + std::to_string(i) +
                                      " not a nonnegative integer");
            c.k_grid.push_back(kg[i].get<std::size_t>());
        }
    } else if (kg.is_object()) {
        for (const char* key : {"min", "max", "step"})
            if (!kg.contains(key) || !is_nonneg_int(kg[key]))
                throw ValidationError(std::string("config: /k_grid/") + key +
                                      " missing or not a nonnegative integer");
        const auto lo = kg["min"].get<std::size_t>();
        const auto hi = kg["max"].get<std::size_t>();
        const auto step = kg["step"].get<std::size_t>();
        if (step == 0) throw ValidationError("config: /k_grid/step must be positive");
        for (std::size_t k = lo; k <= hi; k += step) c.k_grid.push_back(k);
    } else {
        throw ValidationError("config: /k_grid must be an array or {min,max,step}");
    }

    if (j.contains("eps")) {
        if (!j["eps"].is_number()) throw ValidationError("config: /eps not a number");
        c.eps = j["eps"].get<double>();
    }
    if (j.contains("estimators")) {
        if (!j["estimators"].is_array())
            throw ValidationError("config: /estimators must be an array");
        c.estimators.clear();
        for (std::size_t i = 0; i < j["estimators"].size(); ++i) {
            if (!j["estimators"][i].is_string())
                throw ValidationError("config: /estimators/" + std::to_string(i) +
                                      " not a string");
            c.estimators.push_back(
                estimator_kind_from_string(j["estimators"][i].get<std::string>()));
        }
    }
    if (j.contains("p_policy")) {
        const auto& pp = j["p_policy"];
        if (pp.is_string() && pp.get<std::string>() == "per-k") {
            c.p_policy = PPolicy::per_k();
        } else if (pp.is_number()) {
            c.p_policy = PPolicy::fixed_at(pp.get<double>());
        } else {
            throw ValidationError("config: /p_policy must be \"per-k\" or a number");
        }
    }
    validate_config(c);
    return c;
}

nlohmann::json config_to_json(const SimConfig& config) {
    nlohmann::json j;
    j["pair"] = pair_to_json(config.pair);
    j["n"] = config.n;
    j["reps"] = config.reps;
    j["k_grid"] = config.k_grid;
    j["eps"] = config.eps;
    j["seed"] = config.seed;
    nlohmann::json est = nlohmann::json::array();
    for (auto kind : config.estimators) est.push_back(to_string(kind));
    j["estimators"] = est;
    if (config.p_policy.fixed)
        j["p_policy"] = *config.p_policy.fixed;
    else
        j["p_policy"] = "per-k";
    return j;
}

namespace {

struct FailureItem {
    std::size_t cell;  // flat cell index
    std::string reason;
};

// per-replicate estimation of every (estimator, k) cell
struct StudySlab {
    std::size_t n_kinds = 0, n_k = 0, reps = 0;
    std::vector<double> values;  // kind-major, then k, then replicate
    double& at(std::size_t kind_i, std::size_t k_i, std::size_t r) {
        return values[(kind_i * n_k + k_i) * reps + r];
    }
    double at(std::size_t kind_i, std::size_t k_i, std::size_t r) const {
        return values[(kind_i * n_k + k_i) * reps + r];
    }
};

CellSummary summarize_cell(EstimatorKind kind, std::size_t k, const StudySlab& slab,
                           std::size_t kind_i, std::size_t k_i, double truth,
                           const std::vector<std::vector<FailureItem>>& failures,
                           std::size_t cell_index) {
    CellSummary cell;
    cell.kind = kind;
    cell.k = k;
    std::vector<double> vals;
    vals.reserve(slab.reps);
    for (std::size_t r = 0; r < slab.reps; ++r) {
        const double v = slab.at(kind_i, k_i, r);
        if (!std::isnan(v)) vals.push_back(v);
    }
    cell.failures = slab.reps - vals.size();
    for (const auto& per_rep : failures)
        for (const auto& item : per_rep)
            if (item.cell == cell_index) ++cell.failure_causes[item.reason];
    if (!vals.empty()) {
        cell.median = median_of(vals);
        const double m = static_cast<double>(vals.size());
        cell.mean = pairwise_sum(vals) / m;
        cell.mse = mse(vals, truth);
        std::vector<double> centered(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double d = vals[i] - cell.mean;
            centered[i] = d * d;
        }
        cell.variance = pairwise_sum(centered) / m;
    } else {
        cell.median = cell.mean = cell.mse = cell.variance = kNaN;
    }
    return cell;
}

}  // namespace

SimSummary run_study(const SimConfig& config, int threads) {
    validate_config(config);
    SimSummary out;
    out.config = config;
    out.truth = truth_values(config.pair);
    out.true_quantile = family_quantile(config.pair.f_spec, 1.0 - config.eps);
    out.generator_id = CounterRng::kAlgorithm;
    out.version = kVersion;

    const auto& kinds = config.estimators;
    std::vector<EstimatorKind> quantile_kinds;
    for (auto kind : kinds)
        if (kind != EstimatorKind::Hill) quantile_kinds.push_back(kind);

    const std::size_t n_k = config.k_grid.size();
    StudySlab index_slab{kinds.size(), n_k, config.reps,
                         std::vector<double>(kinds.size() * n_k * config.reps, kNaN)};
    StudySlab quant_slab{quantile_kinds.size(), n_k, config.reps,
                         std::vector<double>(quantile_kinds.size() * n_k * config.reps, kNaN)};
    std::vector<std::vector<FailureItem>> index_failures(config.reps);
    std::vector<std::vector<FailureItem>> quant_failures(config.reps);

    run_replicates(config.reps, threads, [&](std::size_t r) {
        const CensoredSample sample =
            sample_censored(config.pair, config.n, config.seed ^ static_cast<std::uint64_t>(r));
        const SortedCensoredSample sorted = sort_sample(sample);
        for (std::size_t k_i = 0; k_i < n_k; ++k_i) {
            const std::size_t k = config.k_grid[k_i];
            GpdFit ml_fit;
            bool have_ml = false;
            for (std::size_t kind_i = 0; kind_i < kinds.size(); ++kind_i) {
                const EstimatorKind kind = kinds[kind_i];
                try {
                    double raw = 0.0;
                    switch (kind) {
                        case EstimatorKind::Hill: raw = hill(sorted, k); break;
                        case EstimatorKind::Moment: raw = moment(sorted, k); break;
                        case EstimatorKind::UH: raw = uh(sorted, k); break;
                        case EstimatorKind::ML:
                            ml_fit = ml_estimator(sorted, k);
                            have_ml = true;
                            raw = ml_fit.gamma;
                            break;
                    }
                    const double p = config.p_policy.resolve(sorted, k);
                    index_slab.at(kind_i, k_i, r) = adapt_to_censoring(raw, p);
                } catch (const ValidationError& err) {
                    index_failures[r].push_back({kind_i * n_k + k_i, err.what()});
                }
            }
            for (std::size_t q_i = 0; q_i < quantile_kinds.size(); ++q_i) {
                const EstimatorKind kind = quantile_kinds[q_i];
                try {
                    const GpdFit* fit =
                        (kind == EstimatorKind::ML && have_ml) ? &ml_fit : nullptr;
                    quant_slab.at(q_i, k_i, r) =
                        extreme_quantile(sorted, k, config.eps, kind, config.p_policy, fit)
                            .value;
                } catch (const ValidationError& err) {
                    quant_failures[r].push_back({q_i * n_k + k_i, err.what()});
                }
            }
        }
    });

    for (std::size_t kind_i = 0; kind_i < kinds.size(); ++kind_i)
        for (std::size_t k_i = 0; k_i < n_k; ++k_i)
            out.index_cells.push_back(summarize_cell(kinds[kind_i], config.k_grid[k_i], index_slab,
                                                     kind_i, k_i, out.truth.gamma1, index_failures,
                                                     kind_i * n_k + k_i));
    for (std::size_t q_i = 0; q_i < quantile_kinds.size(); ++q_i)
        for (std::size_t k_i = 0; k_i < n_k; ++k_i)
            out.quantile_cells.push_back(
                summarize_cell(quantile_kinds[q_i], config.k_grid[k_i], quant_slab, q_i, k_i,
                               out.true_quantile, quant_failures, q_i * n_k + k_i));
    return out;
}

NormalityReport normality_experiment(const SimConfig& config, EstimatorKind kind, std::size_t k,
                                     int threads) {
    validate_pair(config.pair);
    if (config.reps < 1) throw ValidationError("normality_experiment: reps must be >= 1");
    if (k < 1 || k > config.n - 2)
        throw ValidationError("normality_experiment: k outside [1, n-2]");

    const TruthValues truth = truth_values(config.pair);
    const TailCase tail_case = case_of_pair(config.pair);

    std::vector<double> values(config.reps, kNaN);
    run_replicates(config.reps, threads, [&](std::size_t r) {
        const CensoredSample sample =
            sample_censored(config.pair, config.n, config.seed ^ static_cast<std::uint64_t>(r));
        const SortedCensoredSample sorted = sort_sample(sample);
        try {
            double raw = 0.0;
            switch (kind) {
                case EstimatorKind::Hill: raw = hill(sorted, k); break;
                case EstimatorKind::Moment: raw = moment(sorted, k); break;
                case EstimatorKind::UH: raw = uh(sorted, k); break;
                case EstimatorKind::ML: raw = ml_estimator(sorted, k).gamma; break;
            }
            const double adapted =
                adapt_to_censoring(raw, config.p_policy.resolve(sorted, k));
            values[r] = std::sqrt(static_cast<double>(k)) * (adapted - truth.gamma1);
        } catch (const ValidationError&) {
            // recorded as a failure below
        }
    });

    NormalityReport report;
    for (double v : values)
        if (!std::isnan(v)) report.standardized.push_back(v);
    report.failures = config.reps - report.standardized.size();
    report.theory_variance =
        variance_censored(kind, tail_case, truth.gamma1, truth.gamma, truth.p);
    try {
        const BiasTerms bt = theoretical_bias_example(config.pair, kind, config.n, k);
        report.theory_mean =
            (bt.gamma_term - truth.gamma1 * bt.alpha2_term) / truth.p;
    } catch (const ValidationError&) {
        report.theory_mean = std::nullopt;
    }

    const std::size_t m = report.standardized.size();
    if (m == 0) return report;
    const double dm = static_cast<double>(m);
    report.empirical_mean = pairwise_sum(report.standardized) / dm;
    std::vector<double> centered(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double d = report.standardized[i] - report.empirical_mean;
        centered[i] = d * d;
    }
    report.empirical_variance = pairwise_sum(centered) / dm;

    if (m >= 2 && report.empirical_variance > 0.0) {
        std::vector<double> sorted_vals = report.standardized;
        std::sort(sorted_vals.begin(), sorted_vals.end());
        const double sd = std::sqrt(report.empirical_variance);
        double d_max = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double u = (sorted_vals[i] - report.empirical_mean) / sd;
            const double phi = 0.5 * std::erfc(-u / std::sqrt(2.0));
            d_max = std::max(d_max, std::abs(static_cast<double>(i + 1) / dm - phi));
            d_max = std::max(d_max, std::abs(phi - static_cast<double>(i) / dm));
        }
        report.ks_distance = d_max;
    }
    return report;
}

void write_summary_files(const SimSummary& summary, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    auto write_cells = [&](const std::filesystem::path& path,
                           const std::vector<CellSummary>& cells) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot open " + path.string());
        f << "estimator,k,median,mean,mse,failures\n";
        for (const auto& c : cells) {
            f << to_string(c.kind) << ',' << c.k << ',' << format_double(c.median) << ','
              << format_double(c.mean) << ',' << format_double(c.mse) << ',' << c.failures
              << '\n';
        }
        if (!f) throw IoError("write failed for " + path.string());
    };
    write_cells(out_dir / "summary.csv", summary.index_cells);
    write_cells(out_dir / "quantile_summary.csv", summary.quantile_cells);

    nlohmann::json meta;
    meta["config"] = config_to_json(summary.config);
    meta["generator"] = summary.generator_id;
    meta["version"] = summary.version;
    meta["truth"] = {{"gamma1", summary.truth.gamma1}, {"gamma2", summary.truth.gamma2},
                     {"gamma", summary.truth.gamma},   {"rho", summary.truth.rho},
                     {"p", summary.truth.p}};
    meta["true_quantile"] = summary.true_quantile;
    nlohmann::json failures = nlohmann::json::array();
    auto add_failures = [&](const std::vector<CellSummary>& cells, const char* which) {
        for (const auto& c : cells)
            for (const auto& [reason, count] : c.failure_causes)
                failures.push_back({{"table", which},
                                    {"estimator", to_string(c.kind)},
                                    {"k", c.k},
                                    {"reason", reason},
                                    {"count", count}});
    };
    add_failures(summary.index_cells, "index");
    add_failures(summary.quantile_cells, "quantile");
    meta["failures_by_cause"] = failures;

    std::ofstream mf(out_dir / "metadata.json", std::ios::binary);
    if (!mf) throw IoError("cannot open " + (out_dir / "metadata.json").string());
    mf << meta.dump(2) << '\n';
    if (!mf) throw IoError("write failed for " + (out_dir / "metadata.json").string());
}

}  // namespace evtc
