// evtc command line: prepare-survival, analyze, simulate, truth.
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evtc/cli.hpp"
#include "evtc/error.hpp"
#include "evtc/index_estimators.hpp"

namespace {

std::vector<evtc::EstimatorKind> parse_estimators(const std::string& list) {
    std::vector<evtc::EstimatorKind> kinds;
    std::string cur;
    for (char c : list + ",") {
        if (c == ',') {
            if (!cur.empty()) kinds.push_back(evtc::estimator_kind_from_string(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (kinds.empty()) throw evtc::ValidationError("--estimators: empty list");
    return kinds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extreme value index and extreme quantile estimation under right censoring"};
    app.require_subcommand(1);

    // prepare-survival
    auto* prep = app.add_subcommand("prepare-survival",
                                    "event records (dates + status) -> z,delta CSV, z in days");
    evtc::cli::PrepareRequest prep_req;
    prep->add_option("--input", prep_req.input, "event-record CSV")->required();
    prep->add_option("--output", prep_req.output, "z,delta CSV to write")->required();
    prep->add_option("--col-diagnosis", prep_req.col_diagnosis, "diagnosis date column");
    prep->add_option("--col-end", prep_req.col_end, "end-of-observation date column");
    prep->add_option("--col-status", prep_req.col_status, "status column (dead/censored)");
    prep->add_option("--col-sex", prep_req.col_sex, "sex column used by --filter-sex");
    std::string filter_sex;
    prep->add_option("--filter-sex", filter_sex, "keep only rows with this sex value");

    // analyze
    auto* ana = app.add_subcommand("analyze", "p-hat, index and quantile curves from z,delta data");
    evtc::cli::AnalysisRequest ana_req;
    std::string estimators = "hill,moment,uh,ml";
    double fix_p = -1.0;
    int ci_case = 0;
    double gamma1_hyp = std::numeric_limits<double>::quiet_NaN();
    ana->add_option("--input", ana_req.input, "z,delta CSV")->required();
    ana->add_option("--out-dir", ana_req.out_dir, "output directory")->required();
    ana->add_option("--k-min", ana_req.k_min, "smallest k (default 1)");
    ana->add_option("--k-max", ana_req.k_max, "largest k (default n-2)");
    ana->add_option("--eps", ana_req.eps_list, "quantile exceedance probability (repeatable)");
    ana->add_option("--fix-p", fix_p, "fixed p instead of the per-k p-hat");
    ana->add_option("--estimators", estimators, "comma list: hill,moment,uh,ml");
    ana->add_flag("--years", ana_req.years, "report quantiles in years (divide by 365.25)");
    ana->add_option("--ci-case", ci_case, "assert tail case (1,2,3) to emit Wald CI columns");
    ana->add_option("--ci-level", ana_req.ci_level, "CI level (default 0.95)");
    ana->add_option("--gamma1", gamma1_hyp, "gamma1 hypothesis used in the CI variance");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a Monte Carlo study from a JSON config");
    std::string sim_config, sim_out;
    int threads = 1;
    std::uint64_t seed_override = 0;
    bool have_seed_override = false;
    sim->add_option("--config", sim_config, "JSON config file")->required();
    sim->add_option("--out-dir", sim_out, "output directory")->required();
    sim->add_option("--threads", threads, "worker threads (default 1; results identical)");
    sim->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { have_seed_override = true; });

    // truth
    auto* tru = app.add_subcommand("truth", "truth values and asymptotic variances for a pair");
    std::string pair_path;
    tru->add_option("--pair", pair_path, "family-pair JSON file ('-' for stdin)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*prep) {
            if (!filter_sex.empty()) prep_req.filter_sex = filter_sex;
            const auto result = evtc::cli::cmd_prepare_survival(prep_req);
            std::printf("wrote %zu rows (%zu events) to %s\n", result.rows, result.events,
                        prep_req.output.string().c_str());
        } else if (*ana) {
            ana_req.estimators = parse_estimators(estimators);
            if (fix_p >= 0.0) ana_req.fixed_p = fix_p;
            if (ci_case != 0) ana_req.ci_case = ci_case;
            if (gamma1_hyp == gamma1_hyp) ana_req.gamma1_hypothesis = gamma1_hyp;
            evtc::cli::cmd_analyze(ana_req);
        } else if (*sim) {
            evtc::cli::cmd_simulate(sim_config, sim_out, threads,
                                    have_seed_override ? std::optional<std::uint64_t>(seed_override)
                                                       : std::nullopt);
        } else if (*tru) {
            nlohmann::json pair_json;
            if (pair_path == "-") {
                std::cin >> pair_json;
            } else {
                std::ifstream in(pair_path);
                if (!in) throw evtc::IoError("cannot open " + pair_path);
                in >> pair_json;
            }
            std::cout << evtc::cli::cmd_truth(pair_json).dump(2) << '\n';
        }
    } catch (const evtc::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const evtc::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: invalid JSON: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
