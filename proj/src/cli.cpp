#include "evtc/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "evtc/asymptotics.hpp"
#include "evtc/censored_sample.hpp"
#include "evtc/error.hpp"
#include "evtc/model_families.hpp"
#include "evtc/montecarlo.hpp"
#include "evtc/quantile.hpp"

namespace evtc::cli {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_eps(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// days since 1970-01-01 (proleptic Gregorian)
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<long>(era) * 146097 + static_cast<long>(doe) - 719468;
}

long parse_iso_date(const std::string& s, std::size_t row, const std::string& what) {
    int y = 0, m = 0, d = 0;
    char extra;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3)
        throw ValidationError("prepare-survival: unparseable " + what + " date '" + s +
                              "' at row " + std::to_string(row));
    static constexpr int mdays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    const int dim = m == 2 && leap ? 29 : (m >= 1 && m <= 12 ? mdays[m - 1] : 0);
    if (m < 1 || m > 12 || d < 1 || d > dim)
        throw ValidationError("prepare-survival: invalid " + what + " date '" + s + "' at row " +
                              std::to_string(row));
    return days_from_civil(y, m, d);
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::string& file) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ValidationError("prepare-survival: column '" + name + "' not found in " + file);
}

}  // namespace

PrepareResult cmd_prepare_survival(const PrepareRequest& request) {
    std::ifstream in(request.input);
    if (!in) throw IoError("cannot open " + request.input.string());
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError("prepare-survival: empty input " + request.input.string());
    const auto header = split_csv_line(line);
    const std::size_t ci_diag = column_index(header, request.col_diagnosis, request.input.string());
    const std::size_t ci_end = column_index(header, request.col_end, request.input.string());
    const std::size_t ci_status = column_index(header, request.col_status, request.input.string());
    std::size_t ci_sex = 0;
    if (request.filter_sex)
        ci_sex = column_index(header, request.col_sex, request.input.string());

    std::ofstream out(request.output, std::ios::binary);
    if (!out) throw IoError("cannot open " + request.output.string());
    out << "z,delta\n";

    PrepareResult result;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ValidationError("prepare-survival: row " + std::to_string(lineno) + " has " +
                                  std::to_string(fields.size()) + " fields, header has " +
                                  std::to_string(header.size()));
        if (request.filter_sex && fields[ci_sex] != *request.filter_sex) continue;
        const long d0 = parse_iso_date(fields[ci_diag], lineno, "diagnosis");
        const long d1 = parse_iso_date(fields[ci_end], lineno, "end");
        const long z = d1 - d0;
        if (z <= 0)
            throw ValidationError("prepare-survival: nonpositive duration at row " +
                                  std::to_string(lineno));
        const std::string status = lower(fields[ci_status]);
        int delta;
        if (status == "dead")
            delta = 1;
        else if (status == "censored")
            delta = 0;
        else
            throw ValidationError("prepare-survival: unknown status token '" + fields[ci_status] +
                                  "' at row " + std::to_string(lineno) +
                                  " (want dead or censored)");
        out << z << ',' << delta << '\n';
        ++result.rows;
        result.events += static_cast<std::size_t>(delta);
    }
    if (!out) throw IoError("write failed for " + request.output.string());
    if (result.rows == 0)
        throw ValidationError("prepare-survival: no rows left after filtering");
    return result;
}

namespace {

TailCase tail_case_from_int(int c) {
    switch (c) {
        case 1: return TailCase::Case1;
        case 2: return TailCase::Case2;
        case 3: return TailCase::Case3;
    }
    throw ValidationError("analyze: --ci-case must be 1, 2 or 3");
}

}  // namespace

void cmd_analyze(const AnalysisRequest& request) {
    const CensoredSample sample = read_zdelta_csv_file(request.input);
    const SortedCensoredSample sorted = sort_sample(sample);
    const std::size_t n = sorted.n();
    if (n < 3) throw ValidationError("analyze: need at least 3 observations");

    const std::size_t k_min = request.k_min;
    const std::size_t k_max = request.k_max == 0 ? n - 2 : request.k_max;
    if (k_min < 1 || k_min > k_max || k_max > n - 2)
        throw ValidationError("analyze: need 1 <= k-min <= k-max <= n-2");
    for (double eps : request.eps_list)
        if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("analyze: eps outside (0,1)");

    std::error_code ec;
    std::filesystem::create_directories(request.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + request.out_dir.string());

    const PPolicy policy =
        request.fixed_p ? PPolicy::fixed_at(*request.fixed_p) : PPolicy::per_k();
    const double unit = request.years ? 365.25 : 1.0;

    // p-hat curve
    {
        std::ofstream f(request.out_dir / "phat.csv", std::ios::binary);
        if (!f) throw IoError("cannot open " + (request.out_dir / "phat.csv").string());
        f << "k,phat\n";
        for (std::size_t k = k_min; k <= k_max; ++k)
            f << k << ',' << format_double(uncensored_proportion(sorted, k)) << '\n';
        if (!f) throw IoError("write failed for phat.csv");
    }

    for (EstimatorKind kind : request.estimators) {
        const bool want_ci = request.ci_case.has_value();
        std::ofstream f(request.out_dir / ("gamma_" + std::string(to_string(kind)) + ".csv"),
                        std::ios::binary);
        if (!f) throw IoError("cannot open gamma csv");
        f << (want_ci ? "k,raw,adapted,ci_lower,ci_upper\n" : "k,raw,adapted\n");
        for (std::size_t k = k_min; k <= k_max; ++k) {
            double raw = 0.0;
            try {
                switch (kind) {
                    case EstimatorKind::Hill: raw = hill(sorted, k); break;
                    case EstimatorKind::Moment: raw = moment(sorted, k); break;
                    case EstimatorKind::UH: raw = uh(sorted, k); break;
                    case EstimatorKind::ML: raw = ml_estimator(sorted, k).gamma; break;
                }
            } catch (const ValidationError&) {
                continue;  // infeasible k omitted
            }
            double p, adapted;
            try {
                p = policy.resolve(sorted, k);
                adapted = adapt_to_censoring(raw, p);
            } catch (const ValidationError&) {
                continue;
            }
            f << k << ',' << format_double(raw) << ',' << format_double(adapted);
            if (want_ci) {
                try {
                    const TailCase tc = tail_case_from_int(*request.ci_case);
                    const double g1 = request.gamma1_hypothesis.value_or(adapted);
                    const double variance = variance_censored(kind, tc, g1, raw, p);
                    const auto [lo, hi] =
                        confidence_interval(adapted, k, variance, request.ci_level);
                    f << ',' << format_double(lo) << ',' << format_double(hi);
                } catch (const ValidationError&) {
                    f << ",,";  // CI infeasible at this k
                }
            }
            f << '\n';
        }
        if (!f) throw IoError("write failed for gamma csv");
    }

    for (EstimatorKind kind : request.estimators) {
        if (kind == EstimatorKind::Hill) continue;  // no quantile form
        for (double eps : request.eps_list) {
            const std::string name =
                "quantile_" + std::string(to_string(kind)) + "_" + format_eps(eps) + ".csv";
            std::ofstream f(request.out_dir / name, std::ios::binary);
            if (!f) throw IoError("cannot open " + name);
            f << "k,estimate\n";
            for (std::size_t k = k_min; k <= k_max; ++k) {
                try {
                    const QuantileEstimate q = extreme_quantile(sorted, k, eps, kind, policy);
                    f << k << ',' << format_double(q.value / unit) << '\n';
                } catch (const ValidationError&) {
                    continue;
                }
            }
            if (!f) throw IoError("write failed for " + name);
        }
    }
}

void cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                  int threads, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open " + config_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config: invalid JSON in " + config_path.string() + ": " + e.what());
    }
    SimConfig config = config_from_json(j);
    if (seed_override) config.seed = *seed_override;
    const SimSummary summary = run_study(config, threads);
    write_summary_files(summary, out_dir);
}

nlohmann::json cmd_truth(const nlohmann::json& pair_json) {
    const FamilyPair pair = pair_from_json(pair_json);
    const TruthValues t = truth_values(pair);
    TailCase tc;
    if (std::holds_alternative<BurrParams>(pair.f_spec))
        tc = TailCase::Case1;
    else if (std::holds_alternative<ReverseBurrParams>(pair.f_spec))
        tc = TailCase::Case2;
    else
        tc = TailCase::Case3;

    nlohmann::json out;
    out["case"] = static_cast<int>(tc);
    out["gamma1"] = t.gamma1;
    out["gamma2"] = t.gamma2;
    out["gamma"] = t.gamma;
    out["rho"] = t.rho;
    out["p"] = t.p;
    out["tau"] = t.tau_min ? nlohmann::json(*t.tau_min) : nlohmann::json();
    out["eta"] = t.eta ? nlohmann::json(*t.eta) : nlohmann::json();
    out["beta_coeff"] = t.beta_coeff ? nlohmann::json(*t.beta_coeff) : nlohmann::json();

    nlohmann::json variances;
    for (EstimatorKind kind : {EstimatorKind::Hill, EstimatorKind::Moment, EstimatorKind::UH,
                               EstimatorKind::ML}) {
        try {
            variances[to_string(kind)] = variance_censored(kind, tc, t.gamma1, t.gamma, t.p);
        } catch (const ValidationError&) {
            variances[to_string(kind)] = nullptr;
        }
    }
    out["variances"] = variances;
    return out;
}

}  // namespace evtc::cli
