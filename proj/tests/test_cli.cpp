#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evtc/asymptotics.hpp"
#include "evtc/censored_sample.hpp"
#include "evtc/cli.hpp"
#include "evtc/error.hpp"
#include "evtc/model_families.hpp"
#include "evtc/quantile.hpp"

using namespace evtc;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("evtc_cli_test_" + std::to_string(std::rand()) + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    f << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f);
    return std::string((std::istreambuf_iterator<char>(f)), {});
}

// parse a csv file into header + string cells
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Csv parse_csv(const fs::path& p) {
    Csv out;
    std::ifstream f(p);
    REQUIRE(f);
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        cells.push_back(cur);
        if (first) {
            out.header = cells;
            first = false;
        } else {
            out.rows.push_back(cells);
        }
    }
    return out;
}

const FamilyPair kExample1{BurrParams{10.0, 4.0, 1.0}, BurrParams{10.0, 1.0, 0.5}};

}  // namespace

TEST_CASE("cmd_prepare_survival") {
    TempDir tmp;
    write_file(tmp.path / "events.csv",
               "diagnosis,end,status,sex\n"
               "2000-01-01,2000-01-11,dead,M\n"
               "2000-02-01,2000-03-01,CENSORED,M\n"
               "1999-12-31,2000-01-05,Dead,F\n");
    cli::PrepareRequest req;
    req.input = tmp.path / "events.csv";
    req.output = tmp.path / "zdelta.csv";

    const auto all = cli::cmd_prepare_survival(req);
    CHECK(all.rows == 3);
    CHECK(all.events == 2);
    const Csv csv = parse_csv(req.output);
    REQUIRE(csv.rows.size() == 3);
    CHECK(csv.header == std::vector<std::string>{"z", "delta"});
    CHECK(csv.rows[0] == std::vector<std::string>{"10", "1"});  // date arithmetic
    CHECK(csv.rows[1] == std::vector<std::string>{"29", "0"});
    CHECK(csv.rows[2] == std::vector<std::string>{"5", "1"});

    // the written file parses back through the sample reader
    const auto sample = read_zdelta_csv_file(req.output);
    CHECK(sample.n() == 3);

    req.filter_sex = "M";
    const auto males = cli::cmd_prepare_survival(req);
    CHECK(males.rows == 2);
    CHECK(males.events == 1);

    // nonpositive duration
    write_file(tmp.path / "bad1.csv", "diagnosis,end,status\n2000-01-01,2000-01-01,censored\n");
    cli::PrepareRequest bad1;
    bad1.input = tmp.path / "bad1.csv";
    bad1.output = tmp.path / "out1.csv";
    CHECK_THROWS_WITH_AS(cli::cmd_prepare_survival(bad1), doctest::Contains("row 2"),
                         ValidationError);

    // unknown status token
    write_file(tmp.path / "bad2.csv", "diagnosis,end,status\n2000-01-01,2000-01-05,lost\n");
    cli::PrepareRequest bad2;
    bad2.input = tmp.path / "bad2.csv";
    bad2.output = tmp.path / "out2.csv";
    CHECK_THROWS_WITH_AS(cli::cmd_prepare_survival(bad2), doctest::Contains("status"),
                         ValidationError);

    // unparseable date
    write_file(tmp.path / "bad3.csv", "diagnosis,end,status\n2000-13-01,2000-01-05,dead\n");
    cli::PrepareRequest bad3;
    bad3.input = tmp.path / "bad3.csv";
    bad3.output = tmp.path / "out3.csv";
    CHECK_THROWS_AS(cli::cmd_prepare_survival(bad3), ValidationError);

    cli::PrepareRequest missing;
    missing.input = tmp.path / "nope.csv";
    missing.output = tmp.path / "out4.csv";
    CHECK_THROWS_AS(cli::cmd_prepare_survival(missing), IoError);
}

TEST_CASE("cmd_analyze on an uncensored toy file with fixed p = 1") {
    TempDir tmp;
    std::ostringstream data;
    data << "z,delta\n";
    std::mt19937_64 gen(3);
    auto unif = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 40; ++i) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", std::pow(1.0 - unif(), -0.4));
        data << buf << ",1\n";
    }
    write_file(tmp.path / "toy.csv", data.str());

    cli::AnalysisRequest req;
    req.input = tmp.path / "toy.csv";
    req.out_dir = tmp.path / "out";
    req.k_min = 2;
    req.k_max = 20;
    req.eps_list = {0.01};
    req.fixed_p = 1.0;
    cli::cmd_analyze(req);

    const Csv g = parse_csv(req.out_dir / "gamma_hill.csv");
    CHECK(g.header == std::vector<std::string>{"k", "raw", "adapted"});
    for (const auto& row : g.rows) CHECK(row[1] == row[2]);  // adaptation is the identity
}

TEST_CASE("cmd_analyze cells equal direct library calls") {
    TempDir tmp;
    std::ostringstream data;
    data << "z,delta\n";
    std::mt19937_64 gen(8);
    auto unif = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 20; ++i) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", std::pow(1.0 - unif(), -0.3));
        data << buf << ',' << (unif() < 0.75 ? 1 : 0) << '\n';
    }
    write_file(tmp.path / "syn.csv", data.str());

    cli::AnalysisRequest req;
    req.input = tmp.path / "syn.csv";
    req.out_dir = tmp.path / "out";
    req.k_min = 2;
    req.k_max = 18;
    req.eps_list = {0.005, 0.05};
    cli::cmd_analyze(req);

    const auto sample = read_zdelta_csv_file(req.input);
    const auto sorted = sort_sample(sample);

    auto num = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };

    const Csv ph = parse_csv(req.out_dir / "phat.csv");
    for (const auto& row : ph.rows) {
        const std::size_t k = std::stoul(row[0]);
        CHECK(num(row[1]) == uncensored_proportion(sorted, k));
    }
    const Csv gm = parse_csv(req.out_dir / "gamma_moment.csv");
    for (const auto& row : gm.rows) {
        const std::size_t k = std::stoul(row[0]);
        CHECK(num(row[1]) == moment(sorted, k));
        CHECK(num(row[2]) ==
              adapt_to_censoring(moment(sorted, k), uncensored_proportion(sorted, k)));
    }
    const Csv q = parse_csv(req.out_dir / "quantile_uh_0.005.csv");
    CHECK(!q.rows.empty());
    for (const auto& row : q.rows) {
        const std::size_t k = std::stoul(row[0]);
        const auto est = extreme_quantile(sorted, k, 0.005, EstimatorKind::UH, PPolicy::per_k());
        CHECK(num(row[1]) == est.value);
    }
    // second eps file exists as its own sibling
    CHECK(fs::exists(req.out_dir / "quantile_uh_0.05.csv"));

    // reruns are byte-identical
    cli::AnalysisRequest req2 = req;
    req2.out_dir = tmp.path / "out2";
    cli::cmd_analyze(req2);
    for (const char* name : {"phat.csv", "gamma_uh.csv", "quantile_ml_0.005.csv"})
        CHECK(read_file(req.out_dir / name) == read_file(req2.out_dir / name));
}

TEST_CASE("cmd_analyze years flag and ci columns") {
    TempDir tmp;
    std::ostringstream data;
    data << "z,delta\n";
    std::mt19937_64 gen(12);
    auto unif = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 60; ++i) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", 365.0 * std::pow(1.0 - unif(), -0.4));
        data << buf << ",1\n";
    }
    write_file(tmp.path / "d.csv", data.str());

    cli::AnalysisRequest req;
    req.input = tmp.path / "d.csv";
    req.out_dir = tmp.path / "plain";
    req.k_min = 5;
    req.k_max = 30;
    req.eps_list = {0.001};
    cli::cmd_analyze(req);

    cli::AnalysisRequest years = req;
    years.out_dir = tmp.path / "years";
    years.years = true;
    cli::cmd_analyze(years);

    auto num = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
    const Csv qp = parse_csv(req.out_dir / "quantile_moment_0.001.csv");
    const Csv qy = parse_csv(years.out_dir / "quantile_moment_0.001.csv");
    REQUIRE(qp.rows.size() == qy.rows.size());
    for (std::size_t i = 0; i < qp.rows.size(); ++i)
        CHECK(num(qy.rows[i][1]) == doctest::Approx(num(qp.rows[i][1]) / 365.25).epsilon(1e-12));
    // gamma columns are unit-free and identical
    CHECK(read_file(req.out_dir / "gamma_uh.csv") == read_file(years.out_dir / "gamma_uh.csv"));

    cli::AnalysisRequest ci = req;
    ci.out_dir = tmp.path / "ci";
    ci.ci_case = 1;
    ci.ci_level = 0.95;
    cli::cmd_analyze(ci);
    const auto sorted = sort_sample(read_zdelta_csv_file(req.input));
    const Csv gh = parse_csv(ci.out_dir / "gamma_hill.csv");
    CHECK(gh.header ==
          std::vector<std::string>{"k", "raw", "adapted", "ci_lower", "ci_upper"});
    for (const auto& row : gh.rows) {
        const std::size_t k = std::stoul(row[0]);
        const double raw = hill(sorted, k);
        const double adapted = adapt_to_censoring(raw, uncensored_proportion(sorted, k));
        const double var = variance_censored(EstimatorKind::Hill, TailCase::Case1, adapted, raw,
                                             uncensored_proportion(sorted, k));
        const auto [lo, hi] = confidence_interval(adapted, k, var, 0.95);
        CHECK(num(row[3]) == lo);
        CHECK(num(row[4]) == hi);
    }
}

TEST_CASE("cmd_truth") {
    const auto ex1 = cli::cmd_truth(pair_to_json(kExample1));
    CHECK(ex1["gamma1"].get<double>() == doctest::Approx(0.25));
    CHECK(ex1["gamma"].get<double>() == doctest::Approx(2.0 / 9.0));
    CHECK(ex1["p"].get<double>() == doctest::Approx(8.0 / 9.0));
    CHECK(ex1["variances"]["hill"].get<double>() == doctest::Approx(9.0 / 128.0));

    const auto ex3 = cli::cmd_truth(pair_to_json(FamilyPair{LogisticParams{}, LogisticParams{}}));
    CHECK(ex3["gamma1"].get<double>() == 0.0);
    CHECK(ex3["p"].get<double>() == 0.5);
    CHECK(ex3["variances"]["moment"].get<double>() == doctest::Approx(4.0));
    CHECK(ex3["variances"]["uh"].get<double>() == doctest::Approx(4.0));
    CHECK(ex3["variances"]["hill"].is_null());

    nlohmann::json mixed = {{"f", family_to_json(BurrParams{1, 1, 1})},
                            {"g", family_to_json(LogisticParams{})}};
    CHECK_THROWS_AS(cli::cmd_truth(mixed), ValidationError);
}

TEST_CASE("cmd_simulate writes deterministic outputs") {
    TempDir tmp;
    nlohmann::json cfg = {{"pair", pair_to_json(kExample1)},
                          {"n", 100},
                          {"reps", 5},
                          {"k_grid", {5, 10, 20}},
                          {"eps", 0.02},
                          {"seed", 9},
                          {"estimators", {"hill", "moment"}}};
    write_file(tmp.path / "cfg.json", cfg.dump());
    cli::cmd_simulate(tmp.path / "cfg.json", tmp.path / "o1");
    cli::cmd_simulate(tmp.path / "cfg.json", tmp.path / "o2", 2);
    for (const char* name : {"summary.csv", "quantile_summary.csv", "metadata.json"})
        CHECK(read_file(tmp.path / "o1" / name) == read_file(tmp.path / "o2" / name));

    const Csv sum = parse_csv(tmp.path / "o1" / "summary.csv");
    CHECK(sum.header ==
          std::vector<std::string>{"estimator", "k", "median", "mean", "mse", "failures"});
    CHECK(sum.rows.size() == 6);  // 2 estimators x 3 k

    // seed override produces a different (but still deterministic) study
    cli::cmd_simulate(tmp.path / "cfg.json", tmp.path / "o3", 1, 12345);
    CHECK(read_file(tmp.path / "o1" / "summary.csv") !=
          read_file(tmp.path / "o3" / "summary.csv"));

    write_file(tmp.path / "bad.json", "{ not json");
    CHECK_THROWS_AS(cli::cmd_simulate(tmp.path / "bad.json", tmp.path / "o4"), ValidationError);
    CHECK_THROWS_AS(cli::cmd_simulate(tmp.path / "missing.json", tmp.path / "o4"), IoError);
}

TEST_CASE("binary exit codes and smoke run") {
    const char* bin = std::getenv("EVTC_CLI_BIN");
    if (bin == nullptr) {
        MESSAGE("EVTC_CLI_BIN not set; binary smoke test skipped");
        return;
    }
    TempDir tmp;
    const std::string null_sink = " > /dev/null 2>&1";

    write_file(tmp.path / "pair.json", pair_to_json(kExample1).dump());
    const std::string truth_cmd =
        std::string(bin) + " truth --pair " + (tmp.path / "pair.json").string() + null_sink;
    CHECK(std::system(truth_cmd.c_str()) == 0);

    // validation error -> exit 1 (mixed-family pair)
    write_file(tmp.path / "mixed.json",
               "{\"f\":{\"family\":\"burr\",\"beta\":1,\"tau\":1,\"lambda\":1},"
               "\"g\":{\"family\":\"logistic\"}}");
    const std::string bad_cmd =
        std::string(bin) + " truth --pair " + (tmp.path / "mixed.json").string() + null_sink;
    CHECK(WEXITSTATUS(std::system(bad_cmd.c_str())) == 1);

    // io error -> exit 2
    const std::string io_cmd =
        std::string(bin) + " truth --pair " + (tmp.path / "absent.json").string() + null_sink;
    CHECK(WEXITSTATUS(std::system(io_cmd.c_str())) == 2);

    // analyze smoke run through the shell
    write_file(tmp.path / "z.csv", "z,delta\n1,1\n2,1\n3,1\n4,1\n5,1\n6,1\n7,1\n8,1\n");
    const std::string ana_cmd = std::string(bin) + " analyze --input " +
                                (tmp.path / "z.csv").string() + " --out-dir " +
                                (tmp.path / "ana").string() + " --k-min 2 --k-max 5 --eps 0.01" +
                                null_sink;
    CHECK(std::system(ana_cmd.c_str()) == 0);
    CHECK(fs::exists(tmp.path / "ana" / "phat.csv"));
}
