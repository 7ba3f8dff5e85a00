#include "evtc/censored_sample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>

#include "evtc/error.hpp"

namespace evtc {

SortedCensoredSample::SortedCensoredSample(std::vector<double> z_sorted,
                                           std::vector<std::uint8_t> delta_induced)
    : z_(std::move(z_sorted)), delta_(std::move(delta_induced)) {
    if (z_.size() != delta_.size())
        throw ValidationError("sorted sample: z and delta lengths differ");
    if (z_.empty()) throw ValidationError("sorted sample: empty");
    for (std::size_t i = 1; i < z_.size(); ++i)
        if (z_[i] < z_[i - 1]) throw ValidationError("sorted sample: z not nondecreasing");
}

double StepFunction::operator()(double t) const {
    // last jump point <= t
    auto it = std::upper_bound(jump_points.begin(), jump_points.end(), t);
    if (it == jump_points.begin()) return initial_value;
    return values[static_cast<std::size_t>(it - jump_points.begin()) - 1];
}

CensoredSample from_records(std::span<const std::pair<double, int>> rows) {
    if (rows.empty()) throw ValidationError("from_records: empty input");
    CensoredSample s;
    s.observations.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [time, ind] = rows[i];
        if (!std::isfinite(time))
            throw ValidationError("from_records: non-finite time at row " + std::to_string(i + 1));
        if (ind != 0 && ind != 1)
            throw ValidationError("from_records: indicator outside {0,1} at row " +
                                  std::to_string(i + 1));
        s.observations.push_back({time, ind});
    }
    return s;
}

namespace {

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

double parse_double(const std::string& s, std::size_t row, const std::string& what) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ValidationError("csv: bad " + what + " at row " + std::to_string(row) + ": '" + s +
                              "'");
    }
    if (pos != s.size())
        throw ValidationError("csv: bad " + what + " at row " + std::to_string(row) + ": '" + s +
                              "'");
    return v;
}

}  // namespace

CensoredSample read_zdelta_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError("csv " + source_name + ": empty file");
    {
        auto header = split_csv_line(line);
        if (header.size() != 2 || header[0] != "z" || header[1] != "delta")
            throw ValidationError("csv " + source_name + ": expected header 'z,delta'");
    }
    std::vector<std::pair<double, int>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ValidationError("csv " + source_name + ": row " + std::to_string(lineno) +
                                  " has " + std::to_string(fields.size()) + " fields, want 2");
        const double z = parse_double(fields[0], lineno, "z");
        const double d = parse_double(fields[1], lineno, "delta");
        if (d != 0.0 && d != 1.0)
            throw ValidationError("csv " + source_name + ": delta outside {0,1} at row " +
                                  std::to_string(lineno));
        rows.emplace_back(z, static_cast<int>(d));
    }
    return from_records(rows);
}

CensoredSample read_zdelta_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_zdelta_csv(in, path.string());
}

SortedCensoredSample sort_sample(const CensoredSample& sample) {
    if (sample.n() == 0) throw ValidationError("sort_sample: empty sample");
    std::vector<std::size_t> order(sample.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& oa = sample.observations[a];
        const auto& ob = sample.observations[b];
        if (oa.z != ob.z) return oa.z < ob.z;
        return oa.delta < ob.delta;  // censored before events at tied times
    });
    std::vector<double> z(sample.n());
    std::vector<std::uint8_t> d(sample.n());
    for (std::size_t i = 0; i < order.size(); ++i) {
        z[i] = sample.observations[order[i]].z;
        d[i] = static_cast<std::uint8_t>(sample.observations[order[i]].delta);
    }
    return SortedCensoredSample(std::move(z), std::move(d));
}

double uncensored_proportion(const SortedCensoredSample& sorted, std::size_t k) {
    const std::size_t n = sorted.n();
    if (k < 1 || k > n)
        throw ValidationError("uncensored_proportion: k out of range [1, n]");
    std::size_t events = 0;
    for (std::size_t j = 1; j <= k; ++j) events += static_cast<std::size_t>(sorted.delta(n - j));
    return static_cast<double>(events) / static_cast<double>(k);
}

StepFunction kaplan_meier(const SortedCensoredSample& sorted) {
    const std::size_t n = sorted.n();
    StepFunction f;
    f.initial_value = 0.0;

    double survival = 1.0;
    std::size_t cum_events = 0;
    bool censoring_seen = false;  // any censored observation strictly before this time
    std::size_t i = 0;
    while (i < n) {
        const double t = sorted.z(i);
        const std::size_t at_risk = n - i;  // includes observations censored at t
        std::size_t d = 0, group_size = 0;
        while (i < n && sorted.z(i) == t) {
            d += static_cast<std::size_t>(sorted.delta(i));
            ++group_size;
            ++i;
        }
        cum_events += d;
        if (d > 0) {
            double value;
            if (!censoring_seen) {
                // the product telescopes: evaluate the cancelled form, which is
                // exact and reduces to the ECDF on uncensored data
                survival = static_cast<double>(n - cum_events) / static_cast<double>(n);
                value = static_cast<double>(cum_events) / static_cast<double>(n);
            } else {
                survival *= static_cast<double>(at_risk - d) / static_cast<double>(at_risk);
                value = 1.0 - survival;
            }
            f.jump_points.push_back(t);
            f.values.push_back(value);
        }
        if (group_size > d) censoring_seen = true;
    }
    return f;
}

double km_survival_at_threshold(const SortedCensoredSample& sorted, std::size_t k) {
    const std::size_t n = sorted.n();
    if (n < 2 || k < 1 || k > n - 1)
        throw ValidationError("km_survival_at_threshold: k out of range [1, n-1]");
    const StepFunction f = kaplan_meier(sorted);
    return 1.0 - f(sorted.z(n - 1 - k));
}

}  // namespace evtc
