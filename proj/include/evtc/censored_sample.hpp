#pragma once

// Censored observations (z, delta), ordering, the uncensored fraction
// among the top k, and the Kaplan-Meier product-limit estimator.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace evtc {

struct CensoredObservation {
    double z = 0.0;  // observed time
    int delta = 0;   // 1 = event observed, 0 = right-censored
};

struct CensoredSample {
    std::vector<CensoredObservation> observations;
    std::size_t n() const { return observations.size(); }
};

// Order statistics of z with the induced censoring indicators. Ties place
// censored observations before events (standard product-limit convention),
// then keep input order.
class SortedCensoredSample {
public:
    SortedCensoredSample(std::vector<double> z_sorted, std::vector<std::uint8_t> delta_induced);

    std::size_t n() const { return z_.size(); }
    double z(std::size_t i) const { return z_[i]; }              // Z_{i+1,n}
    int delta(std::size_t i) const { return delta_[i]; }         // delta_[i+1,n]
    std::span<const double> z_values() const { return z_; }
    std::span<const std::uint8_t> deltas() const { return delta_; }

    // j-th largest observation, j = 1..n (Z_{n-j+1,n})
    double top(std::size_t j) const { return z_[z_.size() - j]; }

private:
    std::vector<double> z_;
    std::vector<std::uint8_t> delta_;
};

// Right-continuous step function: value(t) = values[i] for the largest
// jump_points[i] <= t, initial_value before the first jump.
struct StepFunction {
    std::vector<double> jump_points;  // strictly increasing
    std::vector<double> values;       // value at and after each jump
    double initial_value = 0.0;

    double operator()(double t) const;
};

// Validates rows (time, indicator). Throws ValidationError naming the
// offending row (1-based) on non-finite time, indicator outside {0,1},
// or empty input.
CensoredSample from_records(std::span<const std::pair<double, int>> rows);

// Reads a `z,delta` CSV (header required). Missing/extra fields or
// malformed numbers are hard errors reporting the row number.
CensoredSample read_zdelta_csv(std::istream& in, const std::string& source_name = "<stream>");
CensoredSample read_zdelta_csv_file(const std::filesystem::path& path);

SortedCensoredSample sort_sample(const CensoredSample& sample);

// (1/k) sum of the indicators attached to the k largest z's.
double uncensored_proportion(const SortedCensoredSample& sorted, std::size_t k);

// Kaplan-Meier estimate of the distribution function F. If the largest
// observation is censored the survival function keeps its last positive
// value. While no censoring has occurred yet the survival values are
// computed by the telescoped form (events-so-far over n), which is exact;
// from the first censored observation on, by the running product.
StepFunction kaplan_meier(const SortedCensoredSample& sorted);

// 1 - F_km(Z_{n-k,n}), right-continuous evaluation; requires 1 <= k <= n-1.
double km_survival_at_threshold(const SortedCensoredSample& sorted, std::size_t k);

}  // namespace evtc
