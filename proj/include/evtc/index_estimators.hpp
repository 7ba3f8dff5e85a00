#pragma once

// The four extreme-value-index estimators on the observed (z) sample and
// the censoring adaptation gamma / p-hat.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtc/censored_sample.hpp"

namespace evtc {

enum class EstimatorKind { Hill, Moment, UH, ML };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& name);

// First and second log-moments of the k excesses over log Z_{n-k,n}.
struct RawTailMoments {
    std::size_t k = 0;
    double m1 = 0.0;
    double m2 = 0.0;
};

struct TailStatistics {
    std::size_t k = 0;
    double m1 = 0.0;
    double m2 = 0.0;
    double s = 0.0;  // 1 - (1/2) / (1 - m1^2/m2); defined because m2 > m1^2
};

struct GpdFit {
    double gamma = 0.0;
    double sigma = 1.0;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct CurvePoint {
    std::size_t k;
    double value;
};

struct SkippedPoint {
    std::size_t k;
    std::string reason;
};

struct EstimateCurve {
    EstimatorKind kind = EstimatorKind::Hill;
    bool adapted = true;
    std::vector<CurvePoint> points;    // k strictly increasing, feasible k only
    std::vector<SkippedPoint> skipped; // infeasible k, with the cause
};

// p policy shared by curves and quantiles: a fixed constant, or the per-k
// uncensored fraction when empty.
struct PPolicy {
    std::optional<double> fixed;

    static PPolicy per_k() { return {}; }
    static PPolicy fixed_at(double v) { return {v}; }
    double resolve(const SortedCensoredSample& sorted, std::size_t k) const;
};

// Requires 1 <= k <= n-1 and Z_{n-k,n} > 0; no degeneracy check.
RawTailMoments raw_log_moments(const SortedCensoredSample& sorted, std::size_t k);

// As raw_log_moments but errors when m2 <= m1^2 (all top values equal).
TailStatistics log_moments(const SortedCensoredSample& sorted, std::size_t k);

double hill(const SortedCensoredSample& sorted, std::size_t k);
double moment(const SortedCensoredSample& sorted, std::size_t k);
double uh(const SortedCensoredSample& sorted, std::size_t k);

// Generalized Pareto log-likelihood of the exceedances. Returns -inf when
// some 1 + gamma e / sigma <= 0; throws only on sigma <= 0 or empty input.
// |gamma| < 1e-10 evaluates the exponential limit.
double gpd_loglik(std::span<const double> exceedances, double gamma, double sigma);

// Profile-likelihood ML fit over theta = gamma/sigma (bracket scan plus
// golden-section refinement). gamma restricted to (-0.5 + 1e-6, 5]; fits
// pinned at either end return converged = false.
GpdFit gpd_fit_ml(std::span<const double> exceedances);

// GPD fit to the k exceedances above Z_{n-k,n}; requires 2 <= k <= n-1.
GpdFit ml_estimator(const SortedCensoredSample& sorted, std::size_t k);

// gamma-hat / p-hat; errors when p_hat <= 0.
double adapt_to_censoring(double raw_estimate, double p_hat);

// One adapted estimate per feasible k in [k_min, k_max]; infeasible k are
// reported in `skipped`. Errors if no k is feasible.
EstimateCurve estimate_curve(const SortedCensoredSample& sorted, EstimatorKind kind,
                             std::size_t k_min, std::size_t k_max, const PPolicy& p_policy);

}  // namespace evtc
