#pragma once

// Censoring-adapted scale estimators and the extreme quantile estimator
// built from threshold + scale * pareto growth of the survival ratio.

#include <cstddef>

#include "evtc/censored_sample.hpp"
#include "evtc/index_estimators.hpp"

namespace evtc {

struct QuantileEstimate {
    EstimatorKind kind = EstimatorKind::Moment;  // Moment, UH or ML only
    std::size_t k = 0;
    double eps = 0.0;            // exceedance probability
    double value = 0.0;          // quantile estimate, input time units
    double scale = 0.0;          // adapted scale used
    double gamma_adapted = 0.0;  // adapted index used
};

// Z_{n-k,n} * m1 * (1 - s) / p_hat  (moment and UH kinds)
double scale_moment_uh(const SortedCensoredSample& sorted, std::size_t k, double p_hat);

// sigma-hat / p_hat  (ML kind)
double scale_ml(const GpdFit& fit, double p_hat);

// (u^gamma - 1) / gamma, log(u) when |gamma| < 1e-8; requires u > 0.
double pareto_growth(double u, double gamma);

// The extreme quantile estimate at exceedance probability eps. Hill is
// rejected (no quantile form for it here). When `ml_fit` is supplied for
// the ML kind the fit is reused instead of refitted.
QuantileEstimate extreme_quantile(const SortedCensoredSample& sorted, std::size_t k, double eps,
                                  EstimatorKind kind, const PPolicy& p_policy,
                                  const GpdFit* ml_fit = nullptr);

}  // namespace evtc
