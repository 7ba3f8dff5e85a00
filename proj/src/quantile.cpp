#include "evtc/quantile.hpp"

#include <cmath>

#include "evtc/dmath.hpp"
#include "evtc/error.hpp"

namespace evtc {

double scale_moment_uh(const SortedCensoredSample& sorted, std::size_t k, double p_hat) {
    if (!(p_hat > 0.0)) throw ValidationError("scale_moment_uh: p_hat must be positive");
    const TailStatistics t = log_moments(sorted, k);
    const double threshold = sorted.z(sorted.n() - 1 - k);
    return threshold * t.m1 * (1.0 - t.s) / p_hat;
}

double scale_ml(const GpdFit& fit, double p_hat) {
    if (!(p_hat > 0.0)) throw ValidationError("scale_ml: p_hat must be positive");
    return fit.sigma / p_hat;
}

double pareto_growth(double u, double gamma) {
    if (!(u > 0.0)) throw ValidationError("pareto_growth: ratio must be positive");
    if (std::abs(gamma) < 1e-8) return dmath::log(u);
    // expm1 keeps the value continuous across the switch: u^g - 1 loses all
    // precision when g log u is tiny
    return dmath::expm1(gamma * dmath::log(u)) / gamma;
}

QuantileEstimate extreme_quantile(const SortedCensoredSample& sorted, std::size_t k, double eps,
                                  EstimatorKind kind, const PPolicy& p_policy,
                                  const GpdFit* ml_fit) {
    if (kind == EstimatorKind::Hill)
        throw ValidationError("extreme_quantile: Hill kind has no quantile estimator here "
                              "(only moment, uh, ml)");
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("extreme_quantile: eps outside (0,1)");

    const std::size_t n = sorted.n();
    const double p_hat = p_policy.resolve(sorted, k);

    double raw_gamma, scale;
    if (kind == EstimatorKind::ML) {
        GpdFit local;
        if (ml_fit == nullptr) {
            local = ml_estimator(sorted, k);
            ml_fit = &local;
        }
        raw_gamma = ml_fit->gamma;
        scale = scale_ml(*ml_fit, p_hat);
    } else {
        raw_gamma = kind == EstimatorKind::Moment ? moment(sorted, k) : uh(sorted, k);
        scale = scale_moment_uh(sorted, k, p_hat);
    }
    const double gamma_adapted = adapt_to_censoring(raw_gamma, p_hat);

    const double survival = km_survival_at_threshold(sorted, k);
    if (!(survival > 0.0))
        throw ValidationError("extreme_quantile: Kaplan-Meier survival vanishes at the threshold");

    const double threshold = sorted.z(n - 1 - k);
    QuantileEstimate q;
    q.kind = kind;
    q.k = k;
    q.eps = eps;
    q.scale = scale;
    q.gamma_adapted = gamma_adapted;
    q.value = threshold + scale * pareto_growth(survival / eps, gamma_adapted);
    return q;
}

}  // namespace evtc
