#pragma once

// Tail-case classification, the limiting mean/variance of the adapted
// estimators, the second-order b(x) and rho-tilde tables, and Wald
// confidence intervals.

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>

#include "evtc/index_estimators.hpp"

namespace evtc {

enum class TailCase { Case1 = 1, Case2 = 2, Case3 = 3 };

// Second-order description of the combined tail quantile function.
struct SecondOrderParams {
    double gamma = 0.0;     // index of the observed-minimum tail
    double rho = 0.0;       // second-order parameter, <= 0
    double a_coeff = 1.0;   // A != 0
    double ell_plus = 1.0;  // > 0
    double d_shift = 0.0;   // D
    double tau_h = 0.0;     // right endpoint, used only for gamma < 0 branches
    std::function<double(double)> l2;  // required only on the gamma == -rho branch
};

struct AsymptoticLaw {
    double mean = 0.0;      // asymptotic mean of sqrt(k) (gamma-hat - gamma1)
    double variance = 1.0;  // asymptotic variance, > 0
    EstimatorKind kind = EstimatorKind::Hill;
    TailCase tail_case = TailCase::Case1;
};

// Extra inputs some bias branches need; see bias_mu.
struct BiasExtras {
    std::optional<double> gamma;     // combined index
    std::optional<double> rho;       // second-order parameter
    std::optional<double> a_coeff;   // A
    std::optional<double> ell_plus;  // l+
    std::optional<double> tau_h;     // right endpoint
};

// Both indices positive: case 1; both negative with equal endpoints:
// case 2; both zero: case 3 (infinite endpoints assumed). Anything else
// is outside the supported configurations and errors.
TailCase classify_case(double gamma1, double gamma2, bool endpoints_equal);

// gamma1 gamma2 / (gamma1 + gamma2); zero in case 3 by convention.
double combined_index(double gamma1, double gamma2, TailCase tail_case);

// gamma2 / (gamma1 + gamma2); case 3 requires the caller-supplied limit.
double limit_p(double gamma1, double gamma2, TailCase tail_case,
               std::optional<double> supplied_p = std::nullopt);

// The general limiting variance of the adapted estimator: the uncensored
// variance plus the censoring penalty, (sigma2 + gamma1^2 p (1-p)) / p^2.
double variance_combined(double sigma2_uncensored, double gamma1, double p);

// The per-estimator asymptotic variances. Hill requires case 1; ML
// requires gamma > -1/2.
double variance_censored(EstimatorKind kind, TailCase tail_case, double gamma1, double gamma,
                         double p);

// Asymptotic mean -gamma1 alpha2 / p + (alpha1 / p) * <branch coefficient>.
// Branch requirements: Hill and ML need extras.gamma (ML also rho and A);
// moment case 2 needs gamma and rho, and its rho == gamma branch also
// A, l+ and tau_H.
double bias_mu(EstimatorKind kind, TailCase tail_case, double alpha1, double alpha2, double p,
               double gamma1, double rho_tilde, const BiasExtras& extras = {});

// Convenience composer: bias_mu and variance_censored in one record.
AsymptoticLaw asymptotic_law(EstimatorKind kind, TailCase tail_case, double gamma1, double gamma,
                             double p, double alpha1, double alpha2, double rho_tilde,
                             const BiasExtras& extras = {});

// The three-branch rho-tilde table.
double rho_tilde(double gamma, double rho, double d_shift);

enum class BBranch {
    PowerDominant,       // 0 < -rho < gamma, or 0 < gamma < -rho with D == 0
    GammaEqualsMinusRho, // gamma == -rho > 0 (needs l2)
    ShiftDominant,       // 0 < gamma < -rho with D != 0
    GammaZero,           // gamma == 0: 1/log^2 x, carries no l+/D scale factor
    BelowRho,            // gamma < rho
    BetweenRhoAndZero,   // rho < gamma < 0
    GammaEqualsRho,      // gamma == rho < 0
};

BBranch b_branch(const SecondOrderParams& params);
double b_function(double x, const SecondOrderParams& params);

// gamma-hat -+ z_{(1+level)/2} sqrt(variance / k); bias is reported
// elsewhere, never subtracted.
std::pair<double, double> confidence_interval(double gamma_adapted, std::size_t k, double variance,
                                              double level);

}  // namespace evtc
