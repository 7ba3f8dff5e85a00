#include "evtc/asymptotics.hpp"

#include <cmath>

#include "evtc/dmath.hpp"
#include "evtc/error.hpp"

namespace evtc {

TailCase classify_case(double gamma1, double gamma2, bool endpoints_equal) {
    if (gamma1 > 0.0 && gamma2 > 0.0) return TailCase::Case1;
    if (gamma1 < 0.0 && gamma2 < 0.0) {
        if (!endpoints_equal)
            throw ValidationError(
                "classify_case: both indices negative but endpoints differ; outside the three "
                "supported cases");
        return TailCase::Case2;
    }
    if (gamma1 == 0.0 && gamma2 == 0.0) return TailCase::Case3;
    throw ValidationError("classify_case: configuration outside the three supported cases");
}

double combined_index(double gamma1, double gamma2, TailCase tail_case) {
    if (tail_case == TailCase::Case3) return 0.0;
    return gamma1 * gamma2 / (gamma1 + gamma2);
}

double limit_p(double gamma1, double gamma2, TailCase tail_case, std::optional<double> supplied_p) {
    if (tail_case == TailCase::Case3) {
        if (!supplied_p)
            throw ValidationError("limit_p: case 3 needs the caller-supplied limit p");
        return *supplied_p;
    }
    return gamma2 / (gamma1 + gamma2);
}

double variance_combined(double sigma2_uncensored, double gamma1, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw ValidationError("variance_combined: p outside (0,1]");
    if (sigma2_uncensored < 0.0)
        throw ValidationError("variance_combined: negative variance input");
    return (sigma2_uncensored + gamma1 * gamma1 * p * (1.0 - p)) / (p * p);
}

double variance_censored(EstimatorKind kind, TailCase tail_case, double gamma1, double gamma,
                         double p) {
    const double g = gamma, g1 = gamma1;
    switch (kind) {
        case EstimatorKind::Hill:
            if (tail_case != TailCase::Case1)
                throw ValidationError("variance_censored: Hill is available in case 1 only");
            return g1 * g1 * g1 / g;
        case EstimatorKind::Moment:
            switch (tail_case) {
                case TailCase::Case1: return g1 * g1 / (g * g) * (1.0 + g1 * g);
                case TailCase::Case2:
                    return g1 * g1 * (1.0 - g) * (1.0 - g) * (1.0 - 2.0 * g) *
                               (1.0 - g + 6.0 * g * g) /
                               (g * g * (1.0 - 4.0 * g) * (1.0 - 3.0 * g)) +
                           g1 * g1 * (g1 / g - 1.0);
                case TailCase::Case3: return 1.0 / (p * p);
            }
            break;
        case EstimatorKind::UH:
            switch (tail_case) {
                case TailCase::Case1: return g1 * g1 / (g * g) * (1.0 + g1 * g);
                case TailCase::Case2:
                    return g1 * g1 * (1.0 - g) * (1.0 + g + 2.0 * g * g) /
                               (g * g * (1.0 - 2.0 * g)) +
                           g1 * g1 * (g1 / g - 1.0);
                case TailCase::Case3: return 1.0 / (p * p);
            }
            break;
        case EstimatorKind::ML:
            if (!(g > -0.5))
                throw ValidationError("variance_censored: ML requires gamma > -1/2");
            return (1.0 + g * (2.0 + g1)) / (p * p);
    }
    throw ValidationError("variance_censored: unsupported combination");
}

namespace {

double require(const std::optional<double>& v, const char* what) {
    if (!v) throw ValidationError(std::string("bias_mu: missing extras.") + what);
    return *v;
}

}  // namespace

double bias_mu(EstimatorKind kind, TailCase tail_case, double alpha1, double alpha2, double p,
               double gamma1, double rho_tilde, const BiasExtras& extras) {
    if (!(p > 0.0)) throw ValidationError("bias_mu: p must be positive");
    const double common = -gamma1 * alpha2 / p;
    const double rt = rho_tilde;
    double coef;
    switch (kind) {
        case EstimatorKind::Hill: {
            if (tail_case != TailCase::Case1)
                throw ValidationError("bias_mu: Hill is available in case 1 only");
            const double g = require(extras.gamma, "gamma");
            coef = g / (rt + g * (1.0 - rt));
            break;
        }
        case EstimatorKind::Moment: {
            if (tail_case == TailCase::Case1) {
                coef = 1.0 / (1.0 - rt);
            } else if (tail_case == TailCase::Case3) {
                coef = 1.0;
            } else {
                const double g = require(extras.gamma, "gamma");
                const double rho = require(extras.rho, "rho");
                if (rho < g) {
                    coef = (2.0 * g - 1.0) / (rt * (1.0 - rt));
                } else if (rho == g) {
                    const double a = require(extras.a_coeff, "a_coeff");
                    const double lp = require(extras.ell_plus, "ell_plus");
                    const double th = require(extras.tau_h, "tau_h");
                    const double denom = a * (1.0 - g) - lp / th;
                    if (denom == 0.0)
                        throw ValidationError(
                            "bias_mu: moment case-2 rho==gamma branch undefined, "
                            "A(1-gamma) - l+/tau_H vanishes");
                    coef = (1.0 - 2.0 * g) / ((1.0 - g) * (1.0 - 3.0 * g)) *
                           (a * (1.0 - g) * (1.0 - g) - (g + 1.0) * lp / th) / denom;
                } else {  // gamma < rho
                    coef = (1.0 - 2.0 * g) / (1.0 - 2.0 * g - rt);
                }
            }
            break;
        }
        case EstimatorKind::UH:
            coef = 1.0 / (1.0 - rt);
            break;
        case EstimatorKind::ML: {
            const double g = require(extras.gamma, "gamma");
            if (!(g > -0.5)) throw ValidationError("bias_mu: ML requires gamma > -1/2");
            const double rho = require(extras.rho, "rho");
            const double a = require(extras.a_coeff, "a_coeff");
            coef = rho * (g + 1.0) * a / ((1.0 - rho) * (1.0 - rho + g));
            break;
        }
        default:
            throw ValidationError("bias_mu: unsupported kind");
    }
    return common + alpha1 / p * coef;
}

AsymptoticLaw asymptotic_law(EstimatorKind kind, TailCase tail_case, double gamma1, double gamma,
                             double p, double alpha1, double alpha2, double rho_tilde,
                             const BiasExtras& extras) {
    AsymptoticLaw law;
    law.kind = kind;
    law.tail_case = tail_case;
    law.variance = variance_censored(kind, tail_case, gamma1, gamma, p);
    law.mean = bias_mu(kind, tail_case, alpha1, alpha2, p, gamma1, rho_tilde, extras);
    return law;
}

double rho_tilde(double gamma, double rho, double d_shift) {
    if (rho > 0.0) throw ValidationError("rho_tilde: rho must be <= 0");
    if (gamma > 0.0 && gamma < -rho && d_shift != 0.0) return -gamma;
    if (rho <= gamma && gamma <= 0.0) return gamma;
    return rho;  // -rho <= gamma, or 0 < gamma < -rho with D == 0, or gamma < rho
}

BBranch b_branch(const SecondOrderParams& params) {
    const double g = params.gamma, rho = params.rho;
    if (rho > 0.0) throw ValidationError("b_function: rho must be <= 0");
    if (g > 0.0) {
        if (g > -rho) return BBranch::PowerDominant;
        if (g == -rho) return BBranch::GammaEqualsMinusRho;
        return params.d_shift != 0.0 ? BBranch::ShiftDominant : BBranch::PowerDominant;
    }
    if (g == 0.0) return BBranch::GammaZero;
    if (g < rho) return BBranch::BelowRho;
    if (g == rho) return BBranch::GammaEqualsRho;
    return BBranch::BetweenRhoAndZero;
}

double b_function(double x, const SecondOrderParams& params) {
    if (!(x > 0.0)) throw ValidationError("b_function: x must be positive");
    const double g = params.gamma, rho = params.rho, a = params.a_coeff;
    switch (b_branch(params)) {
        case BBranch::PowerDominant:
            if (g + rho == 0.0)
                throw ValidationError("b_function: power branch needs gamma != -rho");
            return a * rho * (rho + g * (1.0 - rho)) / ((g + rho) * (1.0 - rho)) *
                   dmath::pow(x, rho);
        case BBranch::GammaEqualsMinusRho: {
            if (!params.l2)
                throw ValidationError("b_function: gamma == -rho branch needs the L2 function");
            return -g * g * g / (1.0 + g) * dmath::pow(x, -g) * params.l2(x);
        }
        case BBranch::ShiftDominant:
            return -g * g * g * params.d_shift / (1.0 + g) * dmath::pow(x, -g);
        case BBranch::GammaZero: {
            const double lx = dmath::log(x);
            return 1.0 / (lx * lx);
        }
        case BBranch::BelowRho:
            return a * rho * (1.0 - g) / (1.0 - g - rho) * dmath::pow(x, rho);
        case BBranch::BetweenRhoAndZero:
            return -g / (1.0 - 2.0 * g) * (params.ell_plus / params.tau_h) * dmath::pow(x, g);
        case BBranch::GammaEqualsRho:
            return g / (1.0 - 2.0 * g) * (a * (1.0 - g) - params.ell_plus / params.tau_h) *
                   dmath::pow(x, g);
    }
    throw ValidationError("b_function: unreachable");
}

std::pair<double, double> confidence_interval(double gamma_adapted, std::size_t k, double variance,
                                              double level) {
    if (k < 1) throw ValidationError("confidence_interval: k must be >= 1");
    if (!(variance > 0.0)) throw ValidationError("confidence_interval: variance must be positive");
    if (!(level >= 0.0 && level < 1.0))
        throw ValidationError("confidence_interval: level outside [0,1)");
    const double z = dmath::normal_quantile(0.5 * (1.0 + level));
    const double hw = z * std::sqrt(variance / static_cast<double>(k));
    return {gamma_adapted - hw, gamma_adapted + hw};
}

}  // namespace evtc
