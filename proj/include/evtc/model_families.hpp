#pragma once

// The three closed-form model families used as simulation ground truth:
// Burr (heavy tail), reverse Burr (finite endpoint) and the logistic-type
// law on x > 0. Distribution functions, densities, quantiles, exact truth
// values, the conditional uncensored probability p(z), reproducible
// censored-pair samplers and the closed-form asymptotic-bias expressions.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>

#include <json.hpp>

#include "evtc/censored_sample.hpp"
#include "evtc/index_estimators.hpp"

namespace evtc {

struct BurrParams {
    double beta, tau, lambda;  // all > 0
};

struct ReverseBurrParams {
    double beta, tau, lambda, x_plus;  // all > 0
};

struct LogisticParams {};

using FamilySpec = std::variant<BurrParams, ReverseBurrParams, LogisticParams>;

struct FamilyPair {
    FamilySpec f_spec;  // lifetime X
    FamilySpec g_spec;  // censoring Y (same family class as f_spec)
};

struct TruthValues {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma = 0.0;
    double rho = 0.0;
    double p = 0.0;
    std::optional<double> tau_min;     // min(tau1, tau2), Burr families
    std::optional<double> eta;         // second-order coefficient table
    std::optional<double> beta_coeff;  // alpha2-term coefficient table
};

// survival 1-F, density f and quantile F^{-1} per family
double burr_survival(const BurrParams& p, double x);
double burr_density(const BurrParams& p, double x);
double burr_quantile(const BurrParams& p, double u);

double reverse_burr_survival(const ReverseBurrParams& p, double x);
double reverse_burr_density(const ReverseBurrParams& p, double x);
double reverse_burr_quantile(const ReverseBurrParams& p, double u);

double logistic_survival(double x);
double logistic_density(double x);
double logistic_quantile(double u);

// variant dispatchers
double family_survival(const FamilySpec& spec, double x);
double family_density(const FamilySpec& spec, double x);
double family_quantile(const FamilySpec& spec, double u);

// Errors unless both marginals are the same family class (reverse-Burr
// pairs must share x_plus).
void validate_pair(const FamilyPair& pair);

TruthValues truth_values(const FamilyPair& pair);

// P(delta = 1 | Z = z) from the closed-form densities.
double p_of_z(const FamilyPair& pair, double z);

// n censored pairs by inverse-CDF on counter-based uniforms; observation i
// consumes exactly uniforms 2i and 2i+1, so output is identical for
// identical (pair, n, seed) on any platform and any evaluation order.
CensoredSample sample_censored(const FamilyPair& pair, std::size_t n, std::uint64_t seed);

// Batch quantile transform used by the sampler (kernel-dispatched); equals
// the scalar quantile map bit for bit.
void family_quantile_batch(const FamilySpec& spec, std::span<const double> u, std::span<double> out);

// The closed-form asymptotic-equivalent bias of sqrt(k)(gamma-hat - gamma)
// at (n, k), and the alpha2-condition term, returned separately.
// alpha2_exact is false in the fully symmetric sub-case where the
// expansion degenerates and the term is reported as 0.
struct BiasTerms {
    double gamma_term = 0.0;
    double alpha2_term = 0.0;
    bool alpha2_exact = true;
};

BiasTerms theoretical_bias_example(const FamilyPair& pair, EstimatorKind kind, std::size_t n,
                                   std::size_t k);

// JSON (de)serialization: {"family":"burr","beta":..,"tau":..,"lambda":..},
// {"family":"reverse_burr",..,"x_plus":..}, {"family":"logistic"};
// pairs are {"f": <family>, "g": <family>}.
FamilySpec family_from_json(const nlohmann::json& j);
nlohmann::json family_to_json(const FamilySpec& spec);
FamilyPair pair_from_json(const nlohmann::json& j);
nlohmann::json pair_to_json(const FamilyPair& pair);

}  // namespace evtc
