#include "evtc/model_families.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "evtc/dmath.hpp"
#include "evtc/error.hpp"
#include "evtc/kernels.hpp"
#include "evtc/rng.hpp"

namespace evtc {

namespace {

void check_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(std::string("family parameter ") + what + " must be positive");
}

void validate_family(const FamilySpec& spec) {
    if (const auto* b = std::get_if<BurrParams>(&spec)) {
        check_positive(b->beta, "beta");
        check_positive(b->tau, "tau");
        check_positive(b->lambda, "lambda");
    } else if (const auto* r = std::get_if<ReverseBurrParams>(&spec)) {
        check_positive(r->beta, "beta");
        check_positive(r->tau, "tau");
        check_positive(r->lambda, "lambda");
        check_positive(r->x_plus, "x_plus");
    }
}

}  // namespace

double burr_survival(const BurrParams& p, double x) {
    if (x < 0.0) throw ValidationError("burr_survival: x must be >= 0");
    return dmath::pow(p.beta / (p.beta + dmath::pow(x, p.tau)), p.lambda);
}

double burr_density(const BurrParams& p, double x) {
    if (x < 0.0) throw ValidationError("burr_density: x must be >= 0");
    return p.lambda * p.tau * dmath::pow(p.beta, p.lambda) * dmath::pow(x, p.tau - 1.0) *
           dmath::pow(p.beta + dmath::pow(x, p.tau), -p.lambda - 1.0);
}

double burr_quantile(const BurrParams& p, double u) {
    if (!(u >= 0.0 && u < 1.0)) throw ValidationError("burr_quantile: u outside [0,1)");
    const double w = dmath::log1p(-u);
    const double t = dmath::exp(-(w / p.lambda));
    const double z = p.beta * (t - 1.0);
    return dmath::exp(dmath::log(z) / p.tau);
}

double reverse_burr_survival(const ReverseBurrParams& p, double x) {
    if (x >= p.x_plus) throw ValidationError("reverse_burr_survival: x must be below x_plus");
    return dmath::pow(p.beta / (p.beta + dmath::pow(p.x_plus - x, -p.tau)), p.lambda);
}

double reverse_burr_density(const ReverseBurrParams& p, double x) {
    if (x >= p.x_plus) throw ValidationError("reverse_burr_density: x must be below x_plus");
    const double g = p.x_plus - x;
    return p.lambda * p.tau * dmath::pow(p.beta, p.lambda) * dmath::pow(g, -p.tau - 1.0) *
           dmath::pow(p.beta + dmath::pow(g, -p.tau), -p.lambda - 1.0);
}

double reverse_burr_quantile(const ReverseBurrParams& p, double u) {
    if (!(u >= 0.0 && u < 1.0)) throw ValidationError("reverse_burr_quantile: u outside [0,1)");
    const double w = dmath::log1p(-u);
    const double t = dmath::exp(-(w / p.lambda));
    const double z = p.beta * (t - 1.0);
    return p.x_plus - dmath::exp(-(dmath::log(z) / p.tau));
}

double logistic_survival(double x) {
    if (x < 0.0) throw ValidationError("logistic_survival: x must be >= 0");
    const double t = dmath::exp(-x);
    return 2.0 * t / (t + 1.0);
}

double logistic_density(double x) {
    if (x < 0.0) throw ValidationError("logistic_density: x must be >= 0");
    const double t = dmath::exp(-x);
    return 2.0 * t / ((1.0 + t) * (1.0 + t));
}

double logistic_quantile(double u) {
    if (!(u >= 0.0 && u < 1.0)) throw ValidationError("logistic_quantile: u outside [0,1)");
    return dmath::log((1.0 + u) / (1.0 - u));
}

double family_survival(const FamilySpec& spec, double x) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BurrParams>) return burr_survival(p, x);
            else if constexpr (std::is_same_v<T, ReverseBurrParams>) return reverse_burr_survival(p, x);
            else return logistic_survival(x);
        },
        spec);
}

double family_density(const FamilySpec& spec, double x) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BurrParams>) return burr_density(p, x);
            else if constexpr (std::is_same_v<T, ReverseBurrParams>) return reverse_burr_density(p, x);
            else return logistic_density(x);
        },
        spec);
}

double family_quantile(const FamilySpec& spec, double u) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BurrParams>) return burr_quantile(p, u);
            else if constexpr (std::is_same_v<T, ReverseBurrParams>) return reverse_burr_quantile(p, u);
            else return logistic_quantile(u);
        },
        spec);
}

void validate_pair(const FamilyPair& pair) {
    validate_family(pair.f_spec);
    validate_family(pair.g_spec);
    if (pair.f_spec.index() != pair.g_spec.index())
        throw ValidationError("family pair: both marginals must be from the same family class");
    if (const auto* rf = std::get_if<ReverseBurrParams>(&pair.f_spec)) {
        const auto& rg = std::get<ReverseBurrParams>(pair.g_spec);
        if (rf->x_plus != rg.x_plus)
            throw ValidationError("family pair: reverse-Burr marginals must share x_plus");
    }
}

TruthValues truth_values(const FamilyPair& pair) {
    validate_pair(pair);
    TruthValues t;
    if (const auto* bf = std::get_if<BurrParams>(&pair.f_spec)) {
        const auto& bg = std::get<BurrParams>(pair.g_spec);
        t.gamma1 = 1.0 / (bf->lambda * bf->tau);
        t.gamma2 = 1.0 / (bg.lambda * bg.tau);
        t.gamma = 1.0 / (bf->lambda * bf->tau + bg.lambda * bg.tau);
        t.p = t.gamma2 / (t.gamma1 + t.gamma2);
        const double tau = std::min(bf->tau, bg.tau);
        t.tau_min = tau;
        t.rho = -t.gamma * tau;
        if (bf->tau < bg.tau) {
            t.eta = bf->lambda * bf->beta;
            t.beta_coeff = -bf->beta;
        } else if (bf->tau > bg.tau) {
            t.eta = bg.lambda * bg.beta;
            t.beta_coeff = bg.beta;
        } else {
            t.eta = bf->lambda * bf->beta + bg.lambda * bg.beta;
            t.beta_coeff = bg.beta - bf->beta;
        }
    } else if (const auto* rf = std::get_if<ReverseBurrParams>(&pair.f_spec)) {
        const auto& rg = std::get<ReverseBurrParams>(pair.g_spec);
        t.gamma1 = -1.0 / (rf->lambda * rf->tau);
        t.gamma2 = -1.0 / (rg.lambda * rg.tau);
        t.gamma = -1.0 / (rf->lambda * rf->tau + rg.lambda * rg.tau);
        t.p = t.gamma2 / (t.gamma1 + t.gamma2);
        const double tau = std::min(rf->tau, rg.tau);
        t.tau_min = tau;
        t.rho = t.gamma * tau;
        if (rf->tau < rg.tau) {
            t.eta = rf->lambda * rf->beta;
            t.beta_coeff = -rf->beta;
        } else if (rf->tau > rg.tau) {
            t.eta = rg.lambda * rg.beta;
            t.beta_coeff = rg.beta;
        } else {
            t.eta = rf->lambda * rf->beta + rg.lambda * rg.beta;
            t.beta_coeff = rg.beta - rf->beta;
        }
    } else {
        // logistic pair: light tails, even censoring; rho from the combined
        // tail quantile expansion
        t.gamma1 = t.gamma2 = t.gamma = 0.0;
        t.p = 0.5;
        t.rho = -0.5;
    }
    return t;
}

double p_of_z(const FamilyPair& pair, double z) {
    validate_pair(pair);
    const double num = family_survival(pair.g_spec, z) * family_density(pair.f_spec, z);
    const double other = family_survival(pair.f_spec, z) * family_density(pair.g_spec, z);
    const double denom = num + other;
    if (denom == 0.0)
        throw ValidationError("p_of_z: z outside the interior of the common support");
    return num / denom;
}

void family_quantile_batch(const FamilySpec& spec, std::span<const double> u,
                           std::span<double> out) {
    const std::size_t n = u.size();
    if (out.size() != n) throw ValidationError("family_quantile_batch: size mismatch");
    const auto& ops = kernels::active();
    if (const auto* b = std::get_if<BurrParams>(&spec)) {
        std::vector<double> tmp(n), tmp2(n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = -u[i];
        ops.log1p_array(tmp.data(), tmp.data(), n);                       // w = log1p(-u)
        for (std::size_t i = 0; i < n; ++i) tmp[i] = -(tmp[i] / b->lambda);
        ops.exp_array(tmp.data(), tmp.data(), n);                         // t = (1-u)^{-1/lambda}
        for (std::size_t i = 0; i < n; ++i) tmp[i] = b->beta * (tmp[i] - 1.0);
        ops.log_array(tmp.data(), tmp2.data(), n);
        for (std::size_t i = 0; i < n; ++i) tmp2[i] = tmp2[i] / b->tau;
        ops.exp_array(tmp2.data(), out.data(), n);
    } else if (const auto* r = std::get_if<ReverseBurrParams>(&spec)) {
        std::vector<double> tmp(n), tmp2(n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = -u[i];
        ops.log1p_array(tmp.data(), tmp.data(), n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = -(tmp[i] / r->lambda);
        ops.exp_array(tmp.data(), tmp.data(), n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = r->beta * (tmp[i] - 1.0);
        ops.log_array(tmp.data(), tmp2.data(), n);
        for (std::size_t i = 0; i < n; ++i) tmp2[i] = -(tmp2[i] / r->tau);
        ops.exp_array(tmp2.data(), tmp2.data(), n);
        for (std::size_t i = 0; i < n; ++i) out[i] = r->x_plus - tmp2[i];
    } else {
        std::vector<double> tmp(n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = (1.0 + u[i]) / (1.0 - u[i]);
        ops.log_array(tmp.data(), out.data(), n);
    }
}

CensoredSample sample_censored(const FamilyPair& pair, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("sample_censored: n must be >= 1");
    validate_pair(pair);
    CounterRng rng(seed);
    std::vector<double> u1(n), u2(n);
    for (std::size_t i = 0; i < n; ++i) {
        u1[i] = rng.uniform(2 * i);
        u2[i] = rng.uniform(2 * i + 1);
    }
    std::vector<double> x(n), y(n);
    family_quantile_batch(pair.f_spec, u1, x);
    family_quantile_batch(pair.g_spec, u2, y);
    CensoredSample s;
    s.observations.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.observations[i].z = std::min(x[i], y[i]);
        s.observations[i].delta = x[i] <= y[i] ? 1 : 0;
    }
    return s;
}

namespace {

BiasTerms burr_like_bias(double gamma, double gamma1, double gamma2, double rho, double tau,
                         double eta, double beta_coeff, bool symmetric, double big_b,
                         EstimatorKind kind, double n, double k, bool reverse, double x_plus) {
    const double base_rho = std::sqrt(k) * dmath::pow(n / k, rho);
    BiasTerms out;

    if (!reverse) {
        double c;
        switch (kind) {
            case EstimatorKind::Hill: c = gamma * rho / (1.0 - rho); break;
            case EstimatorKind::ML:
                c = rho * (1.0 + gamma) * (gamma + rho) / ((1.0 - rho) * (1.0 - rho + gamma));
                break;
            default:  // moment and UH share the expression
                c = rho * (rho + gamma * (1.0 - rho)) / ((1.0 - rho) * (1.0 - rho));
                break;
        }
        out.gamma_term = -eta * dmath::pow(big_b, rho) * base_rho * c;
    } else {
        const double g = gamma;
        const double b_rho = dmath::pow(big_b, rho);
        const double base_gamma = std::sqrt(k) * dmath::pow(n / k, g);
        const double b_gamma = dmath::pow(big_b, g);
        switch (kind) {
            case EstimatorKind::UH:
                if (tau < 1.0)
                    out.gamma_term = -g * g * tau * (1.0 - g) * (1.0 + tau) /
                                     ((1.0 - g - g * tau) * (1.0 - g * tau)) * eta * b_rho *
                                     base_rho;
                else if (tau == 1.0)
                    out.gamma_term = g * g / ((1.0 - g) * (1.0 - 2.0 * g)) * b_rho *
                                     (-2.0 * eta * (1.0 - g) + 1.0 / x_plus) * base_rho;
                else
                    out.gamma_term =
                        g * g / ((1.0 - g) * (1.0 - 2.0 * g) * x_plus) * b_gamma * base_gamma;
                break;
            case EstimatorKind::Moment:
                if (tau < 1.0)
                    out.gamma_term = -g * g * tau * (1.0 - g) * (1.0 + tau) * (1.0 - 2.0 * g) /
                                     ((1.0 - g - g * tau) * (1.0 - 2.0 * g - g * tau)) * eta *
                                     b_rho * base_rho;
                else if (tau == 1.0)
                    out.gamma_term = -g * g / ((1.0 - g) * (1.0 - 3.0 * g)) * b_rho *
                                     (2.0 * eta * (1.0 - g) * (1.0 - g) - (g + 1.0) / x_plus) *
                                     base_rho;
                else
                    out.gamma_term = -g / ((1.0 - g) * x_plus) * b_gamma * base_gamma;
                break;
            case EstimatorKind::ML:
                if (!(g > -0.5))
                    throw ValidationError("theoretical_bias_example: ML requires gamma > -1/2");
                out.gamma_term = -g * g * tau * (1.0 + g) * (1.0 + tau) /
                                 ((1.0 - g * tau) * (1.0 + g - g * tau)) * eta * b_rho * base_rho;
                break;
            case EstimatorKind::Hill:
                throw ValidationError(
                    "theoretical_bias_example: Hill is unsupported for finite-endpoint pairs");
        }
    }

    if (symmetric) {
        // identical marginals: the expansion degenerates; the gamma biases dominate
        out.alpha2_term = 0.0;
        out.alpha2_exact = false;
    } else {
        out.alpha2_term = beta_coeff * (gamma * gamma / (gamma1 * gamma2)) *
                          dmath::pow(big_b, rho) / (1.0 - rho) * base_rho;
        out.alpha2_exact = true;
    }
    return out;
}

}  // namespace

BiasTerms theoretical_bias_example(const FamilyPair& pair, EstimatorKind kind, std::size_t n,
                                   std::size_t k) {
    validate_pair(pair);
    if (k < 1 || k >= n) throw ValidationError("theoretical_bias_example: need 1 <= k < n");
    const TruthValues t = truth_values(pair);
    const double dn = static_cast<double>(n), dk = static_cast<double>(k);

    if (std::holds_alternative<LogisticParams>(pair.f_spec)) {
        BiasTerms out;
        out.alpha2_term = 0.0;  // F == G exactly
        out.alpha2_exact = true;
        switch (kind) {
            case EstimatorKind::Moment:
            case EstimatorKind::UH: {
                const double l = dmath::log(dn / dk);
                out.gamma_term = std::sqrt(dk) / (l * l);
                return out;
            }
            case EstimatorKind::ML:
                out.gamma_term = -(1.0 / 9.0) * dk / std::sqrt(dn);
                return out;
            case EstimatorKind::Hill:
                throw ValidationError(
                    "theoretical_bias_example: Hill is unsupported for the logistic pair");
        }
    }

    if (const auto* bf = std::get_if<BurrParams>(&pair.f_spec)) {
        const auto& bg = std::get<BurrParams>(pair.g_spec);
        const bool symmetric = bf->tau == bg.tau && bf->beta == bg.beta;
        const double big_b =
            dmath::pow(bf->beta, bf->lambda) * dmath::pow(bg.beta, bg.lambda);
        return burr_like_bias(t.gamma, t.gamma1, t.gamma2, t.rho, *t.tau_min, *t.eta,
                              *t.beta_coeff, symmetric, big_b, kind, dn, dk, false, 0.0);
    }
    const auto& rf = std::get<ReverseBurrParams>(pair.f_spec);
    const auto& rg = std::get<ReverseBurrParams>(pair.g_spec);
    const bool symmetric = rf.tau == rg.tau && rf.beta == rg.beta;
    const double big_b = dmath::pow(rf.beta, rf.lambda) * dmath::pow(rg.beta, rg.lambda);
    return burr_like_bias(t.gamma, t.gamma1, t.gamma2, t.rho, *t.tau_min, *t.eta, *t.beta_coeff,
                          symmetric, big_b, kind, dn, dk, true, rf.x_plus);
}

namespace {

double get_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ValidationError(std::string("family json: missing numeric field '") + key + "'");
    return j[key].get<double>();
}

}  // namespace

FamilySpec family_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        throw ValidationError("family json: want an object with a 'family' string");
    const std::string fam = j["family"].get<std::string>();
    FamilySpec spec;
    if (fam == "burr") {
        spec = BurrParams{get_number(j, "beta"), get_number(j, "tau"), get_number(j, "lambda")};
    } else if (fam == "reverse_burr") {
        spec = ReverseBurrParams{get_number(j, "beta"), get_number(j, "tau"),
                                 get_number(j, "lambda"), get_number(j, "x_plus")};
    } else if (fam == "logistic") {
        spec = LogisticParams{};
    } else {
        throw ValidationError("family json: unknown family '" + fam +
                              "' (want burr, reverse_burr, logistic)");
    }
    validate_family(spec);
    return spec;
}

nlohmann::json family_to_json(const FamilySpec& spec) {
    nlohmann::json j;
    if (const auto* b = std::get_if<BurrParams>(&spec)) {
        j["family"] = "burr";
        j["beta"] = b->beta;
        j["tau"] = b->tau;
        j["lambda"] = b->lambda;
    } else if (const auto* r = std::get_if<ReverseBurrParams>(&spec)) {
        j["family"] = "reverse_burr";
        j["beta"] = r->beta;
        j["tau"] = r->tau;
        j["lambda"] = r->lambda;
        j["x_plus"] = r->x_plus;
    } else {
        j["family"] = "logistic";
    }
    return j;
}

FamilyPair pair_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("f") || !j.contains("g"))
        throw ValidationError("family pair json: want an object with 'f' and 'g'");
    FamilyPair pair{family_from_json(j["f"]), family_from_json(j["g"])};
    validate_pair(pair);
    return pair;
}

nlohmann::json pair_to_json(const FamilyPair& pair) {
    nlohmann::json j;
    j["f"] = family_to_json(pair.f_spec);
    j["g"] = family_to_json(pair.g_spec);
    return j;
}

}  // namespace evtc
