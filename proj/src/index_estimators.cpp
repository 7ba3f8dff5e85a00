#include "evtc/index_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evtc/dmath.hpp"
#include "evtc/error.hpp"
#include "evtc/kernels.hpp"

namespace evtc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGammaFloor = -0.5 + 1e-6;
constexpr double kGammaCap = 5.0;
constexpr double kGammaZeroTol = 1e-10;  // |gamma| below this: exponential likelihood

// logs of the j largest observations, descending: out[i] = log Z_{n-i,n}
std::vector<double> tail_logs(const SortedCensoredSample& sorted, std::size_t count) {
    const std::size_t n = sorted.n();
    std::vector<double> vals(count);
    for (std::size_t i = 0; i < count; ++i) vals[i] = sorted.z(n - 1 - i);
    std::vector<double> out(count);
    kernels::active().log_array(vals.data(), out.data(), count);
    return out;
}

void check_k_range(std::size_t k, std::size_t n, std::size_t max_k, const char* who) {
    if (n < 2 || k < 1 || k > max_k)
        throw ValidationError(std::string(who) + ": k out of range");
}

}  // namespace

const char* to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Hill: return "hill";
        case EstimatorKind::Moment: return "moment";
        case EstimatorKind::UH: return "uh";
        case EstimatorKind::ML: return "ml";
    }
    return "?";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
    if (name == "hill") return EstimatorKind::Hill;
    if (name == "moment") return EstimatorKind::Moment;
    if (name == "uh") return EstimatorKind::UH;
    if (name == "ml") return EstimatorKind::ML;
    throw ValidationError("unknown estimator '" + name + "' (want hill, moment, uh, ml)");
}

double PPolicy::resolve(const SortedCensoredSample& sorted, std::size_t k) const {
    return fixed ? *fixed : uncensored_proportion(sorted, k);
}

RawTailMoments raw_log_moments(const SortedCensoredSample& sorted, std::size_t k) {
    const std::size_t n = sorted.n();
    check_k_range(k, n, n - 1, "log_moments");
    if (!(sorted.z(n - 1 - k) > 0.0))
        throw ValidationError("log_moments: threshold Z_{n-k,n} <= 0, logarithm undefined");
    const std::vector<double> logs = tail_logs(sorted, k + 1);
    double sum_d = 0.0, sum_d2 = 0.0;
    kernels::active().excess_moments(logs.data(), k, logs[k], &sum_d, &sum_d2);
    // excesses are nonnegative up to log rounding jitter; keep m1 >= 0 exact
    sum_d = std::max(0.0, sum_d);
    const double dk = static_cast<double>(k);
    return {k, sum_d / dk, sum_d2 / dk};
}

TailStatistics log_moments(const SortedCensoredSample& sorted, std::size_t k) {
    const RawTailMoments raw = raw_log_moments(sorted, k);
    if (!(raw.m2 > raw.m1 * raw.m1))
        throw ValidationError("log_moments: degenerate tail, all top log-excesses equal");
    const double s = 1.0 - 0.5 / (1.0 - raw.m1 * raw.m1 / raw.m2);
    return {k, raw.m1, raw.m2, s};
}

double hill(const SortedCensoredSample& sorted, std::size_t k) {
    return raw_log_moments(sorted, k).m1;
}

double moment(const SortedCensoredSample& sorted, std::size_t k) {
    const TailStatistics t = log_moments(sorted, k);
    return t.m1 + t.s;
}

double uh(const SortedCensoredSample& sorted, std::size_t k) {
    const std::size_t n = sorted.n();
    if (n < 3 || k < 1 || k > n - 2) throw ValidationError("uh: k out of range [1, n-2]");
    if (!(sorted.z(n - 2 - k) > 0.0))
        throw ValidationError("uh: Z_{n-k-1,n} <= 0, logarithm undefined");

    // logs of the k+2 largest, L[i] = log Z_{n-i,n}, i = 0..k+1
    const std::vector<double> logs = tail_logs(sorted, k + 2);
    // Hill values over i = 1..k+1 from prefix sums of the top logs
    std::vector<double> hills(k + 1);
    double prefix = 0.0;
    for (std::size_t i = 1; i <= k + 1; ++i) {
        prefix += logs[i - 1];
        hills[i - 1] = prefix / static_cast<double>(i) - logs[i];
        if (!(hills[i - 1] > 0.0))
            throw ValidationError("uh: nonpositive Hill value at i=" + std::to_string(i) +
                                  ", log UH undefined");
    }
    std::vector<double> log_hills(k + 1);
    kernels::active().log_array(hills.data(), log_hills.data(), k + 1);

    double acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) acc += logs[i] + log_hills[i - 1];
    return acc / static_cast<double>(k) - (logs[k + 1] + log_hills[k]);
}

double gpd_loglik(std::span<const double> exceedances, double gamma, double sigma) {
    if (exceedances.empty()) throw ValidationError("gpd_loglik: no exceedances");
    if (!(sigma > 0.0)) throw ValidationError("gpd_loglik: sigma must be positive");
    const double m = static_cast<double>(exceedances.size());
    if (std::abs(gamma) < kGammaZeroTol) {
        double se = 0.0;
        for (double e : exceedances) se += e;
        return -m * dmath::log(sigma) - se / sigma;
    }
    bool ok = true;
    const double s =
        kernels::active().sum_log1p_scaled(exceedances.data(), exceedances.size(), gamma / sigma, &ok);
    if (!ok) return -kInf;
    return -m * dmath::log(sigma) - (1.0 / gamma + 1.0) * s;
}

namespace {

// Profile log-likelihood at theta = gamma/sigma: gamma(theta) is the mean
// of log1p(theta e), sigma = gamma/theta, l = -m (log sigma + gamma + 1).
struct ProfilePoint {
    double loglik = -kInf;
    double gamma = 0.0;
};

ProfilePoint profile_at(std::span<const double> e, double theta, double mean_e) {
    const double m = static_cast<double>(e.size());
    if (theta == 0.0) return {-m * (dmath::log(mean_e) + 1.0), 0.0};
    bool ok = true;
    const double s = kernels::active().sum_log1p_scaled(e.data(), e.size(), theta, &ok);
    if (!ok) return {-kInf, 0.0};
    const double gamma = s / m;
    const double sigma = gamma / theta;
    if (!(sigma > 0.0) || !std::isfinite(sigma)) return {-kInf, gamma};
    return {-m * (dmath::log(sigma) + gamma + 1.0), gamma};
}

double gamma_of_theta(std::span<const double> e, double theta) {
    if (theta == 0.0) return 0.0;
    bool ok = true;
    const double s = kernels::active().sum_log1p_scaled(e.data(), e.size(), theta, &ok);
    return ok ? s / static_cast<double>(e.size()) : -kInf;
}

// theta with gamma(theta) == target, by bisection on the monotone gamma(.)
double solve_theta_for_gamma(std::span<const double> e, double lo, double hi, double target) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (gamma_of_theta(e, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

// Best sigma for a fixed gamma (used when the box maximum sits on the
// gamma floor or cap, off the profile curve): log-spaced scan plus
// golden-section refinement.
struct BoundaryBest {
    double loglik = -kInf;
    double sigma = 1.0;
    int evals = 0;
};

BoundaryBest boundary_search(std::span<const double> e, double gamma_fixed, double e_max,
                             double mean_e) {
    BoundaryBest out;
    const double sigma_lo =
        gamma_fixed < 0.0 ? -gamma_fixed * e_max * (1.0 + 1e-10) : mean_e * 1e-6;
    const double sigma_hi = std::max(mean_e, e_max) * 1e4;
    if (!(sigma_lo < sigma_hi)) return out;
    auto eval = [&](double sigma) {
        ++out.evals;
        return gpd_loglik(e, gamma_fixed, sigma);
    };
    const double lla = dmath::log(sigma_lo), llb = dmath::log(sigma_hi);
    const int points = 120;
    std::size_t best = 0;
    double best_ll = -kInf;
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) {
        grid[i] = dmath::exp(lla + (llb - lla) * i / (points - 1));
        const double ll = eval(grid[i]);
        if (ll > best_ll) {
            best_ll = ll;
            best = static_cast<std::size_t>(i);
        }
    }
    double a = grid[best > 0 ? best - 1 : best];
    double b = grid[best + 1 < grid.size() ? best + 1 : best];
    const double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    for (int it = 0; it < 90 && b - a > 0.0; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = eval(x1);
        }
    }
    out.sigma = f1 > f2 ? x1 : x2;
    out.loglik = std::max(f1, f2);
    if (best_ll > out.loglik) {
        out.sigma = grid[best];
        out.loglik = best_ll;
    }
    return out;
}

}  // namespace

GpdFit gpd_fit_ml(std::span<const double> exceedances) {
    const std::size_t m = exceedances.size();
    double e_max = -kInf;
    double e_sum = 0.0;
    for (double e : exceedances) {
        e_max = std::max(e_max, e);
        e_sum += e;
    }
    std::size_t distinct_positive = 0;
    {
        std::vector<double> s(exceedances.begin(), exceedances.end());
        std::sort(s.begin(), s.end());
        for (std::size_t i = 0; i < m; ++i)
            if (s[i] > 0.0 && (i == 0 || s[i] != s[i - 1])) ++distinct_positive;
    }
    if (distinct_positive < 2)
        throw ValidationError("gpd_fit_ml: need at least 2 distinct positive exceedances");
    const double mean_e = e_sum / static_cast<double>(m);

    int evals = 0;
    auto eval = [&](double theta) {
        ++evals;
        return profile_at(exceedances, theta, mean_e);
    };

    // theta domain: support bound on the left, gamma in (floor, cap]
    double theta_lo = -(1.0 - 1e-8) / e_max;
    bool floor_active = false;
    if (gamma_of_theta(exceedances, theta_lo) < kGammaFloor) {
        theta_lo = solve_theta_for_gamma(exceedances, theta_lo, 0.0, kGammaFloor);
        floor_active = true;
    }
    double theta_hi = 1.0 / mean_e;
    while (gamma_of_theta(exceedances, theta_hi) < kGammaCap && theta_hi < 1e15 / mean_e)
        theta_hi *= 4.0;
    bool cap_active = false;
    if (gamma_of_theta(exceedances, theta_hi) > kGammaCap) {
        theta_hi = solve_theta_for_gamma(exceedances, 0.0, theta_hi, kGammaCap);
        cap_active = true;
    }

    // bracket scan: log-spaced on each side of zero
    std::vector<double> grid;
    grid.reserve(201);
    const double tiny = 1e-9 / mean_e;
    const int side_points = 100;
    if (theta_lo < -tiny) {
        const double la = dmath::log(-theta_lo), lb = dmath::log(tiny);
        for (int i = 0; i < side_points; ++i)
            grid.push_back(-dmath::exp(la + (lb - la) * i / (side_points - 1)));
    }
    grid.push_back(0.0);
    if (theta_hi > tiny) {
        const double la = dmath::log(tiny), lb = dmath::log(theta_hi);
        for (int i = 0; i < side_points; ++i)
            grid.push_back(dmath::exp(la + (lb - la) * i / (side_points - 1)));
    }
    std::sort(grid.begin(), grid.end());

    std::size_t best = 0;
    double best_ll = -kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ll = eval(grid[i]).loglik;
        if (ll > best_ll) {
            best_ll = ll;
            best = i;
        }
    }

    // golden-section refinement inside the bracketing neighbours
    double a = grid[best > 0 ? best - 1 : best];
    double b = grid[best + 1 < grid.size() ? best + 1 : best];
    const double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = eval(x1).loglik;
    double f2 = eval(x2).loglik;
    for (int it = 0; it < 90 && b - a > 0.0; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = eval(x2).loglik;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = eval(x1).loglik;
        }
    }
    double theta_best = f1 > f2 ? x1 : x2;
    if (best_ll > std::max(f1, f2)) theta_best = grid[best];

    GpdFit fit;
    const ProfilePoint p = eval(theta_best);
    fit.gamma = theta_best == 0.0 ? 0.0 : p.gamma;
    fit.sigma = theta_best == 0.0 ? mean_e : fit.gamma / theta_best;
    fit.loglik = gpd_loglik(exceedances, fit.gamma, fit.sigma);

    bool pinned = false;
    // when the profile curve leaves the gamma box, the box maximum can sit
    // on the gamma boundary off the curve: line-search sigma there
    if (floor_active) {
        const BoundaryBest fb = boundary_search(exceedances, kGammaFloor, e_max, mean_e);
        evals += fb.evals;
        if (fb.loglik > fit.loglik) {
            fit.gamma = kGammaFloor;
            fit.sigma = fb.sigma;
            fit.loglik = fb.loglik;
            pinned = true;
        }
    }
    if (cap_active) {
        const BoundaryBest cb = boundary_search(exceedances, kGammaCap, e_max, mean_e);
        evals += cb.evals;
        if (cb.loglik > fit.loglik) {
            fit.gamma = kGammaCap;
            fit.sigma = cb.sigma;
            fit.loglik = cb.loglik;
            pinned = true;
        }
    }

    fit.iterations = evals;
    pinned = pinned || (floor_active && fit.gamma <= kGammaFloor + 1e-9) ||
             (cap_active && fit.gamma >= kGammaCap - 1e-9);
    fit.converged = std::isfinite(fit.loglik) && !pinned;
    return fit;
}

GpdFit ml_estimator(const SortedCensoredSample& sorted, std::size_t k) {
    const std::size_t n = sorted.n();
    if (n < 3 || k < 2 || k > n - 1) throw ValidationError("ml_estimator: k out of range [2, n-1]");
    const double threshold = sorted.z(n - 1 - k);
    std::vector<double> exceedances(k);
    for (std::size_t j = 1; j <= k; ++j) exceedances[j - 1] = sorted.top(j) - threshold;
    return gpd_fit_ml(exceedances);
}

double adapt_to_censoring(double raw_estimate, double p_hat) {
    if (p_hat == 0.0)
        throw ValidationError("adapt_to_censoring: no uncensored observations among top k");
    if (!(p_hat > 0.0)) throw ValidationError("adapt_to_censoring: p_hat must be positive");
    return raw_estimate / p_hat;
}

EstimateCurve estimate_curve(const SortedCensoredSample& sorted, EstimatorKind kind,
                             std::size_t k_min, std::size_t k_max, const PPolicy& p_policy) {
    const std::size_t n = sorted.n();
    if (k_min < 1 || k_min > k_max || k_max > n - 2)
        throw ValidationError("estimate_curve: need 1 <= k_min <= k_max <= n-2");
    EstimateCurve curve;
    curve.kind = kind;
    curve.adapted = !(p_policy.fixed && *p_policy.fixed == 1.0);
    for (std::size_t k = k_min; k <= k_max; ++k) {
        try {
            double raw = 0.0;
            switch (kind) {
                case EstimatorKind::Hill: raw = hill(sorted, k); break;
                case EstimatorKind::Moment: raw = moment(sorted, k); break;
                case EstimatorKind::UH: raw = uh(sorted, k); break;
                case EstimatorKind::ML: raw = ml_estimator(sorted, k).gamma; break;
            }
            const double p = p_policy.resolve(sorted, k);
            curve.points.push_back({k, adapt_to_censoring(raw, p)});
        } catch (const ValidationError& err) {
            curve.skipped.push_back({k, err.what()});
        }
    }
    if (curve.points.empty())
        throw ValidationError("estimate_curve: no feasible k in the requested range");
    return curve;
}

}  // namespace evtc
