#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "evtc/censored_sample.hpp"
#include "evtc/error.hpp"
#include "evtc/quantile.hpp"

using namespace evtc;

namespace {

SortedCensoredSample sorted_from(std::vector<double> z, int delta = 1) {
    std::vector<std::pair<double, int>> rows;
    for (double v : z) rows.emplace_back(v, delta);
    return sort_sample(from_records(rows));
}

struct Uniform {
    std::mt19937_64 gen;
    explicit Uniform(std::uint64_t seed) : gen(seed) {}
    double operator()() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
};

}  // namespace

TEST_CASE("scale_moment_uh hand example") {
    const auto s = sorted_from({1.0, std::exp(1.0), std::exp(2.0)});
    CHECK(scale_moment_uh(s, 2, 1.0) == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(scale_moment_uh(s, 2, 0.5) == doctest::Approx(15.0).epsilon(1e-12));
    CHECK_THROWS_AS(scale_moment_uh(s, 2, 0.0), ValidationError);
}

TEST_CASE("scale_moment_uh matches an independent formula evaluation") {
    Uniform u(55);
    std::vector<double> z(200);
    for (auto& v : z) v = std::pow(1.0 - u(), -0.5);
    const auto s = sorted_from(z);
    std::vector<double> zs = z;
    std::sort(zs.begin(), zs.end());
    for (std::size_t k : {3u, 20u, 120u}) {
        const double thr = zs[zs.size() - 1 - k];
        long double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 1; i <= k; ++i) {
            const long double d = std::log(zs[zs.size() - i]) - std::log(thr);
            m1 += d;
            m2 += d * d;
        }
        m1 /= k;
        m2 /= k;
        const double sstat = 1.0 - 0.5 / (1.0 - static_cast<double>(m1 * m1 / m2));
        const double want = thr * static_cast<double>(m1) * (1.0 - sstat);
        CHECK(scale_moment_uh(s, k, 1.0) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("scale_ml") {
    GpdFit fit;
    fit.sigma = 2.0;
    CHECK(scale_ml(fit, 1.0) == 2.0);
    CHECK(scale_ml(fit, 0.28) == doctest::Approx(7.142857142857143).epsilon(1e-12));
    CHECK_THROWS_AS(scale_ml(fit, 0.0), ValidationError);
}

TEST_CASE("pareto_growth") {
    CHECK(pareto_growth(1.0, 0.7) == 0.0);
    CHECK(pareto_growth(1.0, 0.0) == 0.0);
    CHECK(pareto_growth(std::exp(1.0), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pareto_growth(4.0, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(pareto_growth(0.0, 0.5), ValidationError);
    CHECK_THROWS_AS(pareto_growth(-1.0, 0.5), ValidationError);
}

TEST_CASE("pareto_growth is continuous in gamma at zero") {
    for (double u = 0.5; u <= 100.0; u *= 1.37) {
        const double lu = std::log(u);
        for (const double g : {1e-8, -1e-8}) {
            const double bound = 1e-7 * lu * lu * std::exp(std::abs(g * lu)) + 1e-14;
            CHECK(std::abs(pareto_growth(u, g) - lu) <= bound);
        }
    }
}

TEST_CASE("extreme_quantile basics") {
    Uniform u(77);
    std::vector<double> z(300);
    for (auto& v : z) v = std::pow(1.0 - u(), -0.4);
    const auto s = sorted_from(z);

    // Hill has no quantile estimator
    CHECK_THROWS_WITH_AS(extreme_quantile(s, 30, 0.01, EstimatorKind::Hill, PPolicy::per_k()),
                         doctest::Contains("Hill"), ValidationError);
    CHECK_THROWS_AS(extreme_quantile(s, 30, 0.0, EstimatorKind::Moment, PPolicy::per_k()),
                    ValidationError);
    CHECK_THROWS_AS(extreme_quantile(s, 30, 1.0, EstimatorKind::Moment, PPolicy::per_k()),
                    ValidationError);

    // eps equal to the threshold survival collapses the growth term
    const std::size_t k = 40;
    const double surv = km_survival_at_threshold(s, k);
    const auto q = extreme_quantile(s, k, surv, EstimatorKind::Moment, PPolicy::per_k());
    CHECK(q.value == s.z(s.n() - 1 - k));
    CHECK(q.scale > 0.0);
}

TEST_CASE("extreme_quantile composes threshold, scale and growth") {
    // hand composition: threshold 1, scale 7.5 (the moment-scale fixture),
    // survival ratio 4 at gamma 0.5 gives 1 + 7.5 * 2 = 16
    const auto s = sorted_from({1.0, std::exp(1.0), std::exp(2.0)});
    const double scale = scale_moment_uh(s, 2, 1.0);
    const double value = 1.0 + scale * pareto_growth(4.0, 0.5);
    CHECK(value == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("extreme_quantile equivariance under rescaling") {
    Uniform u(99);
    std::vector<std::pair<double, int>> rows;
    for (int i = 0; i < 400; ++i)
        rows.emplace_back(std::pow(1.0 - u(), -0.3), static_cast<int>(u() < 0.8));
    const auto s = sort_sample(from_records(rows));
    for (const double c : {2.0, 5.5}) {
        auto scaled = rows;
        for (auto& [z, d] : scaled) z *= c;
        const auto sc = sort_sample(from_records(scaled));
        for (const auto kind : {EstimatorKind::Moment, EstimatorKind::UH, EstimatorKind::ML}) {
            const auto q1 = extreme_quantile(s, 60, 0.001, kind, PPolicy::per_k());
            const auto q2 = extreme_quantile(sc, 60, 0.001, kind, PPolicy::per_k());
            CHECK(q2.value == doctest::Approx(c * q1.value).epsilon(1e-6));
            CHECK(q2.gamma_adapted == doctest::Approx(q1.gamma_adapted).epsilon(1e-6));
        }
    }
}

TEST_CASE("extreme_quantile monotone in eps") {
    Uniform u(123);
    std::vector<double> z(500);
    for (auto& v : z) v = std::pow(1.0 - u(), -0.25);
    const auto s = sorted_from(z);
    for (const auto kind : {EstimatorKind::Moment, EstimatorKind::UH, EstimatorKind::ML}) {
        double prev = -INFINITY;
        for (const double eps : {0.05, 0.01, 0.002, 0.0005}) {
            const double v = extreme_quantile(s, 80, eps, kind, PPolicy::per_k()).value;
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("uncensored reduction to the classical estimator") {
    // all delta = 1 and p fixed at 1: the estimate is the classical
    // moment-quantile formula evaluated directly
    Uniform u(2024);
    std::vector<double> z(300);
    for (auto& v : z) v = std::pow(1.0 - u(), -0.35);
    const auto s = sorted_from(z);
    std::vector<double> zs = z;
    std::sort(zs.begin(), zs.end());

    const std::size_t k = 50;
    const double eps = 0.001;
    const double n = 300.0;
    const double thr = zs[zs.size() - 1 - k];
    long double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        const long double d = std::log(zs[zs.size() - i]) - std::log(thr);
        m1 += d;
        m2 += d * d;
    }
    m1 /= k;
    m2 /= k;
    const double sstat = 1.0 - 0.5 / (1.0 - static_cast<double>(m1 * m1 / m2));
    const double gam = static_cast<double>(m1) + sstat;
    const double a = thr * static_cast<double>(m1) * (1.0 - sstat);
    const double ratio = (static_cast<double>(k) / n) / eps;  // KM survival = k/n here
    const double classical = thr + a * (std::pow(ratio, gam) - 1.0) / gam;

    const auto q = extreme_quantile(s, k, eps, EstimatorKind::Moment, PPolicy::fixed_at(1.0));
    CHECK(q.value == doctest::Approx(classical).epsilon(1e-10));

    // per-k p-hat equals 1 on uncensored data, so the same value comes out
    const auto q2 = extreme_quantile(s, k, eps, EstimatorKind::Moment, PPolicy::per_k());
    CHECK(q2.value == q.value);
}
