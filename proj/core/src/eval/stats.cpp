#include "promptforge/eval/stats.hpp"

#include "promptforge/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace promptforge::eval {

namespace {

struct Moments {
    double n;
    double mean;
    double var; // unbiased
};

Moments moments(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    // Constant samples are exact; summing them can leave rounding noise in both moments.
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) return {n, x.front(), 0.0};
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {n, mean, ss / (n - 1.0)};
}

// Continued fraction for I_x(a, b); converges fast for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;

        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

Summary summarize(std::span<const double> values) {
    if (values.size() < 2) throw ConfigError("summarize needs at least two values");
    auto m = moments(values);
    return {m.mean, std::sqrt(m.var / m.n)};
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw ConfigError("incomplete beta needs positive shape parameters");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw ConfigError("degrees of freedom must be positive");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b, TTestKind kind) {
    if (a.size() < 2 || b.size() < 2) throw ConfigError("t-test needs at least two values per sample");
    const auto x = moments(a);
    const auto y = moments(b);
    const double diff = x.mean - y.mean;

    double se2 = 0.0;
    double df = 0.0;
    if (kind == TTestKind::Pooled) {
        df = x.n + y.n - 2.0;
        const double pooled = ((x.n - 1.0) * x.var + (y.n - 1.0) * y.var) / df;
        se2 = pooled * (1.0 / x.n + 1.0 / y.n);
    } else {
        const double vx = x.var / x.n;
        const double vy = y.var / y.n;
        se2 = vx + vy;
        const double denom = vx * vx / (x.n - 1.0) + vy * vy / (y.n - 1.0);
        df = denom > 0.0 ? se2 * se2 / denom : x.n + y.n - 2.0;
    }

    if (se2 <= 0.0) {
        if (diff == 0.0) return {0.0, 1.0, df};
        return {std::copysign(std::numeric_limits<double>::infinity(), diff), 0.0, df};
    }
    const double t = diff / std::sqrt(se2);
    return {t, student_t_two_sided_p(t, df), df};
}

} // namespace promptforge::eval
