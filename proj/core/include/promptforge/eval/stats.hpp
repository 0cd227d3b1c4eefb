#pragma once

#include <span>

namespace promptforge::eval {

struct Summary {
    double mean = 0.0;
    /// Unbiased sample standard deviation divided by sqrt(n).
    double standard_error = 0.0;
};

/// Throws ConfigError with fewer than two values.
Summary summarize(std::span<const double> values);

enum class TTestKind { Welch, Pooled };

struct TTestResult {
    double t = 0.0;
    /// Two-sided p-value.
    double p = 1.0;
    double df = 0.0;
};

/// Two-sample t-test, Welch (unequal variances, Welch-Satterthwaite degrees
/// of freedom) by default. With zero variance in both samples the result is
/// the degenerate limit: p = 1 for equal means, p = 0 otherwise.
/// Throws ConfigError when either sample has fewer than two values.
TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b, TTestKind kind = TTestKind::Welch);

/// Regularized incomplete beta I_x(a, b), by continued fraction (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

} // namespace promptforge::eval
