#pragma once

#include <functional>
#include <string>

namespace tcsde {

// Gamma for x > 0.
double gamma_fn(double x);
// 1/Gamma(x) for any real x (zero at the poles).
double rgamma(double x);

struct MittagLefflerParams {
    double beta = 0.5;
    double z = 0.0;
    double series_tol = 1e-12;
    int max_terms = 400;
};

struct MittagLefflerValue {
    double value = 0.0;
    // estimated relative error
    double accuracy = 0.0;
    std::string branch;
};

// Real-argument E_beta(z), beta in (0,1], |z| <= 50.
MittagLefflerValue mittag_leffler_eval(const MittagLefflerParams& p);
double mittag_leffler(const MittagLefflerParams& p);
double mittag_leffler(double beta, double z);

// Individual branches; each reports its own relative error estimate in `accuracy`.
MittagLefflerValue ml_series(double beta, double z, double tol = 1e-12, int max_terms = 400);
// E_beta(-x) for x > 0 by smallest-term truncation of the algebraic expansion.
MittagLefflerValue ml_asymptotic_negative(double beta, double x);
// E_beta(z) for large positive z.
MittagLefflerValue ml_asymptotic_positive(double beta, double z);
// E_beta(-x) for x >= 0 from the integral over [0, beta*pi] of exp(-(x sin p / sin(beta pi - p))^(1/beta)).
MittagLefflerValue ml_integral_negative(double beta, double x);

// Riemann-Liouville J^beta f (t) by product trapezoid with exact weights.
double fractional_integral(const std::function<double(double)>& f, double beta, double t, int nodes);

}  // namespace tcsde
