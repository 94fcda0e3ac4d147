#include "tcsde/special_fn.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "tcsde/errors.hpp"

namespace tcsde {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTarget = 1e-10;
}  // namespace

double gamma_fn(double x) {
    if (!(x > 0.0)) {
        throw DomainError("gamma_fn: argument must be positive");
    }
    return std::tgamma(x);
}

double rgamma(double x) {
    if (x > 0.5) {
        return x < 170.0 ? 1.0 / std::tgamma(x) : std::exp(-std::lgamma(x));
    }
    if (x == std::nearbyint(x)) {
        return 0.0;
    }
    // reflection: 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
    const double s = std::sin(std::numbers::pi * x) / std::numbers::pi;
    const double y = 1.0 - x;
    return y < 170.0 ? s * std::tgamma(y) : s * std::exp(std::lgamma(y));
}

MittagLefflerValue ml_series(double beta, double z, double tol, int max_terms) {
    if (z == 0.0) {
        return {1.0, 0.0, "series"};
    }
    const double lz = std::log(std::abs(z));
    const bool neg = z < 0.0;
    // Kahan summation
    double sum = 1.0, comp = 0.0, prev = 1.0;
    // rounding budget: each term carries the absolute error of its exponent
    double round_abs = kEps;
    for (int n = 1; n <= max_terms; ++n) {
        const double lg = std::lgamma(beta * n + 1.0);
        const double mag = std::exp(n * lz - lg);
        round_abs += kEps * mag * (2.0 + std::abs(n * lz) + lg);
        const double term = (neg && (n % 2)) ? -mag : mag;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (mag < prev && mag <= tol * std::abs(sum)) {
            return {sum, (round_abs + mag) / std::abs(sum), "series"};
        }
        prev = mag;
    }
    throw AccuracyError("mittag_leffler: power series did not converge within max_terms", prev / std::abs(sum));
}

MittagLefflerValue ml_asymptotic_negative(double beta, double x) {
    double sum = 0.0;
    double last = std::numeric_limits<double>::infinity();
    const double lx = std::log(x);
    for (int k = 1; k < 2000; ++k) {
        const double y = 1.0 - beta * k;
        double mag;
        if (y == std::nearbyint(y) && y <= 0.0) {
            continue;  // 1/Gamma vanishes at the poles
        }
        if (y > 0.5) {
            mag = std::exp(-std::lgamma(y) - k * lx);
        } else {
            mag = std::abs(std::sin(std::numbers::pi * y)) / std::numbers::pi * std::exp(std::lgamma(1.0 - y) - k * lx);
        }
        if (mag > last) {
            break;
        }
        const double sign = (y > 0.5 || std::sin(std::numbers::pi * y) > 0.0) ? 1.0 : -1.0;
        sum += (k % 2) ? sign * mag : -sign * mag;
        last = mag;
    }
    if (!std::isfinite(last)) {
        // every coefficient vanished (beta = 1): the expansion carries no information
        return {0.0, std::numeric_limits<double>::infinity(), "asymptotic"};
    }
    const double acc = sum != 0.0 ? last / std::abs(sum) : std::numeric_limits<double>::infinity();
    return {sum, acc, "asymptotic"};
}

MittagLefflerValue ml_asymptotic_positive(double beta, double z) {
    const double ex = std::pow(z, 1.0 / beta);
    if (ex > 700.0) {
        throw DomainError("mittag_leffler: value overflows double precision");
    }
    const double lead = std::exp(ex) / beta;
    double alg = 0.0;
    double last = std::numeric_limits<double>::infinity();
    const double lz = std::log(z);
    for (int k = 1; k < 200; ++k) {
        const double term = rgamma(1.0 - beta * k) * std::exp(-k * lz);
        if (term == 0.0) {
            continue;
        }
        if (std::abs(term) > last) {
            break;
        }
        alg += term;
        last = std::abs(term);
    }
    const double v = lead - alg;
    const double acc = (std::isfinite(last) ? last : 0.0) / std::abs(v) + 4 * kEps * ex;
    return {v, acc, "asymptotic"};
}

MittagLefflerValue ml_integral_negative(double beta, double x) {
    if (x == 0.0) {
        return {1.0, 0.0, "integral"};
    }
    const double bp = beta * std::numbers::pi;
    auto integrand = [&](double p) {
        if (p <= 0.0) {
            return 1.0;
        }
        const double den = std::sin(bp - p);
        if (den <= 0.0) {
            return 0.0;
        }
        const double w = x * std::sin(p) / den;
        return std::exp(-std::pow(w, 1.0 / beta));
    };
    // The integrand drops from 1 to 0 around the angle where x w(p) = 1; split there
    // so the adaptive rule sees the transition.
    double split = 0.0;
    {
        // solve sin p / sin(bp - p) = 1/x by bisection on (0, bp)
        double lo = 0.0, hi = bp;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (x * std::sin(mid) / std::sin(bp - mid) < 1.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        split = 0.5 * (lo + hi);
    }
    // p^(1/beta) is not smooth at p = 0, so use the double-exponential rule, which is
    // insensitive to endpoint singularities; Gauss-Kronrod on the same split is the check.
    boost::math::quadrature::tanh_sinh<double> ts;
    double e1 = 0.0, e2 = 0.0;
    const double v1 = (ts.integrate(integrand, 0.0, split, 1e-14, &e1) + ts.integrate(integrand, split, bp, 1e-14, &e2)) / bp;
    using GK61 = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double v2 = (GK61::integrate(integrand, 0.0, split, 8, 1e-12) + GK61::integrate(integrand, split, bp, 8, 1e-12)) / bp;
    return {v1, std::max(std::abs(v1 - v2), (e1 + e2) / bp) / v1 + 16 * kEps, "integral"};
}

MittagLefflerValue mittag_leffler_eval(const MittagLefflerParams& p) {
    if (!(p.beta > 0.0 && p.beta <= 1.0)) {
        throw DomainError("mittag_leffler: beta must lie in (0, 1]");
    }
    if (!(p.series_tol > 0.0) || p.max_terms < 1) {
        throw DomainError("mittag_leffler: tolerances must be positive");
    }
    const double z = p.z;
    if (!(std::abs(z) <= 50.0)) {
        throw DomainError("mittag_leffler: |z| must not exceed 50");
    }
    if (z == 0.0) {
        return {1.0, 0.0, "series"};
    }
    if (p.beta == 1.0 && std::abs(z) > 5.0) {
        return {std::exp(z), kEps, "exp"};
    }
    auto best_negative = [&](MittagLefflerValue cand) {
        if (cand.accuracy <= kTarget) {
            return cand;
        }
        const double x = -z;
        MittagLefflerValue as = ml_asymptotic_negative(p.beta, x);
        if (as.accuracy < cand.accuracy) {
            cand = as;
        }
        if (cand.accuracy <= kTarget) {
            return cand;
        }
        MittagLefflerValue in = ml_integral_negative(p.beta, x);
        return in.accuracy < cand.accuracy ? in : cand;
    };
    if (std::abs(z) <= 5.0) {
        MittagLefflerValue s;
        try {
            s = ml_series(p.beta, z, p.series_tol, p.max_terms);
        } catch (const AccuracyError&) {
            s = {0.0, std::numeric_limits<double>::infinity(), "series"};
        }
        if (z < 0.0) {
            return best_negative(s);
        }
        if (s.accuracy <= kTarget) {
            return s;
        }
        MittagLefflerValue a = ml_asymptotic_positive(p.beta, z);
        if (a.accuracy < s.accuracy) {
            s = a;
        }
        if (s.accuracy > 1e-8) {
            throw AccuracyError("mittag_leffler: no branch reaches the accuracy target at z=" + std::to_string(z), s.accuracy);
        }
        return s;
    }
    if (z < 0.0) {
        return best_negative(ml_asymptotic_negative(p.beta, -z));
    }
    // z > 5
    try {
        MittagLefflerValue s = ml_series(p.beta, z, p.series_tol, p.max_terms);
        if (s.accuracy <= kTarget) {
            return s;
        }
    } catch (const AccuracyError&) {
    }
    MittagLefflerValue a = ml_asymptotic_positive(p.beta, z);
    if (a.accuracy > 1e-8) {
        throw AccuracyError("mittag_leffler: no branch reaches the accuracy target at z=" + std::to_string(z), a.accuracy);
    }
    return a;
}

double mittag_leffler(const MittagLefflerParams& p) { return mittag_leffler_eval(p).value; }

double mittag_leffler(double beta, double z) { return mittag_leffler_eval({beta, z}).value; }

double fractional_integral(const std::function<double(double)>& f, double beta, double t, int nodes) {
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("fractional_integral: beta must lie in (0, 1]");
    }
    if (nodes < 16) {
        throw DomainError("fractional_integral: at least 16 nodes required");
    }
    if (!(t >= 0.0)) {
        throw DomainError("fractional_integral: t must be nonnegative");
    }
    if (t == 0.0) {
        return 0.0;
    }
    const double h = t / nodes;
    double sum = 0.0;
    double f_left = f(0.0);
    for (int j = 0; j < nodes; ++j) {
        const double r1 = (j + 1 == nodes) ? t : (j + 1) * h;
        const double f_right = f(r1);
        // a = t - r_j, b = t - r_{j+1}
        const double a = t - j * h;
        const double b = t - r1;
        const double ab = std::pow(a, beta);
        const double bb = std::pow(b, beta);
        const double A = (ab - bb) / beta;                                      // int (t-r)^(beta-1) dr
        const double B = a * A - (a * ab - b * bb) / (beta + 1.0);              // int (t-r)^(beta-1) (r - r_j) dr
        sum += f_left * (A - B / h) + f_right * (B / h);
        f_left = f_right;
    }
    return sum / std::tgamma(beta);
}

}  // namespace tcsde
