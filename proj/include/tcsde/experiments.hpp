#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcsde/path_calculus.hpp"
#include "tcsde/sde.hpp"

namespace tcsde {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double variance = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

// Mean, sample variance and std_error = sd / sqrt(n); sums in a fixed tree order.
McEstimate summarize(std::span<const double> xs, std::uint64_t seed);

enum class Provenance { ClosedForm, Quadrature, MittagLeffler, Oracle };
std::string to_string(Provenance p);

struct MomentCheck {
    std::string name;
    McEstimate estimate;
    double target = 0.0;
    // Monte Carlo error of the target (0 for exact targets).
    double target_se = 0.0;
    Provenance provenance = Provenance::ClosedForm;
    // (estimate - target) / sqrt(se^2 + target_se^2)
    double z_score = 0.0;

    bool passed(double threshold = 3.0) const { return std::abs(z_score) <= threshold; }
};

MomentCheck make_check(std::string name, const McEstimate& est, double target, double target_se, Provenance prov);

// Which clock drives a check.
struct ClockConfig {
    enum class Kind { Identity, ScaledUniform, InverseStable } kind = Kind::InverseStable;
    double beta = 0.5;
    // inner step of the subordinator (also the grid step of the identity clock)
    double inner_step = 1e-3;
    // outer grid step used by solvers that need one
    double outer_step = 1e-2;
    // E_t = R t with R uniform on [r_lo, r_hi]
    double r_lo = 0.5;
    double r_hi = 1.5;

    void validate() const;
};

// Driver for path i of an ensemble on the outer grid uniform_grid(outer_step, t).
DrivingTriple clock_driver(const ClockConfig& c, double t, std::uint64_t seed, std::uint64_t path_index);

// Independent draws of E_t for targets (own stream): exact marginals, (t/S)^beta for the
// inverse stable clock.
std::vector<double> sample_time_change(const ClockConfig& c, double t, std::size_t n, std::uint64_t seed, int threads = 0);

struct RunOptions {
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    int threads = 0;
};

using Fn1 = std::function<double(double)>;

// dX = rho(t) X dt + mu(E) X dE + sigma(E) X dB_E: target x0 e^{int rho} E[exp{int_0^{E_t} mu}]
// from an independent E ensemble, estimate from the closed form on simulated drivers.
MomentCheck check_mean_homogeneous(const std::string& name, Fn1 rho, Fn1 mu, Fn1 sigma, double x0, const ClockConfig& clock,
                                   double t, const RunOptions& opt);

// mu = -lambda, constant sigma, inverse stable clock. Returns the Laplace-form check
// (x0 e^{int rho} e^{-lambda E_t}) and the full-solution check, both against E_beta(-lambda t^beta).
std::vector<MomentCheck> check_mittag_leffler(const std::string& name, double lambda, double beta, Fn1 rho, double sigma,
                                              double x0, double t, double inner_step, const RunOptions& opt);

// dX = -alpha X dt + mu dE + sigma dB_E. Target e^{-alpha t}{x0 + mu E[int e^{alpha s} dE_s]}:
// closed form for the scaled clock, independent path ensemble otherwise.
MomentCheck check_ou_mean(const std::string& name, double alpha, double mu, double sigma, double x0, const ClockConfig& clock,
                          double t, const RunOptions& opt);

// The same mean for the inverse stable clock through the fractional-integral form with
// c = E[E_t] / t^beta estimated from an E ensemble; the estimate field holds the
// path-ensemble target so that z compares the two targets.
MomentCheck check_ou_fractional_route(const std::string& name, double alpha, double mu, double x0, const ClockConfig& clock,
                                      double t, const RunOptions& opt);

// Sample variance of X_t against x0^2 e^{2 int rho}[E e^{2 int mu + int sigma^2} - (E e^{int mu})^2];
// jackknife standard error for the sample variance.
MomentCheck check_variance_homogeneous(const std::string& name, Fn1 rho, Fn1 mu, Fn1 sigma, double x0, const ClockConfig& clock,
                                       double t, const RunOptions& opt);

// The 20 fixed-seed checks of the moment matrix (Mittag-Leffler, OU, mean and variance
// families over identity, scaled and inverse stable clocks). Passing means at most
// `allowance` checks with |z| > 3.
std::vector<MomentCheck> default_moment_matrix(const RunOptions& opt);
inline constexpr int kMatrixAllowance = 1;

// E[E_t] for each t of `times` from simulated inverse-stable paths, with the log-log slope.
struct ScalingResult {
    std::vector<double> times;
    std::vector<McEstimate> mean_e;
    double slope = 0.0;
};
ScalingResult scaling_study(double beta, double inner_step, std::span<const double> times, const RunOptions& opt);

// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct ConvergenceRow {
    double step = 0.0;
    double strong_error = 0.0;
    // duality solution vs the same reference (NaN when rho is present)
    double duality_error = 0.0;
};
struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;
};

// Strong error at t_final of solve_euler against `exact` (called with the driver of the
// same step) over a ladder of steps sharing one subordinator and Brownian path per sample.
ConvergenceTable convergence_study(const SdeSpec& spec, std::function<double(const DrivingTriple&)> exact, double beta,
                                   std::span<const double> steps, double t_final, const RunOptions& opt);

// Averaged sup-norm residuals of the three change-of-variable identities per ladder step
// (h = z for the first, k = z o E for the second), Brownian z, inverse stable clock.
struct CovLadderRow {
    double step = 0.0;
    double first_cov = 0.0;
    double second_cov = 0.0;
    double qv = 0.0;
};
std::vector<CovLadderRow> cov_ladder(double beta, std::span<const double> steps, const RunOptions& opt);

// Step time change T = 1_{[1,inf)}, Brownian z, h = 1_{(1/2,inf)}: per-seed residuals of the
// first identity, and of the second with k = 1_{[0,1)}, and of the quadratic variation.
struct NegativeFixture {
    std::vector<double> first_cov;
    std::vector<double> second_cov;
    std::vector<double> qv;
};
NegativeFixture negative_fixture(std::size_t n_seeds, double step, std::uint64_t seed);

// RMS over paths of the time-changed Ito residual for f (A = 0, F = 0, G = 1), inverse stable clock.
double tc_ito_rms(const C2Function& f, double beta, double step, const RunOptions& opt);

// Y(u) = X(D(u-)) for the event-grid Euler solution X: sup residual of the classical
// integral identity Y_u = x0 + int mu(Y) du + int sigma(Y) dB on the inner grid up to E(horizon).
// Requires rho absent.
double duality_identity_residual(const SdeSpec& spec, const DrivingTriple& driver);

}  // namespace tcsde
