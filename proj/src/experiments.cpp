#include "tcsde/experiments.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "tcsde/closed_form.hpp"
#include "tcsde/ensemble.hpp"
#include "tcsde/errors.hpp"
#include "tcsde/rng.hpp"
#include "tcsde/special_fn.hpp"
#include "tcsde/timechange.hpp"

namespace tcsde {

namespace {

double sum(std::span<const double> v) { return tree_sum(v); }

double mean_of(std::span<const double> v) { return sum(v) / static_cast<double>(v.size()); }

// int_0^v f
double integral(const Fn1& f, double v) {
    if (!f || v == 0.0) {
        return 0.0;
    }
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, v, 8, 1e-13);
}

// n equal cells ending exactly at t
std::vector<double> grid_to(double t, double step) {
    const auto n = std::max<long>(1, std::lround(t / step));
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i <= n; ++i) {
        g[static_cast<std::size_t>(i)] = t * static_cast<double>(i) / static_cast<double>(n);
    }
    g.back() = t;
    return g;
}

std::uint64_t target_seed(std::uint64_t seed) { return mix64(seed ^ 0x7a3c5e9b1d2f4608ull); }

}  // namespace

McEstimate summarize(std::span<const double> xs, std::uint64_t seed) {
    if (xs.size() < 2) {
        throw ConfigError("summarize: need at least two samples");
    }
    McEstimate e;
    e.n = xs.size();
    e.seed = seed;
    e.mean = mean_of(xs);
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sq[i] = (xs[i] - e.mean) * (xs[i] - e.mean);
    }
    e.variance = sum(sq) / static_cast<double>(xs.size() - 1);
    e.std_error = std::sqrt(e.variance / static_cast<double>(xs.size()));
    return e;
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::ClosedForm: return "closed_form";
        case Provenance::Quadrature: return "quadrature";
        case Provenance::MittagLeffler: return "mittag_leffler";
        case Provenance::Oracle: return "oracle";
    }
    return "?";
}

MomentCheck make_check(std::string name, const McEstimate& est, double target, double target_se, Provenance prov) {
    MomentCheck c{std::move(name), est, target, target_se, prov, 0.0};
    const double se = std::sqrt(est.std_error * est.std_error + target_se * target_se);
    const double diff = est.mean - target;
    c.z_score = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff));
    return c;
}

void ClockConfig::validate() const {
    if (kind == Kind::InverseStable && !(beta > 0.0 && beta < 1.0)) {
        throw ConfigError("clock: beta must lie in (0,1)");
    }
    if (!(inner_step > 0.0) || !(outer_step > 0.0)) {
        throw ConfigError("clock: steps must be positive");
    }
    if (kind == Kind::ScaledUniform && !(r_lo > 0.0 && r_hi >= r_lo)) {
        throw ConfigError("clock: need 0 < r_lo <= r_hi");
    }
}

DrivingTriple clock_driver(const ClockConfig& c, double t, std::uint64_t seed, std::uint64_t path_index) {
    c.validate();
    switch (c.kind) {
        case ClockConfig::Kind::Identity:
            return make_driver(identity_pair(grid_to(t, c.inner_step)), seed, path_index);
        case ClockConfig::Kind::ScaledUniform: {
            Philox rng = make_stream(seed, path_index, kClockChannel);
            const double r = c.r_lo + (c.r_hi - c.r_lo) * rng.uniform();
            return make_driver(scaled_pair(r, grid_to(t, c.outer_step)), seed, path_index);
        }
        case ClockConfig::Kind::InverseStable:
            return make_driver(inverse_stable_pair(c.beta, c.inner_step, grid_to(t, c.outer_step), seed, path_index), seed,
                               path_index);
    }
    throw ConfigError("clock: unknown kind");
}

std::vector<double> sample_time_change(const ClockConfig& c, double t, std::size_t n, std::uint64_t seed, int threads) {
    c.validate();
    return run_ensemble(n, resolve_threads(threads), [&](std::size_t i) {
        Philox rng = make_stream(seed, i, kTargetChannel);
        switch (c.kind) {
            case ClockConfig::Kind::Identity: return t;
            case ClockConfig::Kind::ScaledUniform: return (c.r_lo + (c.r_hi - c.r_lo) * rng.uniform()) * t;
            case ClockConfig::Kind::InverseStable: return std::pow(t / rng.stable(c.beta), c.beta);
        }
        return t;
    });
}

MomentCheck check_mean_homogeneous(const std::string& name, Fn1 rho, Fn1 mu, Fn1 sigma, double x0, const ClockConfig& clock,
                                   double t, const RunOptions& opt) {
    const double pre = x0 * std::exp(integral(rho, t));
    LinearCoeffs lc;
    if (rho) {
        lc.rho2 = [rho](double s, double) { return rho(s); };
    }
    if (mu) {
        lc.mu2 = [mu](double, double u) { return mu(u); };
    }
    if (sigma) {
        lc.sigma2 = [sigma](double, double u) { return sigma(u); };
    }
    lc.x0 = x0;
    const auto xs = run_ensemble(opt.n_paths, resolve_threads(opt.threads), [&](std::size_t i) {
        return fundamental_solution(lc, clock_driver(clock, t, opt.seed, i)).values().back();
    });
    const McEstimate est = summarize(xs, opt.seed);
    if (clock.kind == ClockConfig::Kind::Identity) {
        return make_check(name, est, pre * std::exp(integral(mu, t)), 0.0, Provenance::ClosedForm);
    }
    auto es = sample_time_change(clock, t, opt.n_paths, target_seed(opt.seed), opt.threads);
    for (double& v : es) {
        v = pre * std::exp(integral(mu, v));
    }
    const McEstimate tgt = summarize(es, target_seed(opt.seed));
    return make_check(name, est, tgt.mean, tgt.std_error, Provenance::Quadrature);
}

std::vector<MomentCheck> check_mittag_leffler(const std::string& name, double lambda, double beta, Fn1 rho, double sigma,
                                              double x0, double t, double inner_step, const RunOptions& opt) {
    if (!(lambda > 0.0)) {
        throw ConfigError("check_mittag_leffler: lambda must be positive");
    }
    const double pre = x0 * std::exp(integral(rho, t));
    const double target = pre * mittag_leffler(beta, -lambda * std::pow(t, beta));
    if (t == 0.0) {
        const std::vector<double> ones(2, x0);
        const McEstimate est = summarize(ones, opt.seed);
        return {make_check(name + "_laplace", est, target, 0.0, Provenance::MittagLeffler),
                make_check(name + "_full", est, target, 0.0, Provenance::MittagLeffler)};
    }
    ClockConfig clock;
    clock.beta = beta;
    clock.inner_step = inner_step;
    clock.outer_step = t;
    struct Pair {
        double laplace, full;
    };
    const auto r = run_ensemble(opt.n_paths, resolve_threads(opt.threads), [&](std::size_t i) {
        const DrivingTriple d = clock_driver(clock, t, opt.seed, i);
        const double e = d.pair.e.values().back();
        const double b = d.b_of_e.values().back();
        return Pair{pre * std::exp(-lambda * e), pre * std::exp(-(lambda + 0.5 * sigma * sigma) * e + sigma * b)};
    });
    std::vector<double> a(r.size()), f(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        a[i] = r[i].laplace;
        f[i] = r[i].full;
    }
    return {make_check(name + "_laplace", summarize(a, opt.seed), target, 0.0, Provenance::MittagLeffler),
            make_check(name + "_full", summarize(f, opt.seed), target, 0.0, Provenance::MittagLeffler)};
}

namespace {

// int_0^t e^{alpha s} dE_s for the step inverse of d: E moves by the cell width at each D value.
double exp_weighted_clock(const MonotonePath& d, double alpha, double t) {
    const auto& g = d.grid();
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < g.size() && d[j] <= t; ++j) {
        s += std::exp(alpha * d[j]) * (g[j + 1] - g[j]);
    }
    return s;
}

McEstimate ou_clock_integral(double alpha, const ClockConfig& clock, double t, const RunOptions& opt) {
    const std::uint64_t seed = target_seed(opt.seed);
    const auto v = run_ensemble(opt.n_paths, resolve_threads(opt.threads), [&](std::size_t i) {
        StableSubordinatorConfig cfg{clock.beta, clock.inner_step, clock.inner_step, seed, i};
        return exp_weighted_clock(simulate_stable_subordinator_until(cfg, t), alpha, t);
    });
    return summarize(v, seed);
}

}  // namespace

MomentCheck check_ou_mean(const std::string& name, double alpha, double mu, double sigma, double x0, const ClockConfig& clock,
                          double t, const RunOptions& opt) {
    ModelPreset m{PresetName::OrnsteinUhlenbeckAnalogue, {{"alpha", alpha}, {"mu", mu}, {"sigma", sigma}, {"x0", x0}}};
    const auto xs = run_ensemble(opt.n_paths, resolve_threads(opt.threads), [&](std::size_t i) {
        return preset_solution(m, clock_driver(clock, t, opt.seed, i)).values().back();
    });
    const McEstimate est = summarize(xs, opt.seed);
    const double decay = std::exp(-alpha * t);
    switch (clock.kind) {
        case ClockConfig::Kind::Identity:
            return make_check(name, est, x0 * decay + mu / alpha * (1.0 - decay), 0.0, Provenance::ClosedForm);
        case ClockConfig::Kind::ScaledUniform: {
            const double er = 0.5 * (clock.r_lo + clock.r_hi);
            return make_check(name, est, x0 * decay + mu * er / alpha * (1.0 - decay), 0.0, Provenance::ClosedForm);
        }
        case ClockConfig::Kind::InverseStable: {
            if (mu == 0.0) {
                return make_check(name, est, x0 * decay, 0.0, Provenance::ClosedForm);
            }
            const McEstimate ci = ou_clock_integral(alpha, clock, t, opt);
            return make_check(name, est, decay * (x0 + mu * ci.mean), decay * std::abs(mu) * ci.std_error,
                              Provenance::Quadrature);
        }
    }
    throw ConfigError("check_ou_mean: unknown clock");
}

MomentCheck check_ou_fractional_route(const std::string& name, double alpha, double mu, double x0, const ClockConfig& clock,
                                      double t, const RunOptions& opt) {
    if (clock.kind != ClockConfig::Kind::InverseStable) {
        throw ConfigError("check_ou_fractional_route: needs the inverse stable clock");
    }
    const double beta = clock.beta;
    const double decay = std::exp(-alpha * t);
    const McEstimate ci = ou_clock_integral(alpha, clock, t, opt);
    McEstimate path_target = ci;
    path_target.mean = decay * (x0 + mu * ci.mean);
    path_target.std_error = decay * std::abs(mu) * ci.std_error;
    // c(beta) from exact marginals on yet another stream
    const auto es = sample_time_change(clock, t, opt.n_paths, mix64(target_seed(opt.seed)), opt.threads);
    const McEstimate em = summarize(es, mix64(target_seed(opt.seed)));
    const double tb = std::pow(t, beta);
    const double c = em.mean / tb;
    const double c_se = em.std_error / tb;
    const double jb = fractional_integral([&](double r) { return std::exp(alpha * (t - r)); }, beta, t, 4096);
    const double k = mu * beta * gamma_fn(beta) * jb;
    return make_check(name, path_target, decay * (x0 + k * c), decay * std::abs(k) * c_se, Provenance::Quadrature);
}

MomentCheck check_variance_homogeneous(const std::string& name, Fn1 rho, Fn1 mu, Fn1 sigma, double x0, const ClockConfig& clock,
                                       double t, const RunOptions& opt) {
    const double pre = x0 * std::exp(integral(rho, t));
    LinearCoeffs lc;
    if (rho) {
        lc.rho2 = [rho](double s, double) { return rho(s); };
    }
    if (mu) {
        lc.mu2 = [mu](double, double u) { return mu(u); };
    }
    if (sigma) {
        lc.sigma2 = [sigma](double, double u) { return sigma(u); };
    }
    lc.x0 = x0;
    const auto xs = run_ensemble(opt.n_paths, resolve_threads(opt.threads), [&](std::size_t i) {
        return fundamental_solution(lc, clock_driver(clock, t, opt.seed, i)).values().back();
    });
    const std::size_t n = xs.size();
    const McEstimate base = summarize(xs, opt.seed);
    // jackknife over leave-one-out sample variances (centered data)
    std::vector<double> y(n), y2(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = xs[i] - base.mean;
        y2[i] = y[i] * y[i];
    }
    const double s1 = sum(y), s2 = sum(y2);
    const double nm = static_cast<double>(n - 1);
    std::vector<double> th(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = s1 - y[i];
        const double b = s2 - y2[i];
        th[i] = (b - a * a / nm) / (nm - 1.0);
    }
    const double thm = mean_of(th);
    for (double& v : th) {
        v = (v - thm) * (v - thm);
    }
    McEstimate est = base;
    est.mean = base.variance;
    est.std_error = std::sqrt(nm / static_cast<double>(n) * sum(th));

    auto two_moments = [&](double v) {
        const double im = integral(mu, v);
        const double is2 = integral(sigma ? Fn1([sigma](double s) { return sigma(s) * sigma(s); }) : Fn1{}, v);
        return std::pair{std::exp(2.0 * im + is2), std::exp(im)};
    };
    if (clock.kind == ClockConfig::Kind::Identity) {
        const auto [a, b] = two_moments(t);
        return make_check(name, est, pre * pre * (a - b * b), 0.0, Provenance::ClosedForm);
    }
    const auto es = sample_time_change(clock, t, opt.n_paths, target_seed(opt.seed), opt.threads);
    std::vector<double> av(n), bv(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::tie(av[i], bv[i]) = two_moments(es[i]);
    }
    const McEstimate ma = summarize(av, 0), mb = summarize(bv, 0);
    std::vector<double> cov(n);
    for (std::size_t i = 0; i < n; ++i) {
        cov[i] = (av[i] - ma.mean) * (bv[i] - mb.mean);
    }
    const double cab = sum(cov) / static_cast<double>(n - 1);
    const double target = pre * pre * (ma.mean - mb.mean * mb.mean);
    const double tvar = (ma.variance + 4.0 * mb.mean * mb.mean * mb.variance - 4.0 * mb.mean * cab) / static_cast<double>(n);
    return make_check(name, est, target, pre * pre * std::sqrt(std::max(0.0, tvar)), Provenance::Quadrature);
}

std::vector<MomentCheck> default_moment_matrix(const RunOptions& opt) {
    using K = ClockConfig::Kind;
    auto cst = [](double v) { return Fn1([v](double) { return v; }); };
    auto stable = [](double beta, double outer) {
        ClockConfig c;
        c.beta = beta;
        c.outer_step = outer;
        return c;
    };
    ClockConfig ident;
    ident.kind = K::Identity;
    ClockConfig scaled;
    scaled.kind = K::ScaledUniform;
    scaled.outer_step = 1e-3;

    std::vector<MomentCheck> out;
    // one seed per check so that checks sharing a model do not share drivers
    std::uint64_t k = 0;
    auto next = [&] {
        RunOptions o = opt;
        o.seed = mix64(opt.seed + ++k);
        return o;
    };
    auto take = [&](std::vector<MomentCheck> v) { out.insert(out.end(), v.begin(), v.end()); };
    take(check_mittag_leffler("ml_b0.5", 1.0, 0.5, {}, 0.5, 1.0, 1.0, 1e-3, next()));
    // bias of the stepped clock is about h/2 in E; needs the finer step near beta = 1
    take(check_mittag_leffler("ml_b0.999", 1.0, 0.999, {}, 0.5, 1.0, 1.0, 1e-4, next()));
    out.push_back(check_ou_mean("ou_scaled_clock", 1.0, 1.0, 0.5, 1.0, scaled, 1.0, next()));
    out.push_back(check_ou_mean("ou_mu0_b0.5", 1.0, 0.0, 0.5, 1.0, stable(0.5, 1e-3), 1.0, next()));
    out.push_back(check_ou_mean("ou_b0.5", 1.0, 1.0, 0.5, 1.0, stable(0.5, 1e-3), 1.0, next()));
    out.push_back(check_ou_fractional_route("ou_fractional_b0.5", 1.0, 1.0, 1.0, stable(0.5, 1e-3), 1.0, next()));
    out.push_back(check_mean_homogeneous("mean_identity", cst(0.05), cst(0.1), cst(0.3), 1.0, ident, 1.0, next()));
    out.push_back(check_mean_homogeneous("mean_martingale_b0.5", {}, {}, cst(1.5), 1.0, stable(0.5, 1e-2), 1.0, next()));
    out.push_back(check_mean_homogeneous("mean_decay_b0.5", {}, cst(-1.0), cst(0.5), 1.0, stable(0.5, 1e-2), 1.0, next()));
    out.push_back(check_mean_homogeneous(
        "mean_varying_b0.8", [](double s) { return 0.1 * std::cos(s); }, [](double u) { return -0.5 + 0.2 * u; },
        [](double u) { return 0.3 + 0.1 * u; }, 1.0, stable(0.8, 1e-2), 1.0, next()));
    out.push_back(check_variance_homogeneous("var_identity", cst(0.05), cst(0.1), cst(0.3), 1.0, ident, 1.0, next()));
    out.push_back(check_variance_homogeneous("var_b0.5_sigma1", {}, {}, cst(1.0), 1.0, stable(0.5, 1e-2), 1.0, next()));
    out.push_back(check_variance_homogeneous("var_b0.8", {}, cst(-0.2), cst(0.3), 1.0, stable(0.8, 1e-2), 1.0, next()));
    out.push_back(check_mittag_leffler("ml_b0.3", 1.0, 0.3, {}, 0.5, 1.0, 1.0, 1e-3, next())[0]);
    out.push_back(check_mittag_leffler("ml_b0.8_l2", 2.0, 0.8, cst(0.1), 0.4, 1.0, 1.0, 1e-3, next())[1]);
    out.push_back(check_ou_mean("ou_b0.8", 2.0, 0.5, 0.3, 1.0, stable(0.8, 1e-3), 1.0, next()));
    out.push_back(check_mittag_leffler("ml_b0.7_t0.5", 1.0, 0.7, {}, 0.5, 1.0, 0.5, 1e-3, next())[0]);
    out.push_back(check_variance_homogeneous("var_decay_b0.5", {}, cst(-1.0), cst(0.5), 1.0, stable(0.5, 1e-2), 1.0, next()));
    return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ConfigError("loglog_slope: need two or more matching points");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalingResult scaling_study(double beta, double inner_step, std::span<const double> times, const RunOptions& opt) {
    std::vector<double> og{0.0};
    for (double t : times) {
        if (!(t > og.back())) {
            throw ConfigError("scaling_study: times must be positive and increasing");
        }
        og.push_back(t);
    }
    const auto paths = run_ensemble(opt.n_paths, resolve_threads(opt.threads), [&](std::size_t i) {
        return inverse_stable_pair(beta, inner_step, og, opt.seed, i).e.values();
    });
    ScalingResult r;
    r.times.assign(times.begin(), times.end());
    std::vector<double> col(paths.size()), means;
    for (std::size_t k = 0; k < times.size(); ++k) {
        for (std::size_t i = 0; i < paths.size(); ++i) {
            col[i] = paths[i][k + 1];
        }
        r.mean_e.push_back(summarize(col, opt.seed));
        means.push_back(r.mean_e.back().mean);
    }
    r.slope = loglog_slope(times, means);
    return r;
}

ConvergenceTable convergence_study(const SdeSpec& spec, std::function<double(const DrivingTriple&)> exact, double beta,
                                   std::span<const double> steps, double t_final, const RunOptions& opt) {
    const std::size_t ns = steps.size();
    const bool dual = !spec.rho;
    const auto per = run_ensemble(opt.n_paths, resolve_threads(opt.threads), [&](std::size_t i) {
        const auto lad = stable_driver_ladder(beta, steps, t_final, opt.seed, i);
        std::vector<double> e(2 * ns, 0.0);
        for (std::size_t j = 0; j < ns; ++j) {
            const double ref = exact(lad[j]);
            const double xe = solve_euler(spec, lad[j]).path.values().back();
            e[j] = (xe - ref) * (xe - ref);
            if (dual) {
                const double xd = solve_duality(spec, lad[j]).path.values().back();
                e[ns + j] = (xd - ref) * (xd - ref);
            }
        }
        return e;
    });
    ConvergenceTable tab;
    std::vector<double> col(per.size()), errs;
    for (std::size_t j = 0; j < ns; ++j) {
        ConvergenceRow row;
        row.step = steps[j];
        for (std::size_t i = 0; i < per.size(); ++i) {
            col[i] = per[i][j];
        }
        row.strong_error = std::sqrt(mean_of(col));
        if (dual) {
            for (std::size_t i = 0; i < per.size(); ++i) {
                col[i] = per[i][ns + j];
            }
            row.duality_error = std::sqrt(mean_of(col));
        } else {
            row.duality_error = std::numeric_limits<double>::quiet_NaN();
        }
        tab.rows.push_back(row);
        errs.push_back(row.strong_error);
    }
    tab.slope = loglog_slope(steps, errs);
    return tab;
}

std::vector<CovLadderRow> cov_ladder(double beta, std::span<const double> steps, const RunOptions& opt) {
    const std::size_t ns = steps.size();
    const auto per = run_ensemble(opt.n_paths, resolve_threads(opt.threads), [&](std::size_t i) {
        const auto lad = stable_driver_ladder(beta, steps, 1.0, opt.seed, i);
        std::vector<double> r(3 * ns);
        for (std::size_t j = 0; j < ns; ++j) {
            const CadlagPath& z = *lad[j].inner_b;
            r[j] = verify_first_cov(z, z, lad[j].pair).sup;
            r[ns + j] = verify_second_cov(lad[j].b_of_e, z, lad[j].pair).sup;
            r[2 * ns + j] = verify_qv_composition(z, lad[j].pair).sup;
        }
        return r;
    });
    std::vector<CovLadderRow> rows;
    std::vector<double> col(per.size());
    auto avg = [&](std::size_t k) {
        for (std::size_t i = 0; i < per.size(); ++i) {
            col[i] = per[i][k];
        }
        return mean_of(col);
    };
    for (std::size_t j = 0; j < ns; ++j) {
        rows.push_back({steps[j], avg(j), avg(ns + j), avg(2 * ns + j)});
    }
    return rows;
}

NegativeFixture negative_fixture(std::size_t n_seeds, double step, std::uint64_t seed) {
    const auto og = uniform_grid(step, 2.0);
    auto ig = uniform_grid(step, 1.0);
    const std::vector<double> zg = ig;
    ig.pop_back();
    const TimeChangePair pair = unit_step_pair(og, ig);
    std::vector<double> hv(zg.size()), kv(og.size());
    for (std::size_t i = 0; i < zg.size(); ++i) {
        hv[i] = zg[i] > 0.5 ? 1.0 : 0.0;
    }
    for (std::size_t k = 0; k < og.size(); ++k) {
        kv[k] = og[k] < 1.0 ? 1.0 : 0.0;
    }
    const CadlagPath h(zg, hv, Interp::CadlagStep);
    const CadlagPath kp(og, kv, Interp::CadlagStep);
    NegativeFixture out;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        Philox rng = make_stream(seed, s, kNoiseChannel);
        std::vector<double> b(zg.size(), 0.0);
        for (std::size_t i = 1; i < zg.size(); ++i) {
            b[i] = b[i - 1] + std::sqrt(zg[i] - zg[i - 1]) * rng.normal();
        }
        const CadlagPath z(zg, std::move(b), Interp::Linear);
        out.first_cov.push_back(verify_first_cov(h, z, pair).sup);
        out.second_cov.push_back(verify_second_cov(kp, z, pair).sup);
        out.qv.push_back(verify_qv_composition(z, pair).sup);
    }
    return out;
}

double tc_ito_rms(const C2Function& f, double beta, double step, const RunOptions& opt) {
    const auto og = uniform_grid(step, 1.0);
    const CadlagPath zero(og, std::vector<double>(og.size(), 0.0), Interp::CadlagStep);
    const CadlagPath one(og, std::vector<double>(og.size(), 1.0), Interp::CadlagStep);
    const auto r = run_ensemble(opt.n_paths, resolve_threads(opt.threads), [&](std::size_t i) {
        const TimeChangePair pair = inverse_stable_pair(beta, step, og, opt.seed, i);
        const DrivingTriple d = make_driver(pair, opt.seed, i);
        return verify_tc_ito(ItoIntegrands{zero, zero, one}, *d.inner_b, pair, f).rms;
    });
    return mean_of(r);
}

double duality_identity_residual(const SdeSpec& spec, const DrivingTriple& driver) {
    if (spec.rho) {
        throw UnsupportedError("duality_identity_residual: the dt coefficient must vanish");
    }
    if (!driver.inner_b) {
        throw UnsupportedError("duality_identity_residual: driver lacks the inner Brownian path");
    }
    const EventDriver ev = refine_to_events(driver);
    const CadlagPath x = solve_euler_events(spec, ev).path;
    const MonotonePath& e = ev.driver.pair.e;
    const auto& tg = e.grid();
    const CadlagPath& b = *driver.inner_b;
    const auto& ug = b.grid();
    auto coef = [](const Coef& c, double t, double u, double y) { return c ? c(t, u, y) : 0.0; };
    double acc = spec.x0;
    double worst = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < ug.size(); ++i) {
        // first event point where E has reached u_i, i.e. D(u_i-) with E(0) pinned at 0
        while (m < tg.size() && e[m] < ug[i]) {
            ++m;
        }
        if (m == tg.size()) {
            break;
        }
        const double y = x[m];
        worst = std::max(worst, std::abs(y - acc));
        if (i + 1 < ug.size()) {
            acc += coef(spec.mu, tg[m], ug[i], y) * (ug[i + 1] - ug[i]) + coef(spec.sigma, tg[m], ug[i], y) * (b[i + 1] - b[i]);
        }
    }
    return worst;
}

}  // namespace tcsde
