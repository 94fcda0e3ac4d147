#include "tcsde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcsde/errors.hpp"
#include "tcsde/path_calculus.hpp"
#include "tcsde/rng.hpp"

namespace tcsde {

std::string to_string(Scheme s) { return s == Scheme::EulerDirect ? "euler" : "duality"; }

namespace {

inline double eval(const Coef& c, double t, double u, double x) { return c ? c(t, u, x) : 0.0; }

constexpr double kDivergence = 1e15;

void guard(double x, std::size_t step, double t) {
    if (!std::isfinite(x) || std::abs(x) > kDivergence) {
        throw DivergenceError("solution diverged at step " + std::to_string(step) + " (t=" + std::to_string(t) +
                              ", x=" + std::to_string(x) + ")");
    }
}

double max_step(const std::vector<double>& g) {
    double m = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        m = std::max(m, g[i] - g[i - 1]);
    }
    return m;
}

void require_double(const TimeChangePair& p, const char* who) {
    if (p.bracket != Bracket::Double) {
        throw UnsupportedError(std::string(who) + ": requires a Double-bracket pair");
    }
}

}  // namespace

CadlagPath inner_brownian(const TimeChangePair& pair, std::uint64_t seed, std::uint64_t path_index, unsigned component) {
    const auto& ug = pair.d.grid();
    Philox rng = make_stream(seed, path_index, kNoiseChannel + 16ull * component);
    std::vector<double> b(ug.size());
    b[0] = 0.0;
    for (std::size_t i = 1; i < ug.size(); ++i) {
        b[i] = b[i - 1] + std::sqrt(ug[i] - ug[i - 1]) * rng.normal();
    }
    return CadlagPath(ug, std::move(b), Interp::Linear);
}

DrivingTriple make_driver(const TimeChangePair& pair, std::uint64_t seed, std::uint64_t path_index, unsigned component) {
    require_double(pair, "make_driver");
    CadlagPath b = inner_brownian(pair, seed, path_index, component);
    CadlagPath be = compose(b, pair.e);
    return {pair, std::move(be), std::move(b), seed, path_index};
}

std::vector<DrivingTriple> make_drivers(const TimeChangePair& pair, unsigned n, std::uint64_t seed, std::uint64_t path_index) {
    std::vector<DrivingTriple> out;
    for (unsigned k = 0; k < n; ++k) {
        out.push_back(make_driver(pair, seed, path_index, k));
    }
    return out;
}

std::vector<DrivingTriple> stable_driver_ladder(double beta, std::span<const double> steps, double horizon,
                                                std::uint64_t seed, std::uint64_t path_index) {
    if (steps.empty()) {
        throw ConfigError("driver ladder: no steps");
    }
    const double fine = *std::min_element(steps.begin(), steps.end());
    std::vector<std::size_t> mult;
    std::size_t kmax = 1;
    for (double h : steps) {
        const double r = h / fine;
        const auto k = static_cast<std::size_t>(std::llround(r));
        if (std::abs(r - static_cast<double>(k)) > 1e-9 * r) {
            throw ConfigError("driver ladder: step " + std::to_string(h) + " is not a multiple of " + std::to_string(fine));
        }
        mult.push_back(k);
        kmax = std::lcm(kmax, k);
    }
    StableSubordinatorConfig cfg{beta, fine, fine, seed, path_index};
    MonotonePath d = simulate_stable_subordinator_until(cfg, horizon);
    if (const std::size_t n = d.size() - 1; n % kmax != 0) {
        // same stream, continued to a common length
        cfg.horizon = static_cast<double>((n / kmax + 1) * kmax) * fine;
        d = simulate_stable_subordinator_until(cfg, horizon);
    }
    const auto fine_grid = uniform_grid(fine, horizon);
    const TimeChangePair fine_pair = tcsde::make_pair(d, fine_grid, Bracket::Double);
    const CadlagPath b = inner_brownian(fine_pair, seed, path_index);
    std::vector<DrivingTriple> out;
    for (std::size_t j = 0; j < steps.size(); ++j) {
        TimeChangePair p = tcsde::make_pair(subsample(d, mult[j]), uniform_grid(steps[j], horizon), Bracket::Double);
        CadlagPath bk = subsample(b, mult[j]);
        CadlagPath be = compose(bk, p.e);
        out.push_back({std::move(p), std::move(be), std::move(bk), seed, path_index});
    }
    return out;
}

namespace {

std::vector<double> event_grid(const TimeChangePair& p) {
    const auto& og = p.e.grid();
    const double top = og.back();
    std::vector<double> jumps;
    for (double v : p.d.values()) {
        if (v > 0.0 && v < top) {
            jumps.push_back(v);
        }
    }
    jumps.erase(std::unique(jumps.begin(), jumps.end()), jumps.end());
    // E(0) pinned at 0 with D_0 = 0: split the first cell so that it carries one increment
    if (p.d.interp() == Interp::CadlagStep && p.d.size() > 1 && p.d[0] == 0.0 && og.size() > 1) {
        const double first = jumps.empty() ? og[1] : std::min(jumps.front(), og[1]);
        jumps.insert(jumps.begin(), 0.5 * first);
    }
    return union_grid(og, jumps);
}

std::vector<std::size_t> positions(const std::vector<double>& fine, const std::vector<double>& coarse) {
    std::vector<std::size_t> idx(coarse.size());
    std::size_t j = 0;
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        while (fine[j] != coarse[k]) {
            ++j;
        }
        idx[k] = j;
    }
    return idx;
}

}  // namespace

std::vector<EventDriver> refine_to_events(const std::vector<DrivingTriple>& ds) {
    if (ds.empty()) {
        return {};
    }
    const TimeChangePair& p = ds[0].pair;
    const auto eg = event_grid(p);
    std::vector<EventDriver> out;
    if (eg.size() == p.e.size()) {
        for (const auto& d : ds) {
            std::vector<std::size_t> idx(eg.size());
            for (std::size_t k = 0; k < idx.size(); ++k) {
                idx[k] = k;
            }
            out.push_back({d, std::move(idx)});
        }
        return out;
    }
    MonotonePath e = generalized_inverse(p.d, eg, p.bracket == Bracket::Double);
    // agree with the stored outer values exactly
    auto idx = positions(eg, p.e.grid());
    std::vector<double> ev = e.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
        ev[idx[k]] = p.e[k];
    }
    e = MonotonePath(eg, std::move(ev), Interp::Linear);
    TimeChangePair fine{p.d, e, p.bracket};
    for (const auto& d : ds) {
        if (!d.inner_b) {
            throw UnsupportedError("refine_to_events: driver lacks the inner Brownian path");
        }
        CadlagPath be = compose(*d.inner_b, e);
        out.push_back({DrivingTriple{fine, std::move(be), d.inner_b, d.seed, d.path_index}, idx});
    }
    return out;
}

EventDriver refine_to_events(const DrivingTriple& d) { return std::move(refine_to_events(std::vector<DrivingTriple>{d})[0]); }

CadlagPath to_outer(const CadlagPath& on_events, const EventDriver& ev, const MonotonePath& outer) {
    std::vector<double> v(ev.outer_index.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = on_events[ev.outer_index[k]];
    }
    return CadlagPath(outer.grid(), std::move(v), Interp::Linear);
}

namespace {

CadlagPath euler_on(const SdeSpec& spec, const DrivingTriple& d) {
    const auto& g = d.pair.e.grid();
    const MonotonePath& e = d.pair.e;
    const CadlagPath& be = d.b_of_e;
    std::vector<double> x(g.size());
    x[0] = spec.x0;
    for (std::size_t n = 0; n + 1 < g.size(); ++n) {
        const double t = g[n];
        const double u = e[n];
        const double xn = x[n];
        const double de = e[n + 1] - e[n];
        const double db = be[n + 1] - be[n];
        double nx = xn + eval(spec.rho, t, u, xn) * (g[n + 1] - t);
        if (de != 0.0) {
            nx += eval(spec.mu, t, u, xn) * de;
        }
        if (db != 0.0) {
            nx += eval(spec.sigma, t, u, xn) * db;
        }
        guard(nx, n + 1, g[n + 1]);
        x[n + 1] = nx;
    }
    return CadlagPath(g, std::move(x), Interp::Linear);
}

}  // namespace

SolutionPath solve_euler(const SdeSpec& spec, const DrivingTriple& driver) {
    require_double(driver.pair, "solve_euler");
    if (spec.lipschitz_hint) {
        check_lipschitz(spec, driver);
    }
    const EventDriver ev = refine_to_events(driver);
    const CadlagPath fine = euler_on(spec, ev.driver);
    return {to_outer(fine, ev, driver.pair.e), Scheme::EulerDirect, max_step(ev.driver.pair.e.grid()), driver.seed,
            driver.path_index, spec.name};
}

SolutionPath solve_euler_events(const SdeSpec& spec, const EventDriver& ev) {
    require_double(ev.driver.pair, "solve_euler_events");
    return {euler_on(spec, ev.driver), Scheme::EulerDirect, max_step(ev.driver.pair.e.grid()), ev.driver.seed,
            ev.driver.path_index, spec.name};
}

SolutionPath solve_euler_outer(const SdeSpec& spec, const DrivingTriple& driver) {
    require_double(driver.pair, "solve_euler_outer");
    return {euler_on(spec, driver), Scheme::EulerDirect, max_step(driver.pair.e.grid()), driver.seed, driver.path_index,
            spec.name};
}

SolutionPath solve_duality(const SdeSpec& spec, const DrivingTriple& driver) {
    require_double(driver.pair, "solve_duality");
    if (spec.rho) {
        throw UnsupportedError("solve_duality: the dt coefficient must vanish for the duality route");
    }
    if (!driver.inner_b) {
        throw UnsupportedError("solve_duality: driver lacks the inner Brownian path");
    }
    const CadlagPath& b = *driver.inner_b;
    const auto& ug = b.grid();
    const MonotonePath& d = driver.pair.d;
    // only the part of the inner clock reached by E is needed
    const double top = driver.pair.e.sup_value();
    std::size_t n_used = left_index(ug, top) + 1;
    if (n_used < ug.size() && ug[n_used - 1] < top) {
        ++n_used;
    }
    std::vector<double> y(ug.size(), 0.0);
    y[0] = spec.x0;
    for (std::size_t i = 0; i + 1 < n_used; ++i) {
        const double u = ug[i];
        const double t = d.at(std::min(u, d.horizon()));
        const double yi = y[i];
        const double ny = yi + eval(spec.mu, t, u, yi) * (ug[i + 1] - u) + eval(spec.sigma, t, u, yi) * (b[i + 1] - b[i]);
        guard(ny, i + 1, u);
        y[i + 1] = ny;
    }
    for (std::size_t i = n_used; i < ug.size(); ++i) {
        y[i] = y[n_used - 1];
    }
    const CadlagPath yp(ug, std::move(y), Interp::Linear);
    return {compose(yp, driver.pair.e), Scheme::Duality, max_step(ug), driver.seed, driver.path_index, spec.name};
}

void check_lipschitz(const SdeSpec& spec, const DrivingTriple& driver) {
    const double L = *spec.lipschitz_hint;
    if (!(L > 0.0)) {
        throw ConfigError("lipschitz_hint must be positive");
    }
    const auto& g = driver.pair.e.grid();
    const std::size_t stride = std::max<std::size_t>(1, g.size() / 16);
    const double span = 1.0 + std::abs(spec.x0);
    auto probe = [&](const Coef& c, const char* name) {
        if (!c) {
            return;
        }
        for (std::size_t k = 0; k < g.size(); k += stride) {
            const double t = g[k];
            const double u = driver.pair.e[k];
            for (int a = -8; a < 8; ++a) {
                const double x1 = spec.x0 + span * a / 4.0;
                const double x2 = x1 + span / 7.0;
                const double q = std::abs(c(t, u, x2) - c(t, u, x1)) / (x2 - x1);
                if (q > 1.1 * L) {
                    throw ConfigError(std::string("coefficient '") + name + "' violates lipschitz_hint: quotient " +
                                      std::to_string(q) + " > 1.1*" + std::to_string(L));
                }
            }
        }
    };
    probe(spec.rho, "rho");
    probe(spec.mu, "mu");
    probe(spec.sigma, "sigma");
}

MatrixSolution solve_linear_matrix(const LinearMatrixCoeffs& c, const std::vector<DrivingTriple>& drivers, double max_condition) {
    const int d = c.dim;
    if (d < 1 || d > 8 || drivers.size() > 8) {
        throw ConfigError("solve_linear_matrix: dimension and driver count must be in [1, 8]");
    }
    if (c.sigma2.size() > drivers.size() || c.sigma1.size() > drivers.size()) {
        throw ConfigError("solve_linear_matrix: more noise coefficients than drivers");
    }
    if (c.x0.size() != d) {
        throw ConfigError("solve_linear_matrix: x0 has the wrong dimension");
    }
    for (const auto& dr : drivers) {
        require_double(dr.pair, "solve_linear_matrix");
    }
    const auto evs = refine_to_events(drivers);
    const auto& g = evs.empty() ? drivers.at(0).pair.e.grid() : evs[0].driver.pair.e.grid();
    const MonotonePath& e = evs[0].driver.pair.e;
    const std::size_t n = g.size();
    const std::size_t nb = drivers.size();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    auto mat = [&](const MatFn& f, double t, double u) -> Eigen::MatrixXd { return f ? f(t, u) : Eigen::MatrixXd::Zero(d, d); };
    auto vec = [&](const VecFn& f, double t, double u) -> Eigen::VectorXd { return f ? f(t, u) : Eigen::VectorXd::Zero(d); };

    std::vector<Eigen::MatrixXd> phi(n);
    phi[0] = I;
    // variation-of-constants integral accumulated alongside
    Eigen::VectorXd acc = c.x0;
    std::vector<Eigen::VectorXd> x(n);
    x[0] = c.x0;
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double t = g[m];
        const double u = e[m];
        const double dt = g[m + 1] - t;
        const double de = e[m + 1] - u;
        const Eigen::MatrixXd& P = phi[m];
        Eigen::MatrixXd dP = mat(c.rho2, t, u) * P * dt + mat(c.mu2, t, u) * P * de;
        Eigen::VectorXd mu_eff = vec(c.mu1, t, u);
        Eigen::VectorXd noise = Eigen::VectorXd::Zero(d);
        for (std::size_t k = 0; k < nb; ++k) {
            const double db = evs[k].driver.b_of_e[m + 1] - evs[k].driver.b_of_e[m];
            const MatFn* s2 = k < c.sigma2.size() ? &c.sigma2[k] : nullptr;
            const VecFn* s1 = k < c.sigma1.size() ? &c.sigma1[k] : nullptr;
            Eigen::MatrixXd S2 = s2 ? mat(*s2, t, u) : Eigen::MatrixXd::Zero(d, d);
            Eigen::VectorXd S1 = s1 ? vec(*s1, t, u) : Eigen::VectorXd::Zero(d);
            dP += S2 * P * db;
            mu_eff -= S2 * S1;
            noise += S1 * db;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double cond = sv(0) / sv(sv.size() - 1);
        if (!(cond <= max_condition)) {
            throw NumericalError("solve_linear_matrix: fundamental solution near-singular at t=" + std::to_string(t) +
                                 " (condition " + std::to_string(cond) + ")");
        }
        const Eigen::MatrixXd Pinv = svd.solve(I);
        // ds part by trapezoid needs the next Phi; use left point for the stochastic parts
        acc += Pinv * (mu_eff * de + noise);
        phi[m + 1] = P + dP;
        const Eigen::MatrixXd Pn_inv = phi[m + 1].inverse();
        acc += 0.5 * dt * (Pinv * vec(c.rho1, t, u) + Pn_inv * vec(c.rho1, g[m + 1], e[m + 1]));
        x[m + 1] = phi[m + 1] * acc;
    }
    // report on the outer grid
    MatrixSolution out;
    for (std::size_t k : evs[0].outer_index) {
        out.grid.push_back(g[k]);
        out.phi.push_back(phi[k]);
        out.x.push_back(x[k]);
    }
    return out;
}

}  // namespace tcsde
