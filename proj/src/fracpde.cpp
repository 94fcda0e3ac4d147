#include "tcsde/fracpde.hpp"

#include <algorithm>
#include <cmath>

#include "tcsde/ensemble.hpp"
#include "tcsde/errors.hpp"
#include "tcsde/timechange.hpp"

namespace tcsde {

void FracPdeProblem::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw ConfigError("fracpde: beta must lie in (0,1)");
    }
    if (!(y_min < x_init && x_init < y_max)) {
        throw ConfigError("fracpde: need y_min < x_init < y_max");
    }
    if (ny < 64 || nt < 64) {
        throw ConfigError("fracpde: ny and nt must be at least 64");
    }
    if (!(t_final > 0.0)) {
        throw ConfigError("fracpde: t_final must be positive");
    }
    for (double t : snapshot_times) {
        if (!(t > 0.0 && t <= t_final)) {
            throw ConfigError("fracpde: snapshot times must lie in (0, t_final]");
        }
    }
}

double DensityGrid::cell_width() const { return y_nodes.size() > 1 ? y_nodes[1] - y_nodes[0] : 1.0; }

double DensityGrid::total_mass() const {
    double s = 0.0;
    for (double m : masses) {
        s += m;
    }
    return s * cell_width();
}

double DensityGrid::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        s += y_nodes[i] * masses[i];
    }
    return s * cell_width() / total_mass();
}

double DensityGrid::variance() const {
    const double m = mean();
    double s = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        s += (y_nodes[i] - m) * (y_nodes[i] - m) * masses[i];
    }
    return s * cell_width() / total_mass();
}

namespace {

// N(mean, var) mass of [a, b]
double normal_mass(double a, double b, double mean, double var) {
    const double s = std::sqrt(2.0 * var);
    return 0.5 * (std::erf((b - mean) / s) - std::erf((a - mean) / s));
}

void thomas(std::vector<double>& lo, std::vector<double>& di, std::vector<double>& up, std::vector<double>& r) {
    const std::size_t n = di.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (!(std::abs(di[i - 1]) > 0.0)) {
            throw NumericalError("fracpde: zero pivot in tridiagonal solve");
        }
        const double w = lo[i] / di[i - 1];
        di[i] -= w * up[i - 1];
        r[i] -= w * r[i - 1];
    }
    r[n - 1] /= di[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        r[i] = (r[i] - up[i] * r[i + 1]) / di[i];
    }
    for (double x : r) {
        if (!std::isfinite(x)) {
            throw NumericalError("fracpde: tridiagonal solve produced a non-finite value");
        }
    }
}

}  // namespace

std::vector<DensityGrid> solve_caputo_fpe(const FracPdeProblem& prob_in) {
    prob_in.validate();
    FracPdeProblem prob = prob_in;
    auto mu = [&](double y) { return prob.mu_fn ? prob.mu_fn(y) : 0.0; };
    auto sig = [&](double y) { return prob.sigma_fn ? prob.sigma_fn(y) : 1.0; };

    if (prob.auto_widen) {
        double smax = 0.0;
        for (int k = 0; k <= 64; ++k) {
            smax = std::max(smax, std::abs(sig(prob.y_min + (prob.y_max - prob.y_min) * k / 64.0)));
        }
        const double w = 8.0 * smax * std::sqrt(prob.t_final);
        prob.y_min = std::min(prob.y_min, prob.x_init - w);
        prob.y_max = std::max(prob.y_max, prob.x_init + w);
    }

    const auto n = static_cast<std::size_t>(prob.ny);
    const double dy = (prob.y_max - prob.y_min) / prob.ny;
    std::vector<double> y(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = prob.y_min + (static_cast<double>(i) + 0.5) * dy;
        const double sg = sig(y[i]);
        if (!(sg > 0.0)) {
            throw ConfigError("fracpde: sigma must be positive on the domain");
        }
        s[i] = sg * sg;
    }

    // L as three diagonals; columns sum to zero so the solve conserves mass
    std::vector<double> Llo(n, 0.0), Ldi(n, 0.0), Lup(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double m = mu(0.5 * (y[i] + y[i + 1]));
        const double a = 0.5 * m + s[i] / (2.0 * dy);
        const double b = 0.5 * m - s[i + 1] / (2.0 * dy);
        Ldi[i] -= a / dy;
        Lup[i] -= b / dy;
        Llo[i + 1] += a / dy;
        Ldi[i + 1] += b / dy;
    }

    const double dt = prob.t_final / prob.nt;
    const double beta = prob.beta;
    const double c = std::tgamma(2.0 - beta) * std::pow(dt, beta);
    std::vector<double> bw(static_cast<std::size_t>(prob.nt) + 1);
    for (std::size_t k = 0; k < bw.size(); ++k) {
        bw[k] = std::pow(static_cast<double>(k + 1), 1.0 - beta) - std::pow(static_cast<double>(k), 1.0 - beta);
    }

    std::vector<int> snap_steps;
    for (double t : prob.snapshot_times) {
        snap_steps.push_back(std::max(1, static_cast<int>(std::lround(t / dt))));
    }
    snap_steps.push_back(prob.nt);
    std::sort(snap_steps.begin(), snap_steps.end());
    snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

    // mollified Dirac mass
    std::vector<std::vector<double>> hist;
    hist.reserve(static_cast<std::size_t>(prob.nt) + 1);
    {
        std::vector<double> p0(n);
        const double var0 = 4.0 * dy * dy;
        double tot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p0[i] = normal_mass(y[i] - 0.5 * dy, y[i] + 0.5 * dy, prob.x_init, var0);
            tot += p0[i];
        }
        for (double& v : p0) {
            v /= tot * dy;
        }
        hist.push_back(std::move(p0));
    }

    std::vector<DensityGrid> out;
    double clipped_total = 0.0;
    std::size_t next_snap = 0;
    std::vector<double> lo(n), di(n), up(n), r(n);
    for (int step = 1; step <= prob.nt; ++step) {
        const auto ns = static_cast<std::size_t>(step);
        // rhs = p^{n-1} - sum_{k=1}^{n-1} b_k (p^{n-k} - p^{n-k-1})
        r = hist[ns - 1];
        for (std::size_t k = 1; k < ns; ++k) {
            const auto& a = hist[ns - k];
            const auto& b = hist[ns - k - 1];
            const double w = bw[k];
            for (std::size_t i = 0; i < n; ++i) {
                r[i] -= w * (a[i] - b[i]);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = -c * Llo[i];
            di[i] = 1.0 - c * Ldi[i];
            up[i] = -c * Lup[i];
        }
        thomas(lo, di, up, r);
        double neg = 0.0, tot = 0.0;
        for (double& v : r) {
            tot += v;
            if (v < 0.0) {
                neg -= v;
                v = 0.0;
            }
        }
        if (neg > 0.0) {
            const double f = tot / (tot + neg);
            for (double& v : r) {
                v *= f;
            }
            clipped_total += neg * dy;
        }
        hist.push_back(r);
        if (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
            DensityGrid g{y, r, step * dt, clipped_total, {}};
            if (clipped_total > 0.01) {
                g.warning = "clipped mass " + std::to_string(clipped_total) + " exceeds 1%";
            }
            out.push_back(std::move(g));
            ++next_snap;
        }
    }
    return out;
}

DensityGrid mc_density(const SdeSpec& spec, const McDensityConfig& cfg, std::size_t* total_outside) {
    if (cfg.bins < 2 || !(cfg.y_max > cfg.y_min)) {
        throw ConfigError("mc_density: need bins >= 2 and y_max > y_min");
    }
    if (spec.rho) {
        throw UnsupportedError("mc_density: the dt coefficient must vanish");
    }
    const std::vector<double> og{0.0, cfg.t_final};
    const auto xs = run_ensemble(cfg.n_paths, resolve_threads(cfg.threads), [&](std::size_t i) {
        const TimeChangePair pair = inverse_stable_pair(cfg.beta, cfg.inner_step, og, cfg.seed, i);
        const DrivingTriple drv = make_driver(pair, cfg.seed, i);
        return solve_duality(spec, drv).path.values().back();
    });
    const double w = (cfg.y_max - cfg.y_min) / cfg.bins;
    DensityGrid g;
    g.time = cfg.t_final;
    g.y_nodes.resize(static_cast<std::size_t>(cfg.bins));
    g.masses.assign(static_cast<std::size_t>(cfg.bins), 0.0);
    for (int k = 0; k < cfg.bins; ++k) {
        g.y_nodes[static_cast<std::size_t>(k)] = cfg.y_min + (k + 0.5) * w;
    }
    std::size_t outside = 0;
    for (double x : xs) {
        const double pos = (x - cfg.y_min) / w;
        if (!(pos >= 0.0 && pos < cfg.bins)) {
            ++outside;
            continue;
        }
        g.masses[static_cast<std::size_t>(pos)] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(cfg.n_paths) * w);
    for (double& m : g.masses) {
        m *= norm;
    }
    if (total_outside) {
        *total_outside = outside;
    }
    return g;
}

namespace {

// Cell masses of g moved onto the cells of `to` by overlap; mass falling outside is returned in `outside`.
std::vector<double> rebin(const DensityGrid& g, const DensityGrid& to, double& outside) {
    const double wg = g.cell_width();
    const double wt = to.cell_width();
    const double lo_t = to.y_nodes.front() - 0.5 * wt;
    const std::size_t nt = to.y_nodes.size();
    std::vector<double> m(nt, 0.0);
    outside = 0.0;
    for (std::size_t i = 0; i < g.y_nodes.size(); ++i) {
        const double mass = g.masses[i] * wg;
        if (mass == 0.0) {
            continue;
        }
        const double a = g.y_nodes[i] - 0.5 * wg;
        const double b = a + wg;
        double placed = 0.0;
        const double fa = (a - lo_t) / wt;
        const double fb = (b - lo_t) / wt;
        const auto ka = static_cast<long>(std::floor(fa));
        const auto kb = static_cast<long>(std::floor(fb));
        for (long k = std::max(0L, ka); k <= std::min(static_cast<long>(nt) - 1, kb); ++k) {
            const double cl = lo_t + static_cast<double>(k) * wt;
            const double ov = std::min(b, cl + wt) - std::max(a, cl);
            if (ov > 0.0) {
                const double part = mass * ov / wg;
                m[static_cast<std::size_t>(k)] += part;
                placed += part;
            }
        }
        outside += mass - placed;
    }
    return m;
}

}  // namespace

DensityComparison compare_densities(const DensityGrid& a, const DensityGrid& b) {
    if (a.y_nodes.size() < 2 || b.y_nodes.size() < 2) {
        throw ConfigError("compare_densities: each density needs at least two nodes");
    }
    const DensityGrid& coarse = a.cell_width() >= b.cell_width() ? a : b;
    double oa = 0.0, ob = 0.0;
    const auto ma = rebin(a, coarse, oa);
    const auto mb = rebin(b, coarse, ob);
    DensityComparison r;
    double ca = 0.0, cb = 0.0;
    for (std::size_t k = 0; k < ma.size(); ++k) {
        r.l1 += std::abs(ma[k] - mb[k]);
        ca += ma[k];
        cb += mb[k];
        r.ks = std::max(r.ks, std::abs(ca - cb));
    }
    r.l1 += std::abs(oa - ob);
    return r;
}

DensityGrid gaussian_density(const DensityGrid& like, double mean, double var) {
    DensityGrid g{like.y_nodes, std::vector<double>(like.y_nodes.size()), like.time, 0.0, {}};
    const double w = like.cell_width();
    for (std::size_t i = 0; i < g.masses.size(); ++i) {
        g.masses[i] = normal_mass(g.y_nodes[i] - 0.5 * w, g.y_nodes[i] + 0.5 * w, mean, var) / w;
    }
    return g;
}

}  // namespace tcsde
