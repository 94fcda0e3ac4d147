#include "tcsde/timechange.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcsde/errors.hpp"
#include "tcsde/rng.hpp"

namespace tcsde {

void StableSubordinatorConfig::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw ConfigError("stable subordinator: beta must lie in (0,1), got " + std::to_string(beta));
    }
    if (!(step > 0.0)) {
        throw ConfigError("stable subordinator: step must be positive");
    }
    if (!(horizon >= step)) {
        throw ConfigError("stable subordinator: horizon must be >= step");
    }
}

namespace {

MonotonePath simulate(const StableSubordinatorConfig& cfg, double level) {
    cfg.validate();
    Philox rng = make_stream(cfg.seed, cfg.path_index, kClockChannel);
    const double scale = std::pow(cfg.step, 1.0 / cfg.beta);
    const auto n_min = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.step));
    std::vector<double> grid{0.0};
    std::vector<double> values{0.0};
    grid.reserve(n_min + 1);
    values.reserve(n_min + 1);
    double d = 0.0;
    for (std::size_t i = 1; i <= n_min || !(d > level); ++i) {
        d += scale * rng.stable(cfg.beta);
        grid.push_back(static_cast<double>(i) * cfg.step);
        values.push_back(d);
    }
    return MonotonePath(std::move(grid), std::move(values), Interp::CadlagStep);
}

}  // namespace

MonotonePath simulate_stable_subordinator(const StableSubordinatorConfig& cfg) { return simulate(cfg, -1.0); }

MonotonePath simulate_stable_subordinator_until(const StableSubordinatorConfig& cfg, double level) {
    return simulate(cfg, level);
}

MonotonePath generalized_inverse(const MonotonePath& d, std::span<const double> out_grid, bool strictly_increasing) {
    const auto& g = d.grid();
    const auto& v = d.values();
    const double sup = d.sup_value();
    // A strictly increasing path leaves its start immediately, so the infimum at the
    // starting level is the starting time even though the step representation holds it for one cell.
    const bool pin_start = strictly_increasing || d.strictly_increasing();
    std::vector<double> out(out_grid.size());
    std::size_t j = 0;
    double prev_t = -1.0;
    for (std::size_t k = 0; k < out_grid.size(); ++k) {
        const double t = out_grid[k];
        if (!(t > prev_t)) {
            throw GridError("generalized_inverse: out_grid must be strictly increasing");
        }
        prev_t = t;
        if (!(t < sup)) {
            throw HorizonError("generalized_inverse: level " + std::to_string(t) +
                               " not below the path supremum " + std::to_string(sup));
        }
        while (!(v[j] > t)) {
            ++j;
        }
        if (pin_start && t == v[0]) {
            out[k] = g[0];
        } else if (j == 0 || d.interp() == Interp::CadlagStep) {
            out[k] = g[j];
        } else {
            const double w = (t - v[j - 1]) / (v[j] - v[j - 1]);
            out[k] = std::min(g[j], g[j - 1] + w * (g[j] - g[j - 1]));
        }
    }
    return MonotonePath({out_grid.begin(), out_grid.end()}, std::move(out), Interp::Linear);
}

TimeChangePair make_pair(const MonotonePath& d, std::span<const double> out_grid, std::optional<Bracket> known) {
    const Bracket b = known ? *known : (d.strictly_increasing() ? Bracket::Double : Bracket::Single);
    MonotonePath e = generalized_inverse(d, out_grid, b == Bracket::Double);
    return {d, std::move(e), b};
}

TimeChangePair make_pair_from_time_change(const MonotonePath& e, std::span<const double> inner_grid) {
    MonotonePath d = generalized_inverse(e, inner_grid);
    const bool e_continuous = e.interp() == Interp::Linear || [&] {
        for (std::size_t i = 1; i < e.size(); ++i) {
            if (e[i] != e[i - 1]) {
                return false;
            }
        }
        return true;
    }();
    const Bracket b = (d.strictly_increasing() && e_continuous) ? Bracket::Double : Bracket::Single;
    return {std::move(d), e, b};
}

bool is_synchronized(const CadlagPath& z, const MonotonePath& t, double tol) {
    if (t.interp() == Interp::Linear) {
        return true;
    }
    const auto& zg = z.grid();
    auto constant_on = [&](double a, double b) {
        b = std::min(b, z.horizon());
        if (a > b) {
            return true;
        }
        double lo = z.at(a);
        double hi = lo;
        auto upd = [&](double x) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        };
        upd(z.at(b));
        auto first = std::upper_bound(zg.begin(), zg.end(), a);
        for (auto it = first; it != zg.end() && *it <= b; ++it) {
            const auto i = static_cast<std::size_t>(it - zg.begin());
            upd(z[i]);
            upd(z.left_limit(i));
        }
        return hi - lo <= tol;
    };
    // t(0-) = 0
    if (t[0] > 0.0 && !constant_on(0.0, t[0])) {
        return false;
    }
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] > t[i - 1] && !constant_on(t[i - 1], t[i])) {
            return false;
        }
    }
    return true;
}

TimeChangePair identity_pair(std::span<const double> grid) {
    std::vector<double> g(grid.begin(), grid.end());
    MonotonePath id(g, g, Interp::Linear);
    return {id, id, Bracket::Double};
}

TimeChangePair scaled_pair(double rate, std::span<const double> out_grid) {
    if (!(rate > 0.0)) {
        throw ConfigError("scaled clock: rate must be positive");
    }
    std::vector<double> og(out_grid.begin(), out_grid.end());
    std::vector<double> ev(og.size());
    for (std::size_t k = 0; k < og.size(); ++k) {
        ev[k] = rate * og[k];
    }
    MonotonePath e(og, ev, Interp::Linear);
    // inner grid = range of E, so that B is sampled exactly where it is composed
    MonotonePath d(ev, og, Interp::Linear);
    return {std::move(d), std::move(e), Bracket::Double};
}

TimeChangePair inverse_stable_pair(double beta, double inner_step, std::span<const double> out_grid,
                                   std::uint64_t seed, std::uint64_t path_index) {
    // only as long as needed to pass the outer horizon
    StableSubordinatorConfig cfg{beta, inner_step, inner_step, seed, path_index};
    MonotonePath d = simulate_stable_subordinator_until(cfg, out_grid.back());
    // every sampled increment is positive; stored values may still tie when an
    // increment is below the floating-point spacing of the running level
    return tcsde::make_pair(d, out_grid, Bracket::Double);
}

TimeChangePair normalized_pair(const TimeChangePair& p, double level) {
    const double top = p.e.sup_value();
    if (!(top > 0.0) || !(level > 0.0)) {
        throw ConfigError("normalized_pair: clock must move and level must be positive");
    }
    // D'(u) = D(u top / level), so E' = E level / top up to rounding of the grid
    const double f = level / top;
    std::vector<double> dg(p.d.grid());
    for (double& x : dg) {
        x *= f;
    }
    MonotonePath d(std::move(dg), p.d.values(), p.d.interp());
    return tcsde::make_pair(d, p.e.grid(), p.bracket);
}

TimeChangePair pinned_stable_pair(double beta, double inner_step, double level, std::span<const double> out_grid,
                                  std::uint64_t seed, std::uint64_t path_index) {
    if (!(level > 0.0) || out_grid.empty() || !(out_grid.back() > 0.0)) {
        throw ConfigError("pinned_stable_pair: level and horizon must be positive");
    }
    StableSubordinatorConfig cfg{beta, inner_step, level, seed, path_index};
    const MonotonePath raw = simulate_stable_subordinator(cfg);
    // E(D(u_j)) = u_{j+1}: pin D(u_{n-1}) to the horizon so that E(horizon) = u_n = level
    const auto& rv = raw.values();
    if (rv.size() < 3) {
        throw ConfigError("pinned_stable_pair: level must span at least two inner steps");
    }
    const double f = out_grid.back() / rv[rv.size() - 2];
    std::vector<double> dv(raw.values());
    for (double& x : dv) {
        x *= f;
    }
    MonotonePath d(raw.grid(), std::move(dv), raw.interp());
    return tcsde::make_pair(d, out_grid, Bracket::Double);
}

TimeChangePair unit_step_pair(std::span<const double> out_grid, std::span<const double> inner_grid) {
    std::vector<double> ev(out_grid.size());
    for (std::size_t k = 0; k < out_grid.size(); ++k) {
        ev[k] = out_grid[k] >= 1.0 ? 1.0 : 0.0;
    }
    MonotonePath e({out_grid.begin(), out_grid.end()}, std::move(ev), Interp::CadlagStep);
    return make_pair_from_time_change(e, inner_grid);
}

double flat_fraction(const MonotonePath& e) {
    if (e.size() < 2) {
        return 1.0;
    }
    std::size_t flat = 0;
    for (std::size_t i = 1; i < e.size(); ++i) {
        flat += e[i] == e[i - 1];
    }
    return static_cast<double>(flat) / static_cast<double>(e.size() - 1);
}

}  // namespace tcsde
