#include "tcsde/path_calculus.hpp"

#include <algorithm>
#include <cmath>

#include "tcsde/errors.hpp"

namespace tcsde {

namespace {

double max_step(const std::vector<double>& g) {
    double m = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        m = std::max(m, g[i] - g[i - 1]);
    }
    return m;
}

CadlagPath on_grid(const CadlagPath& p, std::span<const double> g) {
    if (p.grid().size() == g.size() && std::equal(g.begin(), g.end(), p.grid().begin())) {
        return p;
    }
    return p.refined(g);
}

}  // namespace

Residual residual_between(const std::vector<double>& lhs, const std::vector<double>& rhs) {
    Residual r;
    double ss = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double d = std::abs(lhs[i] - rhs[i]);
        r.sup = std::max(r.sup, d);
        ss += d * d;
    }
    r.rms = lhs.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(lhs.size()));
    return r;
}

IntegralResult ito_sum(const CadlagPath& h, const CadlagPath& z) {
    if (h.grid() != z.grid()) {
        throw GridError("ito_sum: integrand and integrator must share a grid");
    }
    const std::size_t n = z.size();
    std::vector<double> out(n);
    std::vector<Jump> js;
    out[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double hl = h[i - 1];
        if (const Jump* j = z.find_jump(i)) {
            const double ll = out[i - 1] + hl * (j->left_limit - z[i - 1]);
            js.push_back({i, ll});
            out[i] = ll + hl * (z[i] - j->left_limit);
        } else {
            out[i] = out[i - 1] + hl * (z[i] - z[i - 1]);
        }
    }
    return {CadlagPath(z.grid(), std::move(out), z.interp(), std::move(js)), max_step(z.grid())};
}

CadlagPath quadratic_variation(const CadlagPath& z) {
    const std::size_t n = z.size();
    std::vector<double> out(n);
    std::vector<Jump> js;
    out[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        if (const Jump* j = z.find_jump(i)) {
            const double c = j->left_limit - z[i - 1];
            const double ll = out[i - 1] + c * c;
            const double d = z[i] - j->left_limit;
            js.push_back({i, ll});
            out[i] = ll + d * d;
        } else {
            const double d = z[i] - z[i - 1];
            out[i] = out[i - 1] + d * d;
        }
    }
    return CadlagPath(z.grid(), std::move(out), z.interp(), std::move(js));
}

CadlagPath combine(const CadlagPath& y, double a, const CadlagPath& z, double b) {
    const auto g = union_grid(y.grid(), z.grid());
    const CadlagPath yr = on_grid(y, g);
    const CadlagPath zr = on_grid(z, g);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        v[i] = a * yr[i] + b * zr[i];
    }
    std::vector<Jump> js;
    for (std::size_t i = 1; i < g.size(); ++i) {
        if (yr.find_jump(i) || zr.find_jump(i)) {
            js.push_back({i, a * yr.left_limit(i) + b * zr.left_limit(i)});
        }
    }
    const Interp ip = (y.interp() == Interp::Linear || z.interp() == Interp::Linear) ? Interp::Linear : Interp::CadlagStep;
    return CadlagPath(g, std::move(v), ip, std::move(js));
}

CadlagPath multiply(const CadlagPath& y, const CadlagPath& z) {
    const auto g = union_grid(y.grid(), z.grid());
    const CadlagPath yr = on_grid(y, g);
    const CadlagPath zr = on_grid(z, g);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        v[i] = yr[i] * zr[i];
    }
    std::vector<Jump> js;
    for (std::size_t i = 1; i < g.size(); ++i) {
        if (yr.find_jump(i) || zr.find_jump(i)) {
            js.push_back({i, yr.left_limit(i) * zr.left_limit(i)});
        }
    }
    const Interp ip = (y.interp() == Interp::Linear || z.interp() == Interp::Linear) ? Interp::Linear : Interp::CadlagStep;
    return CadlagPath(g, std::move(v), ip, std::move(js));
}

CadlagPath covariation(const CadlagPath& y, const CadlagPath& z) {
    const CadlagPath qp = quadratic_variation(combine(y, 1.0, z, 1.0));
    const CadlagPath qm = quadratic_variation(combine(y, 1.0, z, -1.0));
    return combine(qp, 0.25, qm, -0.25);
}

CadlagPath compose(const CadlagPath& z, const MonotonePath& e) {
    const double top = e.sup_value();
    if (top > z.horizon() * (1.0 + 1e-12) + 1e-300) {
        throw HorizonError("compose: range of the time change (" + std::to_string(top) + ") exceeds the path horizon (" +
                           std::to_string(z.horizon()) + ")");
    }
    std::vector<double> v(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        v[k] = z.at(std::min(e[k], z.horizon()));
    }
    std::vector<Jump> js;
    Interp ip = z.interp();
    if (e.interp() == Interp::CadlagStep) {
        ip = Interp::CadlagStep;
        for (std::size_t k = 1; k < e.size(); ++k) {
            if (e[k] != e[k - 1]) {
                js.push_back({k, v[k - 1]});
            }
        }
    }
    return CadlagPath(e.grid(), std::move(v), ip, std::move(js));
}

double left_limit_at(const MonotonePath& d, double u) {
    if (u <= 0.0) {
        return 0.0;
    }
    if (d.interp() == Interp::Linear) {
        return d.at(std::min(u, d.horizon()));
    }
    const auto& g = d.grid();
    auto it = std::lower_bound(g.begin(), g.end(), u);
    return d[static_cast<std::size_t>(it - g.begin()) - 1];
}

double at_inverse_clock(const CadlagPath& k, const MonotonePath& d, double u) {
    const double s = left_limit_at(d, u);
    return k.left_value(std::min(s, k.horizon()));
}

namespace {

// Running inner sum of w(u_i) * dz_i, read off at the values of e.
std::vector<double> inner_running_at(const CadlagPath& z, const std::vector<double>& w, const MonotonePath& e) {
    const std::size_t n = z.size();
    std::vector<double> run(n);
    run[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        run[i] = run[i - 1] + w[i - 1] * (z[i] - z[i - 1]);
    }
    const CadlagPath rp(z.grid(), std::move(run), z.interp());
    std::vector<double> out(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        out[k] = rp.at(std::min(e[k], rp.horizon()));
    }
    return out;
}

}  // namespace

Residual verify_first_cov(const CadlagPath& h, const CadlagPath& z, const TimeChangePair& pair) {
    const MonotonePath& e = pair.e;
    // inner clock: int_0^u H dZ
    const CadlagPath hz = on_grid(h, z.grid());
    const IntegralResult in = ito_sum(hz, z);
    std::vector<double> lhs(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        lhs[k] = in.path.at(std::min(e[k], in.path.horizon()));
    }
    // outer clock: H evaluated at T of the cell's left point
    const CadlagPath ze = compose(z, e);
    std::vector<double> he(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        he[k] = h.at(std::min(e[k], h.horizon()));
    }
    const IntegralResult out = ito_sum(CadlagPath(e.grid(), std::move(he), Interp::CadlagStep), ze);
    return residual_between(lhs, out.path.values());
}

CadlagPath integrate_on_inner_clock(const CadlagPath& k, const CadlagPath& z, const TimeChangePair& pair) {
    const MonotonePath& e = pair.e;
    std::vector<double> w(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        w[i] = z.grid()[i] <= pair.d.horizon() ? at_inverse_clock(k, pair.d, z.grid()[i]) : 0.0;
    }
    return CadlagPath(e.grid(), inner_running_at(z, w, e), Interp::Linear);
}

Residual verify_second_cov(const CadlagPath& k, const CadlagPath& z, const TimeChangePair& pair) {
    const MonotonePath& e = pair.e;
    const CadlagPath ko = on_grid(k, e.grid());
    const CadlagPath ze = compose(z, e);
    const IntegralResult lhs = ito_sum(ko, ze);
    return residual_between(lhs.path.values(), integrate_on_inner_clock(ko, z, pair).values());
}

Residual verify_qv_composition(const CadlagPath& z, const TimeChangePair& pair) {
    const CadlagPath lhs = quadratic_variation(compose(z, pair.e));
    const CadlagPath rhs = compose(quadratic_variation(z), pair.e);
    return residual_between(lhs.values(), rhs.values());
}

CadlagPath assemble_x(const ItoIntegrands& in, const CadlagPath& z, const TimeChangePair& pair) {
    const MonotonePath& e = pair.e;
    const auto& g = e.grid();
    const CadlagPath a = on_grid(in.a, g);
    const CadlagPath f = on_grid(in.f, g);
    const CadlagPath gg = on_grid(in.g, g);
    const CadlagPath ze = compose(z, e);
    std::vector<double> x(g.size());
    x[0] = 0.0;
    for (std::size_t m = 1; m < g.size(); ++m) {
        x[m] = x[m - 1] + a[m - 1] * (g[m] - g[m - 1]) + f[m - 1] * (e[m] - e[m - 1]) + gg[m - 1] * (ze[m] - ze[m - 1]);
    }
    return CadlagPath(g, std::move(x), Interp::Linear);
}

Residual verify_tc_ito(const ItoIntegrands& in, const CadlagPath& z, const TimeChangePair& pair, const C2Function& fn) {
    if (pair.bracket != Bracket::Double) {
        throw UnsupportedError("verify_tc_ito: requires a Double-bracket pair (continuous time change)");
    }
    const MonotonePath& e = pair.e;
    const auto& g = e.grid();
    const CadlagPath a = on_grid(in.a, g);
    const CadlagPath f = on_grid(in.f, g);
    const CadlagPath gg = on_grid(in.g, g);
    const CadlagPath x = assemble_x(in, z, pair);

    std::vector<double> lhs(g.size());
    const double f0 = fn.f(0.0);
    for (std::size_t m = 0; m < g.size(); ++m) {
        lhs[m] = fn.f(x[m]) - f0;
    }

    // clock-time part
    std::vector<double> rhs(g.size());
    rhs[0] = 0.0;
    for (std::size_t m = 1; m < g.size(); ++m) {
        rhs[m] = rhs[m - 1] + fn.df(x[m - 1]) * a[m - 1] * (g[m] - g[m - 1]);
    }

    // inner-clock parts
    const auto& zg = z.grid();
    const std::size_t n = z.size();
    std::vector<double> run(n);
    run[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double u = zg[i - 1];
        double inc = 0.0;
        if (u <= pair.d.horizon()) {
            // X between outer points follows its own construction with the cell's integrands
            const double s = std::min(left_limit_at(pair.d, u), g.back());
            const std::size_t k = left_index(g, s);
            const double fs = f[k];
            const double gs = gg[k];
            const double xs = x[k] + a[k] * (s - g[k]) + fs * (u - e[k]) + gs * (z.at(u) - z.at(std::min(e[k], z.horizon())));
            const double du = zg[i] - u;
            inc = fn.df(xs) * (fs * du + gs * (z[i] - z[i - 1])) + 0.5 * fn.d2f(xs) * gs * gs * du;
        }
        run[i] = run[i - 1] + inc;
    }
    const CadlagPath rp(zg, std::move(run), z.interp());
    for (std::size_t m = 0; m < g.size(); ++m) {
        rhs[m] += rp.at(std::min(e[m], rp.horizon()));
    }
    return residual_between(lhs, rhs);
}

}  // namespace tcsde
