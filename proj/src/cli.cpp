#include "tcsde/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "tcsde/closed_form.hpp"
#include "tcsde/ensemble.hpp"
#include "tcsde/errors.hpp"
#include "tcsde/experiments.hpp"
#include "tcsde/fracpde.hpp"
#include "tcsde/special_fn.hpp"
#include "tcsde/timechange.hpp"

namespace tcsde {

namespace {

using nlohmann::json;

// e^{x^2} erfc(x); the product overflows past x ~ 26, use the continued fraction there
double erfcx(double x) {
    if (x < 20.0) {
        return std::exp(x * x) * std::erfc(x);
    }
    double f = x;
    for (int k = 200; k >= 1; --k) {
        f = x + 0.5 * k / f;
    }
    return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

struct Assertion {
    std::string name;
    bool passed;
    double value;
    std::string rule;
};

json to_json(const Assertion& a) {
    return {{"name", a.name}, {"passed", a.passed}, {"value", std::isfinite(a.value) ? json(a.value) : json(format_double(a.value))},
            {"rule", a.rule}};
}

struct Ctx {
    const Config& cfg;
    unsigned threads;
    std::ostream& log;
    ArtifactWriter out;
    std::uint64_t seed;
    std::size_t n_paths;
    std::vector<Assertion> asserts;

    void expect(const std::string& name, bool ok, double value, const std::string& rule) {
        asserts.push_back({name, ok, value, rule});
    }
};

std::size_t positive_count(const Config& c, const std::string& key, long long fallback) {
    const long long v = c.get_int(key, fallback);
    if (v < 1) {
        throw ConfigError(c.where(key) + ": must be >= 1");
    }
    return static_cast<std::size_t>(v);
}

double positive(const Config& c, const std::string& key, double fallback) {
    const double v = c.get_double(key, fallback);
    if (!(v > 0.0)) {
        throw ConfigError(c.where(key) + ": must be positive");
    }
    return v;
}

double beta_of(const Config& c, const std::string& key, double fallback) {
    const double b = c.get_double(key, fallback);
    if (!(b > 0.0 && b < 1.0)) {
        throw ConfigError(c.where(key) + ": beta must lie in (0,1)");
    }
    return b;
}

ModelPreset model_of(const Config& c) {
    ModelPreset m;
    try {
        m.name = preset_from_string(c.get_string("model.preset", "black_scholes"));
    } catch (const ConfigError& e) {
        throw ConfigError(c.where("model.preset") + ": " + e.what());
    }
    for (const auto& [k, v] : c.section("model")) {
        if (k != "preset") {
            m.params[k] = c.get_double("model." + k);
        }
    }
    m.validate();
    return m;
}

MonotonePath read_user_clock(const std::string& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("clock.file: cannot read '" + file + "'");
    }
    std::string line;
    std::getline(in, line);
    std::vector<double> t, e;
    int n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
            throw ConfigError("clock.file: " + file + ":" + std::to_string(n) + ": expected t,e");
        }
        try {
            t.push_back(std::stod(a));
            e.push_back(std::stod(b));
        } catch (const std::exception&) {
            throw ConfigError("clock.file: " + file + ":" + std::to_string(n) + ": bad number");
        }
    }
    if (t.size() < 2) {
        throw ConfigError("clock.file: " + file + ": needs at least two rows");
    }
    return MonotonePath(std::move(t), std::move(e), Interp::Linear);
}

// Driver of path i for the [clock] and [grid] sections.
DrivingTriple driver_for(const Config& c, std::uint64_t seed, std::size_t i) {
    const std::string kind = c.get_string("clock.kind", "inverse_stable");
    const double step = positive(c, "grid.step", 1e-2);
    const double horizon = positive(c, "grid.horizon", 1.0);
    const auto og = uniform_grid(step, horizon);
    if (kind == "identity") {
        return make_driver(identity_pair(og), seed, i);
    }
    if (kind == "scaled") {
        return make_driver(scaled_pair(positive(c, "clock.rate", 1.0), og), seed, i);
    }
    if (kind == "inverse_stable") {
        return make_driver(inverse_stable_pair(beta_of(c, "clock.beta", 0.5), positive(c, "clock.inner_step", 1e-3), og, seed, i),
                           seed, i);
    }
    if (kind == "pinned_stable") {
        return make_driver(pinned_stable_pair(beta_of(c, "clock.beta", 0.5), positive(c, "clock.inner_step", 1e-3),
                                              positive(c, "clock.level", 0.9), og, seed, i),
                           seed, i);
    }
    if (kind == "user_path") {
        const MonotonePath e = read_user_clock(c.get_string("clock.file"));
        const double du = positive(c, "clock.inner_step", 1e-3);
        std::vector<double> ig = uniform_grid(du, e.sup_value());
        if (ig.size() > 1 && ig.back() >= e.sup_value()) {
            ig.pop_back();
        }
        return make_driver(make_pair_from_time_change(e, ig), seed, i);
    }
    throw ConfigError(c.where("clock.kind") + ": expected identity, scaled, inverse_stable, pinned_stable or user_path");
}

std::string pad(std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

void cmd_simulate(Ctx& x) {
    const Config& c = x.cfg;
    const ModelPreset m = model_of(c);
    const SdeSpec spec = m.as_spec();
    const std::string scheme = c.get_string("simulate.scheme", "euler");
    if (scheme != "euler" && scheme != "duality" && scheme != "closed_form") {
        throw ConfigError(c.where("simulate.scheme") + ": expected euler, duality or closed_form");
    }
    const std::size_t save = static_cast<std::size_t>(c.get_int("simulate.save_paths", 5));
    auto solve = [&](const DrivingTriple& d) {
        return scheme == "euler" ? solve_euler(spec, d).path : scheme == "duality" ? solve_duality(spec, d).path : preset_solution(m, d);
    };
    const auto terminal =
        run_ensemble(x.n_paths, x.threads, [&](std::size_t i) { return solve(driver_for(c, x.seed, i)).values().back(); });
    // the first few paths again, in full
    for (std::size_t i = 0; i < std::min(save, x.n_paths); ++i) {
        const DrivingTriple d = driver_for(c, x.seed, i);
        const CadlagPath p = solve(d);
        x.out.write("paths/path_" + pad(i) + ".csv",
                    csv_table({"t", "E", "B_E", "X"}, {p.grid(), d.pair.e.values(), d.b_of_e.values(), p.values()}));
    }
    json rep{{"command", "simulate"}, {"model", to_string(m.name)}, {"scheme", scheme}, {"n", x.n_paths}, {"seed", x.seed}};
    if (terminal.size() >= 2) {
        const McEstimate e = summarize(terminal, x.seed);
        rep["terminal"] = {{"mean", e.mean}, {"se", e.std_error}, {"variance", e.variance}};
    }
    x.out.write("terminal.csv", csv_table({"X_T"}, {terminal}));
    x.out.write_json("report.json", rep);
}

void cmd_verify(Ctx& x) {
    const Config& c = x.cfg;
    const std::string fixture = c.get_string("verify.fixture", "negative_step");
    json rep{{"command", "verify"}, {"fixture", fixture}, {"seed", x.seed}};
    RunOptions opt{x.n_paths, x.seed, static_cast<int>(x.threads)};
    if (fixture == "negative_step") {
        const double threshold = c.get_double("verify.threshold", 0.1);
        const double min_fraction = c.get_double("verify.min_fraction", 0.9);
        const NegativeFixture nf = negative_fixture(x.n_paths, positive(c, "verify.step", 1e-3), x.seed);
        auto count = [&](const std::vector<double>& r) {
            return static_cast<double>(std::count_if(r.begin(), r.end(), [&](double v) { return v > threshold; }));
        };
        x.out.write("residuals.csv", csv_table({"first_cov", "second_cov", "qv"}, {nf.first_cov, nf.second_cov, nf.qv}));
        const double need = min_fraction * static_cast<double>(x.n_paths);
        for (const auto& [name, r] : {std::pair{"first_cov", &nf.first_cov}, {"second_cov", &nf.second_cov}, {"qv", &nf.qv}}) {
            const double k = count(*r);
            rep["exceed_count"][name] = k;
            x.expect(std::string(name) + "_disagrees", k >= need, k,
                     "count(residual > " + format_double(threshold) + ") >= " + format_double(need));
        }
    } else if (fixture == "change_of_variable") {
        const double beta = beta_of(c, "verify.beta", 0.5);
        const auto steps = c.get_list("verify.steps", {1e-2, 1e-3, 1e-4});
        const double tol = c.get_double("verify.tolerance", 0.05);
        const auto rows = cov_ladder(beta, steps, opt);
        std::vector<double> h, a, b, q;
        for (const auto& r : rows) {
            h.push_back(r.step);
            a.push_back(r.first_cov);
            b.push_back(r.second_cov);
            q.push_back(r.qv);
        }
        x.out.write("cov_ladder.csv", csv_table({"step", "first_cov", "second_cov", "qv"}, {h, a, b, q}));
        for (const auto& [name, v] : {std::pair{"first_cov", &a}, {"second_cov", &b}, {"qv", &q}}) {
            x.expect(std::string(name) + "_finest", v->back() <= tol, v->back(), "<= " + format_double(tol));
            bool mono = true;
            for (std::size_t k = 1; k < v->size(); ++k) {
                mono = mono && (*v)[k] < (*v)[k - 1];
            }
            x.expect(std::string(name) + "_monotone", mono, v->back(), "decreasing along the step list");
        }
    } else if (fixture == "ito") {
        const double beta = beta_of(c, "verify.beta", 0.5);
        const double step = positive(c, "verify.step", 1e-4);
        const double tol = c.get_double("verify.tolerance", 0.02);
        const std::vector<std::pair<std::string, C2Function>> fs{
            {"x", {[](double v) { return v; }, [](double) { return 1.0; }, [](double) { return 0.0; }}},
            {"x2", {[](double v) { return v * v; }, [](double v) { return 2.0 * v; }, [](double) { return 2.0; }}},
            {"exp", {[](double v) { return std::exp(v); }, [](double v) { return std::exp(v); }, [](double v) { return std::exp(v); }}},
            {"sin", {[](double v) { return std::sin(v); }, [](double v) { return std::cos(v); }, [](double v) { return -std::sin(v); }}}};
        for (const auto& [name, f] : fs) {
            const double r = tc_ito_rms(f, beta, step, opt);
            rep["rms"][name] = r;
            x.expect("ito_" + name, r <= tol, r, "<= " + format_double(tol));
        }
    } else {
        throw ConfigError(c.where("verify.fixture") + ": expected negative_step, change_of_variable or ito");
    }
    x.out.write_json("report.json", rep);
}

void cmd_moments(Ctx& x) {
    const Config& c = x.cfg;
    const std::string matrix = c.get_string("moments.matrix", "default");
    RunOptions opt{x.n_paths, x.seed, static_cast<int>(x.threads)};
    std::vector<MomentCheck> checks;
    long long allowance = 0;
    if (matrix == "default") {
        checks = default_moment_matrix(opt);
        allowance = c.get_int("moments.allowance", kMatrixAllowance);
    } else if (matrix == "mittag_leffler") {
        const double lambda = positive(c, "moments.lambda", 1.0);
        const double sigma = c.get_double("moments.sigma", 0.5);
        const double t = c.get_double("moments.t", 1.0);
        const double x0 = c.get_double("moments.x0", 1.0);
        const double inner = positive(c, "moments.inner_step", 1e-3);
        for (double b : c.get_list("moments.betas", {0.5})) {
            if (!(b > 0.0 && b < 1.0)) {
                throw ConfigError(c.where("moments.betas") + ": beta must lie in (0,1)");
            }
            auto v = check_mittag_leffler("ml_b" + format_double(b), lambda, b, {}, sigma, x0, t, inner, opt);
            checks.insert(checks.end(), v.begin(), v.end());
        }
        allowance = c.get_int("moments.allowance", 0);
    } else {
        throw ConfigError(c.where("moments.matrix") + ": expected default or mittag_leffler");
    }
    json arr = json::array();
    long long failures = 0;
    for (const auto& m : checks) {
        arr.push_back(to_json(m));
        if (!m.passed()) {
            ++failures;
            x.log << "check outside |z| <= 3: " << m.name << " (z = " << format_double(m.z_score) << ")\n";
        }
    }
    x.expect("matrix_failures", failures <= allowance, static_cast<double>(failures), "<= " + std::to_string(allowance));
    x.out.write_json("report.json", json{{"command", "moments"}, {"matrix", matrix}, {"checks", arr}});
}

void cmd_converge(Ctx& x) {
    const Config& c = x.cfg;
    const ModelPreset m = model_of(c);
    const SdeSpec spec = m.as_spec();
    const double beta = beta_of(c, "converge.beta", 0.5);
    const auto steps = c.get_list("converge.steps", {1e-2, 5e-3, 2.5e-3, 1.25e-3});
    const double t_final = positive(c, "converge.t_final", 1.0);
    RunOptions opt{x.n_paths, x.seed, static_cast<int>(x.threads)};
    const ConvergenceTable tab =
        convergence_study(spec, [&](const DrivingTriple& d) { return preset_solution(m, d).values().back(); }, beta, steps,
                          t_final, opt);
    std::vector<double> h, se, de;
    for (const auto& r : tab.rows) {
        h.push_back(r.step);
        se.push_back(r.strong_error);
        de.push_back(r.duality_error);
    }
    x.out.write("convergence.csv", csv_table({"step", "strong_error", "duality_error"}, {h, se, de}));
    const double lo = c.get_double("converge.slope_min", 0.35);
    const double hi = c.get_double("converge.slope_max", 0.65);
    x.expect("strong_slope", tab.slope >= lo && tab.slope <= hi, tab.slope,
             "in [" + format_double(lo) + ", " + format_double(hi) + "]");
    x.out.write_json("report.json", json{{"command", "converge"}, {"model", to_string(m.name)}, {"slope", tab.slope},
                                         {"n", x.n_paths}, {"seed", x.seed}});
}

void cmd_fracpde(Ctx& x) {
    const Config& c = x.cfg;
    FracPdeProblem p;
    p.beta = beta_of(c, "fracpde.beta", 0.5);
    const double mu = c.get_double("fracpde.mu", 0.0);
    const double sigma = positive(c, "fracpde.sigma", 1.0);
    p.mu_fn = [mu](double) { return mu; };
    p.sigma_fn = [sigma](double) { return sigma; };
    p.y_min = c.get_double("fracpde.y_min", -8.0);
    p.y_max = c.get_double("fracpde.y_max", 8.0);
    p.ny = static_cast<int>(c.get_int("fracpde.ny", 512));
    p.nt = static_cast<int>(c.get_int("fracpde.nt", 512));
    p.t_final = positive(c, "fracpde.t_final", 1.0);
    p.x_init = c.get_double("fracpde.x0", 0.0);
    p.validate();
    const auto snaps = solve_caputo_fpe(p);
    const DensityGrid& fpe = snaps.back();
    x.out.write("densities/fpe.csv", csv_table({"y", "density"}, {fpe.y_nodes, fpe.masses}));
    json rep{{"command", "fracpde"}, {"beta", p.beta}, {"mass", fpe.total_mass()}, {"mean", fpe.mean()}, {"variance", fpe.variance()}};
    if (!fpe.warning.empty()) {
        rep["warning"] = fpe.warning;
    }
    if (x.n_paths >= 2) {
        McDensityConfig mc;
        mc.beta = p.beta;
        mc.n_paths = x.n_paths;
        mc.t_final = p.t_final;
        mc.bins = static_cast<int>(c.get_int("fracpde.bins", 64));
        mc.y_min = fpe.y_nodes.front() - 0.5 * fpe.cell_width();
        mc.y_max = fpe.y_nodes.back() + 0.5 * fpe.cell_width();
        mc.inner_step = positive(c, "fracpde.inner_step", 1e-3);
        mc.seed = x.seed;
        mc.threads = static_cast<int>(x.threads);
        SdeSpec spec{"fracpde", {}, [mu](double, double, double) { return mu; }, [sigma](double, double, double) { return sigma; },
                     p.x_init, {}};
        std::size_t outside = 0;
        const DensityGrid h = mc_density(spec, mc, &outside);
        x.out.write("densities/mc.csv", csv_table({"y", "density"}, {h.y_nodes, h.masses}));
        const DensityComparison cmp = compare_densities(fpe, h);
        rep["l1"] = cmp.l1;
        rep["ks"] = cmp.ks;
        rep["mc_outside"] = outside;
        rep["n"] = x.n_paths;
        rep["seed"] = x.seed;
        const double tol = c.get_double("fracpde.l1_max", 0.05);
        x.expect("fpe_vs_mc_l1", cmp.l1 <= tol, cmp.l1, "<= " + format_double(tol));
    }
    x.out.write_json("report.json", rep);
}

void cmd_special(Ctx& x) {
    const Config& c = x.cfg;
    const auto betas = c.get_list("special.betas", {0.3, 0.5, 0.8, 1.0});
    const auto zs = c.get_list("special.z", {-5.0, -1.0, -0.1, 0.5, 2.0});
    const double tol = c.get_double("special.tolerance", 1e-8);
    std::vector<double> cb, cz, cv, ca;
    json rows = json::array();
    double worst = 0.0;
    for (double b : betas) {
        if (!(b > 0.0 && b <= 1.0)) {
            throw ConfigError(c.where("special.betas") + ": beta must lie in (0,1]");
        }
        for (double z : zs) {
            const MittagLefflerValue v = mittag_leffler_eval({b, z});
            cb.push_back(b);
            cz.push_back(z);
            cv.push_back(v.value);
            ca.push_back(v.accuracy);
            json r{{"beta", b}, {"z", z}, {"value", v.value}, {"branch", v.branch}};
            double oracle = std::numeric_limits<double>::quiet_NaN();
            if (b == 1.0) {
                oracle = std::exp(z);
            } else if (b == 0.5) {
                oracle = erfcx(-z);
            }
            if (std::isfinite(oracle)) {
                const double rel = std::abs(v.value - oracle) / std::abs(oracle);
                r["oracle"] = oracle;
                r["rel_error"] = rel;
                worst = std::max(worst, rel);
            }
            rows.push_back(r);
        }
    }
    x.out.write("mittag_leffler.csv", csv_table({"beta", "z", "value", "accuracy"}, {cb, cz, cv, ca}));
    x.expect("mittag_leffler_vs_oracles", worst <= tol, worst, "<= " + format_double(tol));
    json frac = json::array();
    double worst_j = 0.0;
    const double t = c.get_double("special.t", 1.0);
    for (double b : betas) {
        if (b >= 1.0) {
            continue;
        }
        const double j = fractional_integral([](double) { return 1.0; }, b, t, 64);
        const double exact = std::pow(t, b) / std::tgamma(b + 1.0);
        const double rel = std::abs(j - exact) / exact;
        worst_j = std::max(worst_j, rel);
        frac.push_back({{"beta", b}, {"t", t}, {"value", j}, {"exact", exact}, {"rel_error", rel}});
    }
    const double jtol = c.get_double("special.fractional_tolerance", 1e-6);
    x.expect("fractional_integral_of_one", worst_j <= jtol, worst_j, "<= " + format_double(jtol));
    x.out.write_json("report.json", json{{"command", "special"}, {"mittag_leffler", rows}, {"fractional_integral", frac}});
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> k{
        "run.command", "run.seed", "run.n_paths", "run.output_dir", "model.*", "clock.kind", "clock.beta", "clock.inner_step",
        "clock.rate", "clock.level", "clock.file", "grid.step", "grid.horizon", "simulate.scheme", "simulate.save_paths", "verify.fixture",
        "verify.threshold", "verify.min_fraction", "verify.step", "verify.beta", "verify.steps", "verify.tolerance",
        "moments.matrix", "moments.allowance", "moments.lambda", "moments.sigma", "moments.t", "moments.x0", "moments.inner_step",
        "moments.betas", "converge.beta", "converge.steps", "converge.t_final", "converge.slope_min", "converge.slope_max",
        "fracpde.beta", "fracpde.mu", "fracpde.sigma", "fracpde.y_min", "fracpde.y_max", "fracpde.ny", "fracpde.nt",
        "fracpde.t_final", "fracpde.x0", "fracpde.bins", "fracpde.inner_step", "fracpde.l1_max", "special.betas", "special.z",
        "special.tolerance", "special.t", "special.fractional_tolerance"};
    return k;
}

}  // namespace

int run_config(const Config& cfg, int threads, std::ostream& log) {
    try {
        cfg.require_known(known_keys());
        const std::string cmd = cfg.get_string("run.command");
        const long long seed = cfg.get_int("run.seed", 1);
        if (seed < 0) {
            throw ConfigError(cfg.where("run.seed") + ": must be >= 0");
        }
        Ctx x{cfg,
              resolve_threads(threads),
              log,
              ArtifactWriter(cfg.get_string("run.output_dir", "out/" + cmd)),
              static_cast<std::uint64_t>(seed),
              positive_count(cfg, "run.n_paths", 1000),
              {}};
        if (cmd == "simulate") {
            cmd_simulate(x);
        } else if (cmd == "verify") {
            cmd_verify(x);
        } else if (cmd == "moments") {
            cmd_moments(x);
        } else if (cmd == "converge") {
            cmd_converge(x);
        } else if (cmd == "fracpde") {
            cmd_fracpde(x);
        } else if (cmd == "special") {
            cmd_special(x);
        } else {
            throw ConfigError(cfg.where("run.command") + ": expected simulate, verify, moments, converge, fracpde or special");
        }
        json arr = json::array();
        bool ok = true;
        for (const auto& a : x.asserts) {
            arr.push_back(to_json(a));
            if (!a.passed) {
                ok = false;
                log << "assertion failed: " << a.name << " (value " << format_double(a.value) << ", want " << a.rule << ")\n";
            }
        }
        x.out.write_json("assertions.json", arr);
        x.out.write_manifest();
        return ok ? kExitOk : kExitAssertion;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const GridError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const HorizonError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UnsupportedError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "run failed: " << e.what() << "\n";
        return kExitAssertion;
    }
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Simulation and verification of SDEs driven by time-changed Brownian motion"};
    std::string config;
    std::vector<std::string> overrides;
    int threads = 0;
    app.add_option("--config", config, "Config file (key = value with [sections])")->required();
    app.add_option("--override", overrides, "section.key=value, repeatable");
    app.add_option("--threads", threads, "Worker threads (default: THREADS or 1)")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    try {
        Config cfg = Config::load(config);
        for (const auto& o : overrides) {
            cfg.apply_override(o);
        }
        return run_config(cfg, threads, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace tcsde
