// Acceptance suite. Usage: tcsde_acceptance [criterion ...] (1-10; all when empty).
// Prints detail lines, then one "criterion N: PASS|FAIL" line per criterion.
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tcsde/cli.hpp"
#include "tcsde/closed_form.hpp"
#include "tcsde/experiments.hpp"
#include "tcsde/fracpde.hpp"
#include "tcsde/io.hpp"
#include "tcsde/special_fn.hpp"

using namespace tcsde;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 1;

RunOptions options(std::size_t n) {
    RunOptions o;
    o.n_paths = n;
    o.seed = kSeed;
    o.threads = 0;
    return o;
}

// sqrt(mean (a - b)^2) / sqrt(mean b^2)
double rms_relative(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

bool line(bool ok, const char* fmt, auto... args) {
    std::printf("  [%s] ", ok ? "ok" : "FAIL");
    if constexpr (sizeof...(args) == 0) {
        std::fputs(fmt, stdout);
    } else {
        std::printf(fmt, args...);
    }
    std::printf("\n");
    std::fflush(stdout);
    return ok;
}

const std::vector<std::pair<std::string, C2Function>>& test_functions() {
    static const std::vector<std::pair<std::string, C2Function>> fs{
        {"x", {[](double v) { return v; }, [](double) { return 1.0; }, [](double) { return 0.0; }}},
        {"x^2", {[](double v) { return v * v; }, [](double v) { return 2.0 * v; }, [](double) { return 2.0; }}},
        {"exp", {[](double v) { return std::exp(v); }, [](double v) { return std::exp(v); }, [](double v) { return std::exp(v); }}},
        {"sin", {[](double v) { return std::sin(v); }, [](double v) { return std::cos(v); }, [](double v) { return -std::sin(v); }}}};
    return fs;
}

// 1. change-of-variable identities on inverse stable clocks, and the unsynchronized fixture
bool criterion1() {
    bool ok = true;
    const std::vector<double> steps{1e-2, 1e-3, 1e-4};
    for (double beta : {0.3, 0.5, 0.8}) {
        const auto rows = cov_ladder(beta, steps, options(100));
        for (const auto& r : rows) {
            std::printf("  beta %.1f step %.0e: first %.4f second %.4f qv %.4f\n", beta, r.step, r.first_cov, r.second_cov,
                        r.qv);
        }
        auto col = [&](auto get) {
            std::vector<double> v;
            for (const auto& r : rows) v.push_back(get(r));
            return v;
        };
        const std::vector<std::pair<const char*, std::vector<double>>> cols{
            {"first", col([](const CovLadderRow& r) { return r.first_cov; })},
            {"second", col([](const CovLadderRow& r) { return r.second_cov; })},
            {"qv", col([](const CovLadderRow& r) { return r.qv; })}};
        for (const auto& [name, v] : cols) {
            ok &= line(v.back() <= 0.05, "beta %.1f %s at 1e-4: %.4f <= 0.05", beta, name, v.back());
            ok &= line(v[0] > v[1] && v[1] > v[2], "beta %.1f %s decreasing over the ladder", beta, name);
        }
    }
    const NegativeFixture nf = negative_fixture(100, 1e-3, kSeed);
    for (const auto& [name, r] : {std::pair{"first", &nf.first_cov}, {"second", &nf.second_cov}, {"qv", &nf.qv}}) {
        const auto k = std::count_if(r->begin(), r->end(), [](double v) { return v > 0.1; });
        ok &= line(k >= 90, "negative fixture %s: %ld/100 seeds with residual > 0.1 (need >= 90)", name, static_cast<long>(k));
    }
    return ok;
}

// 2. time-changed Ito formula
bool criterion2() {
    bool ok = true;
    for (const auto& [name, f] : test_functions()) {
        const double r = tc_ito_rms(f, 0.5, 1e-4, options(100));
        ok &= line(r <= 0.02, "f = %s: RMS residual %.4f <= 0.02", name.c_str(), r);
    }
    return ok;
}

struct Triple {
    std::vector<double> euler, formula, reduced;
};

bool triangle(const char* name, const Triple& t) {
    const double ef = rms_relative(t.euler, t.formula);
    const double er = rms_relative(t.euler, t.reduced);
    const double fr = rms_relative(t.formula, t.reduced);
    bool ok = line(ef <= 0.05, "%s: euler vs formula %.2e", name, ef);
    ok &= line(er <= 0.05, "%s: euler vs reduction %.2e", name, er);
    ok &= line(fr <= 0.05, "%s: formula vs reduction %.2e", name, fr);
    return ok;
}

// Classical closed forms on the identity clock, computed here from the Brownian path.
struct Classical {
    std::string name;
    ModelPreset model;
    double horizon;
    std::function<double(const std::vector<double>& t, const std::vector<double>& b)> exact;
};

// 3. Euler vs general linear formula vs reduction; classical degeneration
bool criterion3() {
    bool ok = true;
    const double step = 1e-4;
    const std::size_t n = 100;
    const auto og = uniform_grid(step, 1.0);
    auto k = [](double v) { return TUFn([v](double, double) { return v; }); };
    {
        LinearCoeffs lc;
        lc.rho1 = k(0.1);
        lc.rho2 = k(0.05);
        lc.mu1 = k(0.2);
        lc.mu2 = k(-0.3);
        lc.sigma1 = k(0.1);
        lc.sigma2 = k(0.2);
        lc.x0 = 1.0;
        SdeSpec s;
        s.rho = [](double, double, double x) { return 0.1 + 0.05 * x; };
        s.mu = [](double, double, double x) { return 0.2 - 0.3 * x; };
        s.sigma = [](double, double, double x) { return 0.1 + 0.2 * x; };
        s.x0 = 1.0;
        Triple t;
        for (std::size_t i = 0; i < n; ++i) {
            const auto d = make_driver(inverse_stable_pair(0.5, step, og, kSeed, i), kSeed, i);
            t.euler.push_back(solve_euler(s, d).path.values().back());
            t.formula.push_back(general_linear_solution(lc, d).values().back());
            t.reduced.push_back(reduce_and_solve(s, d).values().back());
        }
        ok &= triangle("constant coefficients", t);
    }
    {
        // bridge-type fixture: gamma = 0, b = 0, eta = 1, c = 1, a = 0, clock pinned to E_1 = 0.9
        ModelPreset m;
        m.name = PresetName::TimeChangedBridge;
        m.params = {{"a", 0.0}, {"b", 0.0}, {"c", 1.0}, {"gamma", 0.0}, {"eta", 1.0}};
        LinearCoeffs lc;
        lc.mu1 = [](double, double u) { return 1.0 / (1.0 - u); };
        lc.mu2 = [](double, double u) { return -1.0 / (1.0 - u); };
        lc.sigma1 = k(1.0);
        lc.x0 = 0.0;
        const SdeSpec s = m.as_spec();
        Triple t;
        std::vector<double> preset;
        for (std::size_t i = 0; i < n; ++i) {
            const auto pair = pinned_stable_pair(0.5, step, 0.9, og, kSeed, i);
            const auto d = make_driver(pair, kSeed, i);
            t.euler.push_back(solve_euler(s, d).path.values().back());
            t.formula.push_back(general_linear_solution(lc, d).values().back());
            t.reduced.push_back(reduce_and_solve(s, d).values().back());
            preset.push_back(preset_solution(m, d).values().back());
        }
        ok &= triangle("bridge fixture", t);
        const double ep = rms_relative(t.euler, preset);
        ok &= line(ep <= 0.05, "bridge fixture: euler vs preset closed form %.2e", ep);
    }
    // identity clock
    std::vector<Classical> cases;
    {
        ModelPreset m;
        m.name = PresetName::BlackScholesAnalogue;
        m.params = {{"x0", 1.0}, {"rho", 0.05}, {"mu", 0.1}, {"sigma", 0.3}};
        cases.push_back({"GBM", m, 1.0, [](const std::vector<double>& t, const std::vector<double>& b) {
                             return std::exp((0.15 - 0.045) * t.back() + 0.3 * b.back());
                         }});
    }
    {
        ModelPreset m;
        m.name = PresetName::TimeChangedBridge;
        m.params = {{"a", 0.5}, {"c", 1.0}, {"eta", 1.0}};
        // X_t = a (1 - t) + c t + (1 - t) int_0^t dB / (1 - s)
        cases.push_back({"bridge", m, 0.9, [](const std::vector<double>& t, const std::vector<double>& b) {
                             double acc = 0.0;
                             for (std::size_t j = 0; j + 1 < t.size(); ++j) acc += (b[j + 1] - b[j]) / (1.0 - t[j]);
                             const double s = t.back();
                             return 0.5 * (1.0 - s) + s + (1.0 - s) * acc;
                         }});
    }
    {
        ModelPreset m;
        m.name = PresetName::OrnsteinUhlenbeckAnalogue;
        m.params = {{"x0", 1.0}, {"alpha", 1.0}, {"mu", 1.0}, {"sigma", 0.5}};
        // X_t = e^{-t} (1 + int e^s (ds + 0.5 dB))
        cases.push_back({"OU", m, 1.0, [](const std::vector<double>& t, const std::vector<double>& b) {
                             double acc = std::exp(t.back()) - 1.0;
                             for (std::size_t j = 0; j + 1 < t.size(); ++j) acc += 0.5 * std::exp(t[j]) * (b[j + 1] - b[j]);
                             return std::exp(-t.back()) * (1.0 + acc);
                         }});
    }
    {
        ModelPreset m;
        m.name = PresetName::LogisticGrowth;
        m.params = {{"x0", 0.5}, {"q", 1.0}, {"K", 1.0}, {"mu", 0.0}, {"sigma", 0.2}};
        // X_t = exp(t + A_t) / (1/x0 + int exp(s + A_s) ds), A = -0.02 t + 0.2 B
        cases.push_back({"logistic", m, 1.0, [](const std::vector<double>& t, const std::vector<double>& b) {
                             auto g = [&](std::size_t j) { return std::exp(t[j] - 0.02 * t[j] + 0.2 * b[j]); };
                             double den = 2.0;
                             for (std::size_t j = 0; j + 1 < t.size(); ++j) den += 0.5 * (g(j) + g(j + 1)) * (t[j + 1] - t[j]);
                             return g(t.size() - 1) / den;
                         }});
    }
    for (const auto& c : cases) {
        const auto g = uniform_grid(step, c.horizon);
        const SdeSpec s = c.model.as_spec();
        std::vector<double> num, ref;
        for (std::size_t i = 0; i < n; ++i) {
            const auto d = make_driver(identity_pair(g), kSeed, i);
            num.push_back(solve_euler(s, d).path.values().back());
            ref.push_back(c.exact(d.b_of_e.grid(), d.b_of_e.values()));
        }
        const double r = rms_relative(num, ref);
        ok &= line(r <= 0.05, "identity clock, %s at t = %.1f: euler vs classical %.2e", c.name.c_str(), c.horizon, r);
    }
    return ok;
}

// 4. direct vs duality on shared noise; X o D against the classical integral identity
bool criterion4() {
    bool ok = true;
    const double step = 1e-4;
    const auto og = uniform_grid(step, 1.0);
    std::vector<std::pair<std::string, ModelPreset>> models;
    {
        ModelPreset m;
        m.name = PresetName::BlackScholesAnalogue;
        m.params = {{"rho", 0.0}};
        models.push_back({"exponential", m});
        ModelPreset d;
        d.name = PresetName::MittagLefflerDecay;
        models.push_back({"decay", d});
    }
    for (const auto& [name, m] : models) {
        const SdeSpec s = m.as_spec();
        std::vector<double> direct, dual;
        double worst = 0.0;
        for (std::size_t i = 0; i < 100; ++i) {
            const auto d = make_driver(inverse_stable_pair(0.5, step, og, kSeed, i), kSeed, i);
            direct.push_back(solve_euler(s, d).path.values().back());
            dual.push_back(solve_duality(s, d).path.values().back());
            worst = std::max(worst, duality_identity_residual(s, d));
        }
        const double r = rms_relative(direct, dual);
        ok &= line(r <= 0.05, "%s: direct vs duality %.2e", name.c_str(), r);
        ok &= line(worst <= 0.05, "%s: X o D classical identity, worst residual %.2e", name.c_str(), worst);
    }
    return ok;
}

// 5. moment matrix
bool criterion5() {
    const auto checks = default_moment_matrix(options(100000));
    int failures = 0;
    bool named = true;
    for (const auto& c : checks) {
        const bool key = c.name.rfind("ml_b0.5", 0) == 0 || c.name.rfind("ml_b0.999", 0) == 0 || c.name == "ou_scaled_clock" ||
                         c.name == "var_identity";
        std::printf("  %-24s est %.6f se %.2e target %.6f tse %.2e z %+.2f%s\n", c.name.c_str(), c.estimate.mean,
                    c.estimate.std_error, c.target, c.target_se, c.z_score, key ? "  (required)" : "");
        if (!c.passed()) {
            ++failures;
            named &= !key;
        }
        if (c.name == "ml_b0.5_laplace") {
            const double erfc_form = std::numbers::e * std::erfc(1.0);
            named &= line(oracle::rel(c.target, erfc_form) <= 1e-8, "beta 0.5 target %.15f vs e erfc(1) %.15f", c.target,
                          erfc_form);
        }
    }
    bool ok = line(named, "required checks (Mittag-Leffler, OU scaled clock, homogeneous variance) within |z| <= 3");
    ok &= line(failures <= kMatrixAllowance, "matrix failures %d <= %d of %zu", failures, kMatrixAllowance, checks.size());
    return ok;
}

// 6. E[E_t] ~ t^beta
bool criterion6() {
    bool ok = true;
    const std::vector<double> times{0.25, 0.5, 1.0, 2.0, 4.0};
    for (double beta : {0.3, 0.5, 0.8}) {
        const auto r = scaling_study(beta, 1e-3, times, options(10000));
        ok &= line(std::abs(r.slope - beta) <= 0.03, "beta %.1f: slope %.4f within 0.03", beta, r.slope);
    }
    return ok;
}

// 7. strong convergence of Euler
bool criterion7() {
    const std::vector<double> steps{1e-2, 5e-3, 2.5e-3, 1.25e-3};
    ModelPreset m;
    m.name = PresetName::BlackScholesAnalogue;
    m.params = {{"rho", 0.0}, {"mu", 0.1}, {"sigma", 0.3}};
    const auto lin = convergence_study(m.as_spec(), [&](const DrivingTriple& d) { return preset_solution(m, d).values().back(); },
                                       0.5, steps, 1.0, options(500));
    for (const auto& r : lin.rows) {
        std::printf("  linear step %.2e strong error %.3e\n", r.step, r.strong_error);
    }
    bool ok = line(lin.slope >= 0.35 && lin.slope <= 0.65, "linear fixture slope %.3f in [0.35, 0.65]", lin.slope);
    // dX = -X dE: X = exp(-E), no noise
    SdeSpec det;
    det.mu = [](double, double, double x) { return -x; };
    det.x0 = 1.0;
    const auto dt = convergence_study(det, [](const DrivingTriple& d) { return std::exp(-d.pair.e.values().back()); }, 0.5, steps,
                                      1.0, options(200));
    ok &= line(dt.slope >= 0.9 && dt.slope <= 1.1, "deterministic fixture slope %.3f in [0.9, 1.1]", dt.slope);
    return ok;
}

// 8. fractional Fokker-Planck equation
bool criterion8() {
    bool ok = true;
    FracPdeProblem p;
    p.beta = 0.5;
    p.ny = 512;
    p.nt = 512;
    p.snapshot_times = {0.125, 0.25, 0.5};
    const auto snaps = solve_caputo_fpe(p);
    SdeSpec s;
    s.sigma = [](double, double, double) { return 1.0; };
    McDensityConfig mc;
    mc.beta = 0.5;
    mc.n_paths = 100000;
    mc.seed = kSeed;
    mc.y_min = snaps.back().y_nodes.front() - 0.5 * snaps.back().cell_width();
    mc.y_max = snaps.back().y_nodes.back() + 0.5 * snaps.back().cell_width();
    const DensityGrid hist = mc_density(s, mc);
    const double l1 = compare_densities(snaps.back(), hist).l1;
    ok &= line(l1 <= 0.05, "beta 0.5: L1(FPE, MC) %.4f <= 0.05", l1);
    std::vector<double> t, v;
    for (const auto& d : snaps) {
        t.push_back(d.time);
        v.push_back(d.variance());
    }
    const double slope = loglog_slope(t, v);
    ok &= line(std::abs(slope - 0.5) <= 0.05, "variance slope %.4f within 0.05 of 0.5", slope);
    FracPdeProblem h = p;
    h.beta = 0.999;
    h.snapshot_times.clear();
    const DensityGrid heat = solve_caputo_fpe(h).back();
    const double lh = compare_densities(heat, gaussian_density(heat, 0.0, 1.0)).l1;
    ok &= line(lh <= 0.03, "beta 0.999: L1 to the heat kernel N(0, 1) %.4f <= 0.03", lh);
    return ok;
}

// 9. special functions against independent oracles
bool criterion9() {
    double w1 = 0.0, wh = 0.0, wj = 0.0;
    for (double z = -50.0; z <= 50.0; z += 0.25) {
        w1 = std::max(w1, oracle::rel(mittag_leffler(1.0, z), std::exp(z)));
    }
    for (double z = -50.0; z <= 10.0; z += 0.25) {
        wh = std::max(wh, oracle::rel(mittag_leffler(0.5, z), oracle::ml_half(z)));
    }
    for (double b = 0.05; b < 1.0; b += 0.05) {
        for (double t : {0.5, 1.0, 3.0}) {
            const double j = fractional_integral([](double) { return 1.0; }, b, t, 64);
            wj = std::max(wj, oracle::rel(j, std::pow(t, b) / std::tgamma(b + 1.0)));
        }
    }
    bool ok = line(w1 <= 1e-8, "E_1(z) vs exp(z) on [-50, 50]: worst relative %.2e", w1);
    ok &= line(wh <= 1e-8, "E_1/2(z) vs exp(z^2) erfc(-z) on [-50, 10]: worst relative %.2e", wh);
    ok &= line(wj <= 1e-6, "J^beta 1 vs t^beta / Gamma(beta + 1): worst relative %.2e", wj);
    return ok;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// 10. every command rerun with the same seed gives identical artifacts, for any thread count
bool criterion10() {
    const fs::path root = fs::temp_directory_path() / "tcsde_acceptance_determinism";
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"simulate",
         "[run]\ncommand = simulate\nseed = 1\nn_paths = 64\n[model]\npreset = black_scholes\n[clock]\nkind = inverse_stable\n"
         "beta = 0.7\ninner_step = 1e-3\n[grid]\nstep = 1e-2\nhorizon = 1\n[simulate]\nscheme = euler\nsave_paths = 3\n"},
        {"verify", "[run]\ncommand = verify\nseed = 1\nn_paths = 100\n[verify]\nfixture = negative_step\nstep = 1e-3\n"},
        {"moments", "[run]\ncommand = moments\nseed = 1\nn_paths = 200\n[moments]\nmatrix = default\n"},
        {"converge",
         "[run]\ncommand = converge\nseed = 1\nn_paths = 50\n[model]\npreset = black_scholes\nrho = 0\n[converge]\nbeta = 0.5\n"},
        {"fracpde", "[run]\ncommand = fracpde\nseed = 1\nn_paths = 2000\n[fracpde]\nbeta = 0.5\nny = 128\nnt = 128\n"},
        {"special", "[run]\ncommand = special\n"}};
    bool ok = true;
    for (const auto& [name, text] : runs) {
        std::vector<std::string> manifests;
        std::vector<int> codes;
        for (int threads : {1, 1, 4}) {
            Config c = Config::parse(text, name + ".ini");
            const fs::path dir = root / (name + "_" + std::to_string(manifests.size()));
            c.apply_override("run.output_dir=" + dir.string());
            std::ostringstream log;
            codes.push_back(run_config(c, threads, log));
            manifests.push_back(slurp(dir / "manifest.json"));
        }
        const bool same = !manifests[0].empty() && manifests[0] == manifests[1] && manifests[0] == manifests[2] &&
                          codes[0] == codes[1] && codes[0] == codes[2] && codes[0] != kExitConfig;
        ok &= line(same, "%s: manifest (artifact hashes) identical across reruns and 1 vs 4 threads, %zu bytes", name.c_str(),
                   manifests[0].size());
    }
    fs::remove_all(root);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<bool()>>> all{
        {"change-of-variable identities", criterion1}, {"time-changed Ito formula", criterion2},
        {"solution-form triangle", criterion3},        {"duality", criterion4},
        {"moment matrix", criterion5},                 {"scaling law", criterion6},
        {"strong convergence", criterion7},            {"fractional Fokker-Planck", criterion8},
        {"special functions", criterion9},             {"determinism", criterion10}};
    std::vector<int> pick;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > static_cast<int>(all.size())) {
            std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
            return 2;
        }
        pick.push_back(k);
    }
    if (pick.empty()) {
        for (int k = 1; k <= static_cast<int>(all.size()); ++k) pick.push_back(k);
    }
    bool all_ok = true;
    std::vector<std::string> summary;
    for (int k : pick) {
        const auto& [name, fn] = all[k - 1];
        std::printf("criterion %d (%s)\n", k, name.c_str());
        std::fflush(stdout);
        bool ok = false;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            std::printf("  error: %s\n", e.what());
        }
        all_ok &= ok;
        summary.push_back("criterion " + std::to_string(k) + ": " + (ok ? "PASS" : "FAIL") + " (" + name + ")");
    }
    for (const auto& s : summary) {
        std::printf("%s\n", s.c_str());
    }
    return all_ok ? 0 : 1;
}
