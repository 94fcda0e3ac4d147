#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tcsde/errors.hpp"
#include "tcsde/experiments.hpp"
#include "tcsde/fracpde.hpp"

using namespace tcsde;

namespace {

DensityGrid cells(double lo, double hi, int n) {
    DensityGrid g;
    const double w = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
        g.y_nodes.push_back(lo + (i + 0.5) * w);
    }
    g.masses.assign(n, 0.0);
    return g;
}

}  // namespace

TEST_CASE("near beta = 1 the density is the heat kernel") {
    FracPdeProblem p;
    p.beta = 0.999;
    p.ny = 256;
    p.nt = 256;
    const auto snaps = solve_caputo_fpe(p);
    const DensityGrid& last = snaps.back();
    CHECK(last.time == doctest::Approx(1.0));
    const double var = 1.0 / std::tgamma(1.0 + p.beta);
    CHECK(compare_densities(last, gaussian_density(last, 0.0, var)).l1 <= 0.02);
}

TEST_CASE("FPE density properties") {
    FracPdeProblem p;
    p.beta = 0.5;
    p.ny = 256;
    p.nt = 256;
    p.snapshot_times = {0.125, 0.25, 0.5};
    const auto snaps = solve_caputo_fpe(p);
    REQUIRE(snaps.size() == 4);
    std::vector<double> t, v;
    for (const auto& s : snaps) {
        CHECK(s.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
        for (double m : s.masses) {
            REQUIRE(m >= 0.0);
        }
        // zero drift: symmetric about the start point
        const std::size_t n = s.masses.size();
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(std::abs(s.masses[i] - s.masses[n - 1 - i]) <= 1e-8);
        }
        CHECK(std::abs(s.mean()) <= 1e-8);
        t.push_back(s.time);
        v.push_back(s.variance());
    }
    // Var = t^beta / Gamma(1 + beta)
    CHECK(std::abs(loglog_slope(t, v) - 0.5) <= 0.05);
    CHECK(v.back() == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(0.05));
}

TEST_CASE("FPE problem validation") {
    FracPdeProblem p;
    p.beta = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.beta = 0.5;
    p.ny = 1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("compare_densities") {
    DensityGrid a = cells(-1, 1, 8);
    DensityGrid b = cells(-1, 1, 8);
    // all mass in the first and in the last cell
    a.masses[0] = 4.0;
    b.masses[7] = 4.0;
    CHECK(compare_densities(a, a).l1 == 0.0);
    CHECK(compare_densities(a, a).ks == 0.0);
    const auto r = compare_densities(a, b);
    CHECK(r.l1 == doctest::Approx(2.0));
    CHECK(r.ks == doctest::Approx(1.0));
    // a finer grid rebinned onto the coarser one
    DensityGrid fine = cells(-1, 1, 16);
    fine.masses[0] = fine.masses[1] = 4.0;
    CHECK(compare_densities(a, fine).l1 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Monte Carlo density of E_1 at beta = 1/2") {
    // sigma = 0, mu = 1: X_1 = E_1, half-normal with variance parameter 2
    SdeSpec s;
    s.mu = [](double, double, double) { return 1.0; };
    McDensityConfig cfg;
    cfg.beta = 0.5;
    cfg.n_paths = 20000;
    cfg.bins = 32;
    cfg.y_min = 0.0;
    cfg.y_max = 8.0;
    cfg.seed = 81;
    cfg.threads = 1;
    std::size_t outside = 0;
    const DensityGrid mc = mc_density(s, cfg, &outside);
    DensityGrid ref = cells(0.0, 8.0, 32);
    const double w = ref.cell_width();
    for (std::size_t i = 0; i < ref.y_nodes.size(); ++i) {
        const double a = ref.y_nodes[i] - 0.5 * w;
        ref.masses[i] = (std::erf((a + w) / 2.0) - std::erf(a / 2.0)) / w;
    }
    CHECK(compare_densities(mc, ref).l1 <= 0.05);
    CHECK(outside <= 5);
}

TEST_CASE("Monte Carlo variance equals the mean clock") {
    SdeSpec s;
    s.sigma = [](double, double, double) { return 1.0; };
    McDensityConfig cfg;
    cfg.beta = 0.7;
    cfg.n_paths = 20000;
    cfg.bins = 128;
    cfg.seed = 82;
    cfg.threads = 1;
    const DensityGrid mc = mc_density(s, cfg);
    const double target = 1.0 / std::tgamma(1.7);
    CHECK(mc.variance() == doctest::Approx(target).epsilon(0.05));
    SdeSpec bad;
    bad.rho = [](double, double, double) { return 1.0; };
    CHECK_THROWS_AS(mc_density(bad, cfg), UnsupportedError);
}
