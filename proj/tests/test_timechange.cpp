#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "tcsde/errors.hpp"
#include "tcsde/sde.hpp"
#include "tcsde/timechange.hpp"

using namespace tcsde;

TEST_CASE("subordinator is reproducible and strictly increasing") {
    StableSubordinatorConfig cfg;
    cfg.beta = 0.6;
    cfg.step = 1e-3;
    cfg.seed = 9;
    cfg.path_index = 3;
    const auto a = simulate_stable_subordinator(cfg);
    const auto b = simulate_stable_subordinator(cfg);
    CHECK(a.values() == b.values());
    CHECK(a[0] == 0.0);
    for (std::size_t i = 1; i < a.size(); ++i) {
        REQUIRE(a[i] > a[i - 1]);
    }
    cfg.path_index = 4;
    CHECK(simulate_stable_subordinator(cfg).values() != a.values());
}

TEST_CASE("subordinator config validation") {
    StableSubordinatorConfig cfg;
    cfg.beta = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.beta = 0.5;
    cfg.step = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("D_1 follows the Levy law at beta = 1/2") {
    // Laplace exponent s^(1/2): P(D_1 <= x) = erfc(1 / (2 sqrt x))
    const std::size_t n = 4000;
    std::vector<double> d1;
    StableSubordinatorConfig cfg;
    cfg.beta = 0.5;
    cfg.step = 1e-2;
    cfg.seed = 21;
    for (std::size_t i = 0; i < n; ++i) {
        cfg.path_index = i;
        d1.push_back(simulate_stable_subordinator(cfg).sup_value());
    }
    for (double x : {0.3, 1.0, 4.0, 20.0}) {
        const double p = std::erfc(1.0 / (2.0 * std::sqrt(x)));
        const double emp = static_cast<double>(std::count_if(d1.begin(), d1.end(), [x](double v) { return v <= x; })) / n;
        CHECK(std::abs(emp - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n));
    }
}

TEST_CASE("generalized inverse on hand examples") {
    const MonotonePath d({0, 1, 2}, {0, 0.5, 1.0}, Interp::Linear);
    const std::vector<double> out{0, 0.25, 0.5, 0.9};
    const auto e = generalized_inverse(d, out);
    CHECK(e.at(0.25) == doctest::Approx(0.5));
    CHECK(e.at(0.5) == doctest::Approx(1.0));
    CHECK(e.at(0.9) == doctest::Approx(1.8));

    // a step subordinator: E(t) = inf{u : D(u) > t}
    const MonotonePath s({0, 0.5, 1}, {0, 2, 3}, Interp::CadlagStep);
    const std::vector<double> out2{0, 1, 2, 2.5};
    const auto e2 = generalized_inverse(s, out2);
    CHECK(e2.at(1.0) == doctest::Approx(0.5));
    CHECK(e2.at(2.5) == doctest::Approx(1.0));
}

TEST_CASE("generalized inverse needs D to cover the outer grid") {
    const MonotonePath d({0, 1}, {0, 0.5}, Interp::Linear);
    const std::vector<double> out{0, 1.0};
    CHECK_THROWS_AS(generalized_inverse(d, out), HorizonError);
}

TEST_CASE("round trip D(E(t)) >= t and E(D(u_j)) = u_{j+1} for a stepped D") {
    const auto g = uniform_grid(1e-2, 1.0);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto p = inverse_stable_pair(0.7, 1e-3, g, 5, i);
        for (std::size_t k = 0; k < g.size(); ++k) {
            CHECK(p.d.at(p.e[k]) >= g[k] - 1e-12);
        }
        std::vector<double> levels;
        for (std::size_t j = 0; j < p.d.size() && p.d[j] < g.back(); ++j) {
            levels.push_back(p.d[j]);
        }
        const auto e = generalized_inverse(p.d, levels, true);
        // E(0) is pinned to 0
        CHECK(e[0] == 0.0);
        for (std::size_t j = 1; j < levels.size(); ++j) {
            REQUIRE(e[j] == doctest::Approx(p.d.grid()[j + 1]).epsilon(1e-12));
        }
    }
}

TEST_CASE("inverse clock is nondecreasing and starts at zero") {
    const auto g = uniform_grid(1e-3, 1.0);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto p = inverse_stable_pair(0.4, 1e-3, g, 6, i);
        CHECK(p.bracket == Bracket::Double);
        CHECK(p.e[0] == 0.0);
        for (std::size_t k = 1; k < p.e.size(); ++k) {
            REQUIRE(p.e[k] >= p.e[k - 1]);
        }
    }
}

TEST_CASE("bracket tags") {
    const auto g = uniform_grid(0.1, 1.0);
    // Double when D is strictly increasing (E continuous), Single otherwise
    CHECK(identity_pair(g).bracket == Bracket::Double);
    CHECK(scaled_pair(2.0, g).bracket == Bracket::Double);
    const auto inner = uniform_grid(0.1, 0.9);
    CHECK(unit_step_pair(uniform_grid(0.5, 2.0), inner).bracket == Bracket::Single);
}

TEST_CASE("synchronization") {
    const MonotonePath t({0, 1, 2}, {0, 0, 1}, Interp::CadlagStep);
    // the time change jumps at s = 2 from 0 to 1: z must be constant on [0, 1]
    const CadlagPath flat({0, 0.5, 1, 1.5}, {3, 3, 3, 4}, Interp::CadlagStep);
    const CadlagPath moving({0, 0.5, 1, 1.5}, {3, 2, 3, 4}, Interp::CadlagStep);
    CHECK(is_synchronized(flat, t));
    CHECK_FALSE(is_synchronized(moving, t));
}

TEST_CASE("scaled clock is linear") {
    const auto g = uniform_grid(0.1, 1.0);
    const auto p = scaled_pair(1.7, g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(p.e[k] == doctest::Approx(1.7 * g[k]));
    }
}

TEST_CASE("inverse stable clock is mostly flat at fine steps") {
    const auto g = uniform_grid(1e-4, 1.0);
    double s = 0.0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        s += flat_fraction(inverse_stable_pair(0.5, 1e-4, g, 8, i).e);
    }
    CHECK(s / 10 > 0.9);
}

TEST_CASE("E_1 law at beta = 1/2 and Var B(E_1) = E[E_1]") {
    const auto g = uniform_grid(1e-2, 1.0);
    std::vector<double> e1, be;
    for (std::uint64_t i = 0; i < 3000; ++i) {
        const auto drv = make_driver(inverse_stable_pair(0.5, 1e-3, g, 10, i), 10, i);
        e1.push_back(drv.pair.e.sup_value());
        be.push_back(drv.b_of_e.values().back());
    }
    // E_1 is half-normal with variance parameter 2: mean 2/sqrt(pi), second moment 2
    const double m = oracle::mean(e1);
    const double se = std::sqrt(oracle::var(e1) / e1.size());
    CHECK(std::abs(m - 2.0 / std::sqrt(std::numbers::pi)) <= 4 * se + 2e-3);
    std::vector<double> sq;
    for (double v : e1) sq.push_back(v * v);
    CHECK(std::abs(oracle::mean(sq) - 2.0) <= 4 * std::sqrt(oracle::var(sq) / sq.size()) + 4e-3);
    std::vector<double> be2;
    for (double v : be) be2.push_back(v * v);
    CHECK(std::abs(oracle::mean(be2) - m) <= 4 * std::sqrt(oracle::var(be2) / be2.size()));
}

TEST_CASE("E_t scales like t^beta") {
    const std::vector<double> times{0.25, 0.5, 1.0};
    std::vector<double> g{0.0};
    g.insert(g.end(), times.begin(), times.end());
    std::vector<double> m(3, 0.0);
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const auto p = inverse_stable_pair(0.3, 1e-3, g, 12, i);
        for (int k = 0; k < 3; ++k) m[k] += p.e[k + 1] / n;
    }
    const double slope = std::log(m[2] / m[0]) / std::log(4.0);
    CHECK(slope == doctest::Approx(0.3).epsilon(0.15));
}

TEST_CASE("pinned clock reaches its level at the horizon") {
    const auto g = uniform_grid(1e-2, 1.0);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto p = pinned_stable_pair(0.5, 1e-3, 0.9, g, 13, i);
        CHECK(p.bracket == Bracket::Double);
        CHECK(p.e.values().back() == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(p.e.values().front() == 0.0);
        // the inner grid keeps its step whatever the raw first passage
        CHECK(p.d.grid()[1] == doctest::Approx(1e-3));
        CHECK(p.d.grid().size() == 901);
    }
    CHECK_THROWS_AS(pinned_stable_pair(0.5, 1e-3, 0.0, g, 13, 0), ConfigError);
}
