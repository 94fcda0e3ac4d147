#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "tcsde/errors.hpp"
#include "tcsde/experiments.hpp"

using namespace tcsde;

TEST_CASE("summarize") {
    const std::vector<double> xs{1, 2, 3, 4};
    const auto s = summarize(xs, 7);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.variance == doctest::Approx(5.0 / 3.0));
    CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(s.n == 4);
    CHECK(s.seed == 7);
    // standard error falls like 1/sqrt(n)
    std::vector<double> big;
    for (int r = 0; r < 100; ++r) {
        big.insert(big.end(), xs.begin(), xs.end());
    }
    CHECK(summarize(big, 0).std_error == doctest::Approx(s.std_error / 10.0).epsilon(0.02));
}

TEST_CASE("make_check z score") {
    McEstimate e;
    e.mean = 1.25;
    e.std_error = 0.1;
    const auto c = make_check("c", e, 1.0, 0.0, Provenance::ClosedForm);
    CHECK(c.z_score == doctest::Approx(2.5));
    CHECK(c.passed());
    CHECK_FALSE(c.passed(2.0));
    const auto d = make_check("d", e, 1.0, 0.1, Provenance::Quadrature);
    CHECK(d.z_score == doctest::Approx(0.25 / std::sqrt(0.02)));
    McEstimate exact;
    exact.mean = 2.0;
    CHECK(make_check("e", exact, 2.0, 0.0, Provenance::Oracle).z_score == 0.0);
    const auto f = make_check("f", exact, 2.5, 0.0, Provenance::Oracle);
    CHECK(std::isinf(f.z_score));
    CHECK_FALSE(f.passed());
    CHECK(to_string(Provenance::MittagLeffler) != to_string(Provenance::ClosedForm));
}

TEST_CASE("loglog slope") {
    const std::vector<double> x{0.1, 0.3, 1.0, 2.0};
    std::vector<double> y;
    for (double v : x) {
        y.push_back(3.0 * std::pow(v, 0.42));
    }
    CHECK(loglog_slope(x, y) == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("exact clock samples") {
    ClockConfig id;
    id.kind = ClockConfig::Kind::Identity;
    for (double v : sample_time_change(id, 0.7, 10, 1)) {
        CHECK(v == doctest::Approx(0.7));
    }
    ClockConfig sc;
    sc.kind = ClockConfig::Kind::ScaledUniform;
    sc.r_lo = 0.5;
    sc.r_hi = 1.5;
    const auto s = sample_time_change(sc, 2.0, 20000, 2);
    CHECK(std::abs(oracle::mean(s) - 2.0) <= 4 * std::sqrt(oracle::var(s) / s.size()));
    ClockConfig st;
    st.beta = 0.5;
    const auto e = sample_time_change(st, 1.0, 20000, 3);
    CHECK(std::abs(oracle::mean(e) - 2.0 / std::sqrt(std::numbers::pi)) <= 4 * std::sqrt(oracle::var(e) / e.size()));
    ClockConfig bad;
    bad.beta = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("Mittag-Leffler mean at t = 0 is exact") {
    RunOptions opt;
    opt.n_paths = 50;
    opt.threads = 1;
    const auto cs = check_mittag_leffler("ml0", 1.0, 0.5, {}, 0.3, 1.0, 0.0, 1e-2, opt);
    REQUIRE(cs.size() == 2);
    for (const auto& c : cs) {
        CHECK(c.target == 1.0);
        CHECK(c.estimate.mean == 1.0);
        CHECK(c.z_score == 0.0);
    }
}

TEST_CASE("small moment checks pass") {
    RunOptions opt;
    opt.n_paths = 4000;
    opt.seed = 91;
    opt.threads = 1;
    const auto ml = check_mittag_leffler("ml", 1.0, 0.6, {}, 0.4, 1.0, 1.0, 1e-3, opt);
    for (const auto& c : ml) {
        CHECK(c.provenance == Provenance::MittagLeffler);
        CHECK(std::abs(c.z_score) <= 4.0);
    }
    ClockConfig sc;
    sc.kind = ClockConfig::Kind::ScaledUniform;
    const auto ou = check_ou_mean("ou", 1.0, 0.5, 0.3, 1.0, sc, 1.0, opt);
    CHECK(std::abs(ou.z_score) <= 4.0);
    const auto mh = check_mean_homogeneous("mh", {}, [](double) { return 0.2; }, [](double) { return 0.3; }, 1.0, sc, 1.0, opt);
    CHECK(std::abs(mh.z_score) <= 4.0);
}

TEST_CASE("moment matrix layout") {
    RunOptions opt;
    opt.n_paths = 100;
    opt.threads = 1;
    const auto m = default_moment_matrix(opt);
    CHECK(m.size() == 20);
    std::set<std::string> names;
    for (const auto& c : m) {
        names.insert(c.name);
        CHECK(c.estimate.n > 0);
    }
    CHECK(names.size() == m.size());
}

TEST_CASE("results do not depend on the thread count") {
    RunOptions a;
    a.n_paths = 64;
    a.seed = 92;
    a.threads = 1;
    RunOptions b = a;
    b.threads = 3;
    const std::vector<double> times{0.25, 0.5, 1.0};
    const auto ra = scaling_study(0.5, 1e-3, times, a);
    const auto rb = scaling_study(0.5, 1e-3, times, b);
    CHECK(ra.slope == rb.slope);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(ra.mean_e[k].mean == rb.mean_e[k].mean);
        CHECK(ra.mean_e[k].std_error == rb.mean_e[k].std_error);
    }
}
