#include "emdscale/breaktest.hpp"
#include "emdscale/series_io.hpp"
#include "emdscale/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace emdscale;

namespace {

/// x_t = phi x_{t-1} + 0.05 t + shift 1[t > t_b] + e_t.
std::vector<double> ar1_with_break(std::size_t n, double phi, std::size_t t_b, double shift, std::uint64_t seed) {
    const auto e = oracle::gaussian(n, seed);
    std::vector<double> x(n);
    double prev = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        prev = phi * prev + e[t];
        x[t] = prev + 0.05 * static_cast<double>(t) + (t > t_b ? shift : 0.0);
    }
    return x;
}

/// dX_t = a1 dX_{t-1} + a2 dX_{t-2} + e_t, integrated.
std::vector<double> ar2_differences(std::size_t n, double a1, double a2, std::uint64_t seed) {
    const auto e = oracle::gaussian(n, seed);
    std::vector<double> x(n, 0.0);
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const double d = a1 * d1 + a2 * d2 + e[t];
        x[t] = x[t - 1] + d;
        d2 = d1;
        d1 = d;
    }
    return x;
}

bool close(double lib, long double ref, double tol) {
    return std::abs(static_cast<long double>(lib) - ref) <= tol * std::max(1.0L, std::abs(ref));
}

}  // namespace

TEST_CASE("za_regression agrees with the normal-equations oracle", "[breaktest][oracle]") {
    struct Case {
        std::string name;
        std::vector<double> x;
    };
    std::vector<Case> cases;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        cases.push_back({"ar1_break" + std::to_string(seed), ar1_with_break(400, 0.6, 180, 4.0, seed)});
        cases.push_back({"walk" + std::to_string(seed), generate_values({synth::RandomWalk{}, 300, seed})});
    }
    cases.push_back({"broken_trend", generate_values({synth::BrokenTrend{0.4, 3.0, 0.02, 1.0, 0.01}, 300, 11})});
    {
        const auto s = parse_ohlcv_csv(oracle::slurp(oracle::data_file("sp500_1999_2018.csv")));
        cases.push_back({"sp500_head", std::vector<double>(s.values().begin(), s.values().begin() + 1200)});
    }
    for (const auto& c : cases) {
        const std::size_t n = c.x.size();
        for (std::size_t k : {0u, 1u, 3u}) {
            for (std::size_t t_b : {n / 5, n / 2, (4 * n) / 5}) {
                INFO(c.name << " k=" << k << " t_b=" << t_b);
                const auto fit = za_regression(c.x, t_b, k);
                const auto [rows, dy] = oracle::break_design(c.x, t_b, k);
                const auto ref = oracle::ols(rows, dy);
                CHECK(fit.nobs == n - k - 1);
                REQUIRE(fit.coefficients.size() == ref.coef.size());
                for (std::size_t j = 0; j < ref.coef.size(); ++j) {
                    CHECK(close(fit.coefficients[j], ref.coef[j], 1e-8));
                    CHECK(close(fit.std_errors[j], ref.se[j], 1e-8));
                    CHECK(close(fit.t_stats[j], ref.t[j], 1e-8));
                }
                CHECK(close(fit.alpha_tstat, ref.t[BreakRegressionFit::Alpha], 1e-8));
                CHECK(close(fit.ssr, ref.ssr, 1e-8));
            }
        }
    }
}

TEST_CASE("coefficient accessors follow the column order", "[breaktest]") {
    const auto x = ar1_with_break(200, 0.5, 90, 2.0, 3);
    const auto fit = za_regression(x, 90, 2);
    CHECK(fit.c() == fit.coefficients[0]);
    CHECK(fit.alpha() == fit.coefficients[1]);
    CHECK(fit.beta() == fit.coefficients[2]);
    CHECK(fit.theta() == fit.coefficients[3]);
    CHECK(fit.gamma() == fit.coefficients[4]);
    CHECK(fit.d(1) == fit.coefficients[5]);
    CHECK(fit.d(2) == fit.coefficients[6]);
    CHECK(fit.alpha_tstat == fit.t_stats[1]);
}

TEST_CASE("a straight line is collinear with the trend regressors", "[breaktest]") {
    // X_{t-1} = 2t - 2 lies in the span of [1, t], so the design cannot have full rank.
    std::vector<double> line(100);
    for (std::size_t t = 0; t < line.size(); ++t) {
        line[t] = 2.0 * static_cast<double>(t);
    }
    for (std::size_t t_b : {20u, 50u, 80u}) {
        CHECK(error_code([&] { za_regression(line, t_b, 0); }) == Errc::RankDeficient);
    }
}

TEST_CASE("a noiseless level jump is captured exactly", "[breaktest]") {
    const std::size_t t_b = 60;
    std::vector<double> x(150, 0.0);
    for (std::size_t t = t_b + 1; t < x.size(); ++t) {
        x[t] = 10.0;
    }
    const auto fit = za_regression(x, t_b, 0);
    CHECK(fit.theta() == Catch::Approx(10.0).margin(1e-9));
    CHECK(fit.alpha() == Catch::Approx(-1.0).margin(1e-9));
    CHECK(fit.c() == Catch::Approx(0.0).margin(1e-9));
    CHECK(fit.beta() == Catch::Approx(0.0).margin(1e-9));
    CHECK(fit.gamma() == Catch::Approx(0.0).margin(1e-9));
    CHECK(fit.ssr < 1e-18);
}

TEST_CASE("za_regression preconditions", "[breaktest]") {
    const auto x = generate_values({synth::RandomWalk{}, 100, 1});
    CHECK(error_code([&] { za_regression(x, 0, 0); }) == Errc::OutOfRange);
    CHECK(error_code([&] { za_regression(x, 2, 2); }) == Errc::OutOfRange);
    CHECK(error_code([&] { za_regression(x, 98, 0); }) == Errc::OutOfRange);
    CHECK(error_code([&] { za_regression(std::span<const double>(x).first(12), 5, 3); }) == Errc::TooShort);
}

TEST_CASE("lag selection", "[breaktest]") {
    const auto walk = generate_values({synth::RandomWalk{}, 300, 9});
    CHECK(select_lags(walk, 150, 0) == 0);
    CHECK(default_max_lags(100) == 12);
    CHECK(default_max_lags(1000) == 21);

    // Under the 10% two-sided rule each insignificant lag survives with probability 0.9,
    // so uncorrelated differences give k = 0 with probability about 0.9^k_max; k_max = 1 here.
    std::size_t zero = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto x = generate_values({synth::RandomWalk{}, 300, 1000 + seed});
        zero += select_lags(x, 150, 1) == 0 ? 1 : 0;
    }
    CHECK(zero >= 80);

    std::size_t some = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto x = ar2_differences(300, 0.4, 0.3, 2000 + seed);
        some += select_lags(x, 150, default_max_lags(x.size())) >= 1 ? 1 : 0;
    }
    CHECK(some >= 80);
}

TEST_CASE("scan t-statistics equal full regressions", "[breaktest]") {
    const auto x = ar1_with_break(500, 0.7, 300, 5.0, 17);
    for (std::size_t k : {0u, 2u}) {
        const auto stats = za_scan(x, 0.15, k);
        const auto [lo, hi] = candidate_window(x.size(), 0.15);
        CHECK(stats.front().t_b == lo);
        CHECK(stats.back().t_b == hi);
        CHECK(stats.size() == hi - lo + 1);
        for (const auto& c : stats) {
            CHECK(c.tstat == Catch::Approx(za_regression(x, c.t_b, k).alpha_tstat).epsilon(1e-9));
        }
    }
}

TEST_CASE("za_test reports the minimum over candidates", "[breaktest]") {
    const auto x = ar1_with_break(600, 0.5, 250, 6.0, 4);
    const auto r = za_test(x);
    const auto [lo, hi] = candidate_window(x.size(), 0.15);
    CHECK(r.break_index >= lo);
    CHECK(r.break_index <= hi);
    for (const auto& c : r.candidate_tstats) {
        CHECK(r.min_tstat <= c.tstat);
    }
    CHECK(std::any_of(r.candidate_tstats.begin(), r.candidate_tstats.end(),
                      [&](const CandidateStat& c) { return c.t_b == r.break_index && c.tstat == r.min_tstat; }));
    CHECK(r.reject_unit_root.p01 == (r.min_tstat < -5.57));
    CHECK(r.reject_unit_root.p05 == (r.min_tstat < -5.08));
    CHECK(r.reject_unit_root.p10 == (r.min_tstat < -4.82));
    CHECK(r.critical_values == CriticalValues{-5.57, -5.08, -4.82});
    CHECK(std::abs(static_cast<double>(r.break_index) - 250.0) <= 12.0);
    CHECK(r.reject_unit_root.p05);
    CHECK(r.trim == 0.15);
}

TEST_CASE("za_test argument checks", "[breaktest]") {
    const auto x = generate_values({synth::RandomWalk{}, 200, 2});
    CHECK(error_code([&] { za_test(x, 0.6); }) == Errc::InvalidArgument);
    CHECK(error_code([&] { za_test(x, 0.0); }) == Errc::InvalidArgument);
    CHECK(error_code([&] { za_test(std::span<const double>(x).first(49)); }) == Errc::TooShort);
    std::vector<double> line(100);
    for (std::size_t t = 0; t < line.size(); ++t) {
        line[t] = 2.0 * static_cast<double>(t);
    }
    CHECK(error_code([&] { za_test(line, 0.15, FixedLags{0}); }) == Errc::AllRankDeficient);
}

TEST_CASE("adding a constant leaves every t-statistic unchanged", "[breaktest][property]") {
    const auto x = generate_values({synth::RandomWalk{}, 400, 8});
    std::vector<double> y(x);
    for (auto& v : y) {
        v += 1234.5;
    }
    const auto a = za_test(x, 0.15, FixedLags{1});
    const auto b = za_test(y, 0.15, FixedLags{1});
    REQUIRE(a.candidate_tstats.size() == b.candidate_tstats.size());
    for (std::size_t i = 0; i < a.candidate_tstats.size(); ++i) {
        CHECK(b.candidate_tstats[i].tstat == Catch::Approx(a.candidate_tstats[i].tstat).epsilon(1e-8));
    }
    CHECK(a.break_index == b.break_index);
}

TEST_CASE("za_test is deterministic", "[breaktest]") {
    const auto x = generate_values({synth::BrokenTrend{0.5, 4.0, 0.03, 1.0, 0.01}, 700, 5});
    const auto a = za_test(x);
    const auto b = za_test(x);
    CHECK(a.candidate_tstats == b.candidate_tstats);
    CHECK(a.break_index == b.break_index);
    CHECK(a.k_used == b.k_used);
}

// Reference values from an independent implementation (statsmodels zivot_andrews, regression="ct",
// autolag=None, trim=0.15) and, for k = 0, a direct numpy least-squares fit.
TEST_CASE("cross-implementation reference values", "[breaktest][oracle]") {
    const auto broken = generate_values({synth::BrokenTrend{0.4, 3.0, 0.02, 1.0, 0.01}, 300, 11});
    const auto k2 = za_test(broken, 0.15, FixedLags{2});
    CHECK(k2.break_index == 120);
    CHECK(k2.min_tstat == Catch::Approx(-10.756639055370693).epsilon(1e-10));
    const auto k0 = za_test(broken, 0.15, FixedLags{0});
    CHECK(k0.break_index == 120);
    CHECK(k0.min_tstat == Catch::Approx(-17.535078038482084).epsilon(1e-10));

    const auto walk = generate_values({synth::RandomWalk{}, 400, 5});
    const auto k1 = za_test(walk, 0.15, FixedLags{1});
    CHECK(k1.break_index == 248);
    CHECK(k1.min_tstat == Catch::Approx(-3.99410314589).epsilon(1e-10));
}

TEST_CASE("split at the break", "[breaktest]") {
    const auto s = generate({synth::RandomWalk{}, 100, 6});
    BreakTestResult r;
    r.break_index = 40;
    const auto [tsb, tsa] = split_at_break(s, r);
    CHECK(tsb.size() == 41);
    CHECK(tsa.size() == 59);
    CHECK(tsb.values().back() == s.values()[40]);
    CHECK(tsa.values().front() == s.values()[41]);

    const auto last = candidate_window(s.size(), 0.15).second;
    r.break_index = last;
    const auto [head, tail] = split_at_break(s, r);
    CHECK(head.size() + tail.size() == s.size());
    CHECK(tail.size() >= static_cast<std::size_t>(std::ceil(0.15 * 100.0)) - 1);

    r.break_index = 99;
    CHECK(error_code([&] { split_at_break(s, r); }) == Errc::OutOfRange);
}

TEST_CASE("simulated critical values", "[breaktest]") {
    CHECK(error_code([] { za_critical_values_mc(200, 50, 1); }) == Errc::InvalidArgument);
    const auto cv = za_critical_values_mc(200, 200, 1);
    CHECK(cv.p01 < cv.p05);
    CHECK(cv.p05 < cv.p10);
    CHECK(cv.p05 > -6.5);
    CHECK(cv.p05 < -4.0);
}
