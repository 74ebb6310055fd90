#include "emdscale/emd.hpp"
#include "emdscale/series_io.hpp"
#include "emdscale/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace emdscale;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> sine(std::size_t n, double period, double amplitude = 1.0, double phase = 0.0) {
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        out[t] = amplitude * std::sin(kTwoPi * static_cast<double>(t) / period + phase);
    }
    return out;
}

double max_abs(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

std::size_t count_gap(std::span<const double> imf) {
    const auto e = find_extrema(imf).count();
    const auto z = count_zero_crossings(imf);
    return e > z ? e - z : z - e;
}

/// Seeded inputs shared by the property tests.
std::vector<std::pair<std::string, std::vector<double>>> fixtures() {
    std::vector<std::pair<std::string, std::vector<double>>> out;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        out.emplace_back("white" + std::to_string(seed), generate_values({synth::WhiteNoise{}, 2048, seed}));
        out.emplace_back("walk" + std::to_string(seed), generate_values({synth::RandomWalk{}, 2048, seed}));
    }
    out.emplace_back("fbm", generate_values({synth::Fbm{0.7}, 3000, 9}));
    auto mix = sine(1500, 16.0);
    const auto slow = sine(1500, 128.0, 2.0);
    for (std::size_t t = 0; t < mix.size(); ++t) {
        mix[t] += slow[t] + 0.01 * static_cast<double>(t);
    }
    out.emplace_back("two_sines", std::move(mix));
    for (const char* name : {"sp500_1999_2018.csv", "nasdaq_1999_2018.csv"}) {
        const auto s = parse_ohlcv_csv(oracle::slurp(oracle::data_file(name)));
        out.emplace_back(name, std::vector<double>(s.values().begin(), s.values().end()));
    }
    return out;
}

}  // namespace

TEST_CASE("find_extrema on small inputs", "[emd]") {
    const std::vector<double> zigzag{0, 1, 0, 1, 0};
    const auto e = find_extrema(zigzag);
    CHECK(e.maxima == std::vector<std::size_t>{1, 3});
    CHECK(e.minima == std::vector<std::size_t>{2});

    const std::vector<double> ramp{1, 2, 3, 4};
    const auto r = find_extrema(ramp);
    CHECK(r.maxima.empty());
    CHECK(r.minima.empty());

    CHECK(error_code([] { find_extrema(std::vector<double>{1, 2}); }) == Errc::TooShort);
}

TEST_CASE("plateau extrema are anchored once at the midpoint", "[emd]") {
    const std::vector<double> x{0, 1, 3, 3, 3, 1, 0, -2, -2, 0};
    const auto e = find_extrema(x);
    CHECK(e.maxima == std::vector<std::size_t>{3});
    CHECK(e.minima == std::vector<std::size_t>{7});
    // A flat run that continues in the same direction is not an extremum.
    const auto step = find_extrema(std::vector<double>{0, 1, 1, 2, 3});
    CHECK(step.count() == 0);
}

TEST_CASE("sampled sine has the analytic number of extrema", "[emd]") {
    // sin(2 pi t / 64) over 4 periods: peaks at t = 16 + 64 j, troughs at 48 + 64 j.
    const auto x = sine(256, 64.0);
    const auto e = find_extrema(x);
    CHECK(e.maxima == std::vector<std::size_t>{16, 80, 144, 208});
    CHECK(e.minima == std::vector<std::size_t>{48, 112, 176, 240});
}

TEST_CASE("zero crossings", "[emd]") {
    CHECK(count_zero_crossings(std::vector<double>{1, -1, 1, -1}) == 3);
    CHECK(count_zero_crossings(std::vector<double>{1, 0, -1}) == 1);
    CHECK(count_zero_crossings(std::vector<double>{1, 0, 1}) == 0);
    const auto x = generate_values({synth::WhiteNoise{}, 500, 4});
    CHECK(count_zero_crossings(x) == oracle::sign_changes(x));
}

TEST_CASE("natural spline reproduces lines and interpolates knots", "[emd]") {
    std::vector<double> line(50);
    std::vector<std::size_t> every(50);
    for (std::size_t t = 0; t < 50; ++t) {
        line[t] = 3.0 - 0.25 * static_cast<double>(t);
        every[t] = t;
    }
    const auto env = envelope(line, every);
    for (std::size_t t = 0; t < 50; ++t) {
        CHECK(env[t] == Catch::Approx(line[t]).margin(1e-12));
    }

    const auto noisy = generate_values({synth::WhiteNoise{}, 64, 8});
    const std::vector<std::size_t> anchors{3, 10, 22, 40, 41, 60};
    const auto through = envelope(noisy, anchors);
    for (std::size_t a : anchors) {
        CHECK(through[a] == Catch::Approx(noisy[a]).margin(1e-12));
    }
}

TEST_CASE("two anchors give the straight segment through them", "[emd]") {
    std::vector<double> x(20, 0.0);
    x[4] = 1.0;
    x[14] = 6.0;
    const std::vector<std::size_t> anchors{4, 14};
    const auto env = envelope(x, anchors, BoundaryPolicy::None);
    for (std::size_t t = 0; t < 20; ++t) {
        CHECK(env[t] == Catch::Approx(1.0 + 0.5 * (static_cast<double>(t) - 4.0)).margin(1e-12));
    }
    CHECK(error_code([&] { envelope(x, std::vector<std::size_t>{4}, BoundaryPolicy::None); }) ==
          Errc::InsufficientAnchors);
    CHECK(error_code([&] { envelope(x, std::vector<std::size_t>{}, BoundaryPolicy::MirrorExtrema); }) ==
          Errc::InsufficientAnchors);
}

TEST_CASE("upper envelope of a sine lies above it on the interior", "[emd]") {
    const auto x = sine(1000, 37.3, 1.0, 0.4);
    const auto upper = envelope(x, find_extrema(x).maxima);
    const auto lower = envelope(x, find_extrema(x).minima);
    const auto [lo, hi] = oracle::interior(x.size());
    for (std::size_t t = lo; t < hi; ++t) {
        CHECK(upper[t] >= x[t] - 1e-12);
        CHECK(lower[t] <= x[t] + 1e-12);
    }
}

TEST_CASE("sifting a pure sine returns it", "[emd]") {
    const auto x = sine(512, 64.0);
    const auto [imf, iterations] = sift(x);
    CHECK(iterations <= 2);
    double diff = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        diff = std::max(diff, std::abs(imf[t] - x[t]));
    }
    CHECK(diff <= 1e-6 * max_abs(x));
}

TEST_CASE("sifting removes a slow quadratic trend", "[emd]") {
    const std::size_t n = 1000;
    const auto s = sine(n, 25.0);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double u = static_cast<double>(t) / static_cast<double>(n);
        x[t] = s[t] + 3.0 * u * u - 2.0 * u;
    }
    const auto [imf, iterations] = sift(x);
    CHECK(iterations >= 1);
    CHECK(oracle::interior_correlation(imf, s) > 0.95);
    CHECK(count_gap(imf) <= 1);
}

TEST_CASE("sifting needs oscillation", "[emd]") {
    CHECK(error_code([] { sift(std::vector<double>(100, 2.5)); }) == Errc::NoOscillation);
    CHECK(error_code([] { sift(std::vector<double>{0, 1, 2, 3, 2, 1, 0}); }) == Errc::NoOscillation);
    EmdConfig bad;
    bad.sd_threshold = 0.0;
    CHECK(error_code([&] { sift(sine(100, 10.0), bad); }) == Errc::InvalidArgument);
}

TEST_CASE("monotonic ramp has no IMFs", "[emd]") {
    std::vector<double> ramp(100);
    for (std::size_t t = 0; t < ramp.size(); ++t) {
        ramp[t] = 0.5 * static_cast<double>(t) + std::sqrt(static_cast<double>(t));
    }
    const auto d = decompose(ramp);
    CHECK(d.imf_count() == 0);
    CHECK(d.residue == ramp);
    CHECK(error_code([] { decompose(std::vector<double>(15, 1.0)); }) == Errc::TooShort);
}

TEST_CASE("two sines and a trend separate in order", "[emd]") {
    const std::size_t n = 2048;
    const auto fast = sine(n, 16.0);
    const auto slow = sine(n, 128.0, 1.5, 0.3);
    std::vector<double> trend(n);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
        trend[t] = 0.002 * static_cast<double>(t);
        x[t] = fast[t] + slow[t] + trend[t];
    }
    const auto d = decompose(x);
    REQUIRE(d.imf_count() >= 2);
    CHECK(oracle::interior_correlation(d.imfs[0], fast) > 0.9);
    CHECK(oracle::interior_correlation(d.imfs[1], slow) > 0.9);
    // Everything after the slow sine should be close to the trend.
    const auto rest = reconstruct(d, imf_range(2, d.imf_count()), true);
    const auto [lo, hi] = oracle::interior(n);
    double worst = 0.0;
    for (std::size_t t = lo; t < hi; ++t) {
        worst = std::max(worst, std::abs(rest[t] - trend[t]));
    }
    CHECK(worst < 0.2);
}

TEST_CASE("a pure tone decomposes into one IMF and stops", "[emd]") {
    // Sifting the rounding-level remainder would otherwise go on indefinitely.
    const auto x = generate_values({synth::Tone{37.0}, 2000, 0});
    const auto d = decompose(x);
    REQUIRE(d.imf_count() == 1);
    CHECK(oracle::interior_correlation(d.imfs[0], x) > 0.999);
    CHECK(max_abs(d.residue) < 0.01);

    EmdConfig off;
    off.residue_tolerance = 0.0;
    off.max_imfs = 4;
    CHECK(decompose(x, off).imf_count() == 4);
    off.residue_tolerance = 1.0;
    CHECK(error_code([&] { decompose(x, off); }) == Errc::InvalidArgument);
}

TEST_CASE("max_imfs caps the decomposition", "[emd]") {
    const auto x = generate_values({synth::WhiteNoise{}, 1024, 5});
    EmdConfig config;
    config.max_imfs = 3;
    const auto d = decompose(x, config);
    CHECK(d.imf_count() == 3);
    const auto full = reconstruct(d, imf_range(0, 3), true);
    for (std::size_t t = 0; t < x.size(); ++t) {
        CHECK(std::abs(full[t] - x[t]) <= 1e-8 * max_abs(x));
    }
}

TEST_CASE("reconstruct", "[emd]") {
    const auto x = generate_values({synth::RandomWalk{}, 600, 12});
    const auto d = decompose(x);
    REQUIRE(d.imf_count() > 2);
    const auto all = reconstruct(d, imf_range(0, d.imf_count()), true);
    for (std::size_t t = 0; t < x.size(); ++t) {
        CHECK(std::abs(all[t] - x[t]) <= 1e-8 * max_abs(x));
    }
    const auto none = reconstruct(d, std::vector<std::size_t>{}, false);
    CHECK(none == std::vector<double>(x.size(), 0.0));
    const auto residue_only = reconstruct(d, std::vector<std::size_t>{}, true);
    CHECK(residue_only == d.residue);
    CHECK(error_code([&] { reconstruct(d, std::vector<std::size_t>{d.imf_count()}, false); }) ==
          Errc::IndexOutOfRange);
}

TEST_CASE("decomposition invariants on every fixture", "[emd][property]") {
    for (const auto& [name, x] : fixtures()) {
        INFO(name);
        const auto d = decompose(x);
        REQUIRE(d.imf_count() >= 1);
        CHECK(d.sift_counts.size() == d.imf_count());

        // Completeness.
        const double tol = 1e-8 * max_abs(x);
        const auto back = reconstruct(d, imf_range(0, d.imf_count()), true);
        double err = 0.0;
        for (std::size_t t = 0; t < x.size(); ++t) {
            err = std::max(err, std::abs(back[t] - x[t]));
        }
        CHECK(err <= tol);

        // Residue can no longer be sifted.
        const auto re = find_extrema(d.residue);
        CHECK_FALSE(can_sift(re));
        CHECK(re.count() < 3);

        double previous_period = 0.0;
        const auto [lo, hi] = oracle::interior(x.size());
        for (std::size_t k = 0; k < d.imf_count(); ++k) {
            INFO("imf " << k + 1);
            const auto& imf = d.imfs[k];
            CHECK(imf.size() == x.size());
            CHECK(count_gap(imf) <= 1);

            // Mean envelope small against the IMF on the interior.
            const auto m = mean_envelope(imf);
            const std::span<const double> core(imf.data() + lo, hi - lo);
            const std::span<const double> mcore(m.data() + lo, hi - lo);
            CHECK(oracle::rms(mcore) <= 0.1 * oracle::rms(core));

            // Periods grow with the IMF index.
            const double period = oracle::zero_crossing_period(imf);
            CHECK(period >= previous_period);
            previous_period = period;
        }
    }
}

TEST_CASE("decompose is deterministic", "[emd]") {
    const auto x = generate_values({synth::Fbm{0.6}, 4000, 21});
    const auto a = decompose(x);
    const auto b = decompose(x);
    CHECK(a.imfs == b.imfs);
    CHECK(a.residue == b.residue);
    CHECK(a.sift_counts == b.sift_counts);
}

TEST_CASE("decomposition CSV layout", "[emd]") {
    const auto x = sine(64, 16.0);
    const auto d = decompose(x, {}, "tone");
    CHECK(d.source_label == "tone");
    std::ostringstream out;
    write_decomposition_csv(out, d);
    const auto text = out.str();
    std::string header = text.substr(0, text.find('\n'));
    std::string expected = "t";
    for (std::size_t k = 1; k <= d.imf_count(); ++k) {
        expected += ",imf" + std::to_string(k);
    }
    expected += ",residue";
    CHECK(header == expected);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(x.size() + 1));
}
