#include <doctest.h>

#include <random>

#include "byhe/filters.hpp"
#include "byhe/phasemap.hpp"
#include "byhe/synth.hpp"
#include "oracles.hpp"

using namespace byhe;

namespace {

constexpr double kFs = 30.0;

PhaseSeries tone_phase(double f, double phase0 = 0.0, double seconds = 10.0) {
    return instantaneous_phase(analytic_signal(Wave{oracle::tone(f, kFs, seconds, 1.0, phase0), kFs}));
}

std::vector<std::size_t> iota(std::size_t from, std::size_t n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = from + i;
    return out;
}

double max_abs_diff(const SimMatrix& a, const SimMatrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

SynthSpec clean(double bpm) {
    SynthSpec s;
    s.bpm = bpm;
    s.duration_s = 20.0;
    return s;
}

}  // namespace

TEST_CASE("instantaneous phase") {
    SUBCASE("values of a 1 Hz cosine") {
        const auto p = tone_phase(1.0);
        CHECK(std::abs(oracle::angle_diff(p.phase[0], 0.0)) < 1e-6);
        // t = 0.25 s falls between samples 7 and 8.
        CHECK((p.phase[7] + p.phase[8]) / 2 == doctest::Approx(oracle::kPi / 2).epsilon(1e-3));
        for (double v : p.phase) {
            CHECK(v >= 0.0);
            CHECK(v < 2 * oracle::kPi);
        }
    }
    SUBCASE("initial phase") { CHECK(tone_phase(1.0, 1.0).phase[0] == doctest::Approx(1.0).epsilon(1e-6)); }
    SUBCASE("mean slope of a 1.5 Hz tone") {
        const auto u = oracle::unwrap(tone_phase(1.5).phase);
        const std::size_t a = 75, b = 225;
        CHECK((u[b] - u[a]) / (b - a) == doctest::Approx(2 * oracle::kPi * 1.5 / kFs).epsilon(0.02));
    }
    SUBCASE("degenerate envelope") {
        const auto a = analytic_signal(Wave{std::vector<double>(100, 0.0), kFs});
        CHECK_THROWS_AS(instantaneous_phase(a), EstimationError);
    }
}

TEST_CASE("label matrix") {
    SUBCASE("pure tone follows the closed form") {
        const double f = 1.3;
        const auto p = tone_phase(f);
        const auto idx = iota(60, 180);
        const auto r = label_matrix(p, idx);
        double err = 0.0;
        for (std::size_t i = 0; i < r.n; ++i) {
            for (std::size_t j = 0; j < r.n; ++j) {
                const double expect = std::cos(2 * oracle::kPi * f * (double(i) - double(j)) / kFs);
                err = std::max(err, std::abs(r(i, j) - expect));
            }
        }
        CHECK(err < 0.05);
        CHECK(check_sim_matrix(r).ok());
    }
    SUBCASE("unit diagonal and opposite phases") {
        PhaseSeries p{{0.3, 0.3 + oracle::kPi, 5.0}, kFs};
        const auto r = label_matrix(p, {0, 1, 2});
        for (std::size_t i = 0; i < 3; ++i) CHECK(r(i, i) == 1.0);
        CHECK(r(0, 1) == doctest::Approx(-1.0));
    }
    SUBCASE("constant offset cancels exactly") {
        const auto p = tone_phase(1.1);
        PhaseSeries shifted = p;
        for (double& v : shifted.phase) v = std::fmod(v + 2.2, 2 * oracle::kPi);
        const auto idx = iota(0, 100);
        CHECK(max_abs_diff(label_matrix(p, idx), label_matrix(shifted, idx)) < 1e-12);
    }
    SUBCASE("errors") {
        const auto p = tone_phase(1.0);
        CHECK_THROWS_AS(label_matrix(p, {4}), InputError);
        CHECK_THROWS_AS(label_matrix(p, {0, 300}), InputError);
    }
}

TEST_CASE("center offset") {
    CHECK(label_center_offset(11) == 5);
    CHECK(label_center_offset(11, 4) == 7);
    CHECK(label_center_offset(1) == 0);
}

TEST_CASE("make_label delay invariance across initial phases") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 2 * oracle::kPi);
    SynthSpec a = clean(72), b = clean(72);
    a.phase0 = u(rng);
    b.phase0 = u(rng);
    const auto ra = make_label(synth_bvp(a), LabelKind::bvp, 300, 5);
    const auto rb = make_label(synth_bvp(b), LabelKind::bvp, 300, 5);
    CHECK(max_abs_diff(ra, rb) < 0.1);
}

TEST_CASE("make_label at 60 bpm has a one-period lag of 30 samples") {
    const auto r = make_label(synth_bvp(clean(60)), LabelKind::bvp, 60, 5);
    CHECK(r.n == 60);
    CHECK(r(0, 30) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r(0, 15) == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("ECG-like first row crosses zero like a 1.1 Hz cosine") {
    const auto r = make_label(synth_ecg_like(clean(66)), LabelKind::ecg, 300, 5);
    const double period = kFs / 1.1;
    std::vector<double> got;
    for (std::size_t j = 0; j + 1 < r.n; ++j) {
        if ((r(0, j) > 0) != (r(0, j + 1) > 0)) got.push_back(j + r(0, j) / (r(0, j) - r(0, j + 1)));
    }
    REQUIRE(got.size() >= 20);
    for (std::size_t k = 0; k < got.size(); ++k) {
        const double expect = (0.25 + 0.5 * static_cast<double>(k)) * period;
        CAPTURE(k);
        CHECK(std::abs(got[k] - expect) <= 1.0);
    }
}

TEST_CASE("pure tone label has constant diagonals") {
    const auto r = make_label(Wave{oracle::tone(1.4, kFs, 16.0), kFs}, LabelKind::bvp, 200, 100);
    for (std::size_t a = 0; a < r.n; a += 7) {
        double mean = 0.0, var = 0.0;
        const std::size_t count = r.n - a;
        for (std::size_t i = 0; i < count; ++i) mean += r(i, i + a);
        mean /= static_cast<double>(count);
        for (std::size_t i = 0; i < count; ++i) var += std::pow(r(i, i + a) - mean, 2);
        CAPTURE(a);
        CHECK(std::sqrt(var / static_cast<double>(count)) < 0.05);
    }
}

TEST_CASE("make_label ignores amplitude") {
    SynthSpec s = clean(84);
    s.harmonic2 = 0.3;
    const Wave w = synth_bvp(s);
    const auto base = make_label(w, LabelKind::bvp, 300, 5);
    for (double c : {0.1, 10.0}) {
        Wave scaled = w;
        for (double& v : scaled.samples) v *= c;
        CHECK(max_abs_diff(make_label(scaled, LabelKind::bvp, 300, 5), base) < 1e-6);
    }
}

TEST_CASE("make_label preconditions") {
    SynthSpec s = clean(72);
    s.duration_s = 11.0;
    CHECK_THROWS_AS(make_label(synth_bvp(s), LabelKind::bvp, 300, 5), InputError);
    CHECK_THROWS_AS(make_label(synth_bvp(clean(72)), LabelKind::bvp, 1, 5), InputError);
    CHECK_THROWS_AS(make_label(synth_bvp(clean(72)), LabelKind::bvp, 300, 400), InputError);
}
