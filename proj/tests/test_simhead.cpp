#include <doctest.h>

#include <random>
#include <sstream>

#include "byhe/hrestimate.hpp"
#include "byhe/simhead.hpp"
#include "byhe/synth.hpp"
#include "oracles.hpp"

using namespace byhe;

namespace {

FeatureSequence random_features(std::size_t t, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    FeatureSequence f(t, d);
    for (double& v : f.values) v = g(rng);
    return f;
}

HeadConfig window(std::size_t l) {
    HeadConfig c;
    c.window_len = l;
    return c;
}

// act(W^T s + b) computed without the library.
std::vector<std::vector<double>> brute_project(const FeatureSequence& f, const Projection& p, std::size_t l) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i + l <= f.rows; ++i) {
        std::vector<double> s;
        for (std::size_t r = i; r < i + l; ++r) {
            for (std::size_t c = 0; c < f.cols; ++c) s.push_back(f(r, c));
        }
        std::vector<double> v(p.out_dim());
        for (std::size_t k = 0; k < p.out_dim(); ++k) {
            double z = p.has_bias() ? p.bias[k] : 0.0;
            for (std::size_t j = 0; j < s.size(); ++j) z += p.weights(j, k) * s[j];
            v[k] = p.activation == Activation::tanh ? std::tanh(z) : z;
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace

TEST_CASE("slice_windows") {
    CHECK(slice_windows(random_features(5, 2, 1), window(3)).rows == 3);
    const auto s = slice_windows(random_features(70, 4, 1), window(11));
    CHECK(s.rows == 60);
    CHECK(s.cols == 44);
    const auto f = random_features(6, 3, 2);
    const auto rows = slice_windows(f, window(1));
    CHECK(rows.values == f.values);
    const auto two = slice_windows(f, window(2));
    CHECK(two(1, 0) == f(1, 0));
    CHECK(two(1, 5) == f(2, 2));
    CHECK_THROWS_AS(slice_windows(f, window(7)), InputError);
    HeadConfig strided;
    strided.stride = 2;
    CHECK_THROWS_AS(strided.validate(), InputError);
}

TEST_CASE("project") {
    const auto f = random_features(8, 3, 3);
    const auto slices = slice_windows(f, window(2));
    SUBCASE("identity") {
        const auto v = project(slices, identity_projection(6));
        CHECK(v.values == slices.values);
    }
    SUBCASE("zero weights") {
        Projection p = make_projection(6, 5, 1);
        std::fill(p.weights.values.begin(), p.weights.values.end(), 0.0);
        std::fill(p.bias.begin(), p.bias.end(), 0.0);
        const auto v = project(slices, p);
        for (double x : v.values) CHECK(x == 0.0);
    }
    SUBCASE("matches a direct multiply") {
        const Projection p = make_projection(6, 5, 9);
        const auto v = project(slices, p);
        const auto ref = brute_project(f, p, 2);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            for (std::size_t k = 0; k < 5; ++k) CHECK(v(i, k) == doctest::Approx(ref[i][k]).epsilon(1e-12));
        }
    }
    SUBCASE("dimension mismatch") { CHECK_THROWS_AS(project(slices, make_projection(5, 4, 1)), InputError); }
    SUBCASE("initialisation range") {
        const Projection p = make_projection(44, 88, 5);
        const double bound = 1.0 / std::sqrt(44.0);
        for (double w : p.weights.values) CHECK(std::abs(w) <= bound);
        for (double b : p.bias) CHECK(std::abs(b) <= bound);
        CHECK(make_projection(44, 88, 5).weights.values == p.weights.values);
        CHECK(make_projection(44, 88, 6).weights.values != p.weights.values);
    }
}

TEST_CASE("cosine matrix") {
    Matrix v(4, 2);
    v.values = {1, 0, 0, 2, -3, 0, 2, 0};
    const auto m = cosine_matrix(v);
    CHECK(m(0, 3) == doctest::Approx(1.0));
    CHECK(m(0, 1) == doctest::Approx(0.0));
    CHECK(m(0, 2) == doctest::Approx(-1.0));
    CHECK(check_sim_matrix(m).ok());

    Matrix z(2, 2);
    z.values = {0, 0, 1, 1};
    CosineDiagnostics diag;
    const auto mz = cosine_matrix(z, &diag);
    CHECK(mz(0, 0) == 0.0);
    CHECK(mz(0, 1) == 0.0);
    CHECK(diag.degenerate_rows == std::vector<std::size_t>{0});
}

TEST_CASE("head_forward") {
    SUBCASE("unit phasors with an identity head") {
        const double f0 = 1.25;
        const auto f = synth_features(75, 40, 2, 0.0, 0.0, 0);
        const auto r = head_forward(f, identity_projection(2), window(1));
        for (std::size_t i = 0; i < r.n; ++i) {
            for (std::size_t j = 0; j < r.n; ++j) {
                CHECK(r(i, j) == doctest::Approx(std::cos(2 * oracle::kPi * f0 * (double(i) - double(j)) / 30.0))
                                     .epsilon(1e-12)
                                     .scale(1));
            }
        }
    }
    SUBCASE("constant rows collapse to all ones") {
        FeatureSequence f(20, 3);
        for (std::size_t t = 0; t < 20; ++t) f(t, 0) = 0.5, f(t, 1) = -1.0, f(t, 2) = 2.0;
        const auto r = head_forward(f, make_projection(33, 88, 1), HeadConfig{});
        for (double v : r.values) CHECK(v == doctest::Approx(1.0));
    }
    SUBCASE("matches the brute-force composition") {
        const auto f = random_features(30, 4, 21);
        const Projection p = make_projection(12, 7, 22);
        const auto r = head_forward(f, p, window(3));
        const auto ref = oracle::cosine(brute_project(f, p, 3));
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            CHECK(r.values[i] == doctest::Approx(ref.values[i]).epsilon(1e-12).scale(1));
        }
    }
    SUBCASE("positive rescaling leaves R-hat unchanged") {
        const auto f = random_features(25, 3, 4);
        Projection p = make_projection(9, 6, 5, Activation::identity);
        const auto base = head_forward(f, p, window(3));
        for (double& w : p.weights.values) w *= 3.7;
        for (double& b : p.bias) b *= 3.7;
        const auto scaled = head_forward(f, p, window(3));
        for (std::size_t i = 0; i < base.values.size(); ++i) {
            CHECK(scaled.values[i] == doctest::Approx(base.values[i]).epsilon(1e-9).scale(1));
        }
    }
    SUBCASE("N x N size") {
        for (std::size_t l : {1u, 5u, 11u}) CHECK(head_forward(random_features(40, 2, 1), make_projection(2 * l, 4, 1), window(l)).n == 41 - l);
    }
}

TEST_CASE("head_backward") {
    const auto f = random_features(16, 3, 31);
    const Projection p = make_projection(9, 5, 32);
    const auto cfg = window(3);
    const std::size_t n = 14;

    SUBCASE("zero upstream gradient") {
        const auto g = head_backward(f, p, cfg, Matrix(n, n), true);
        for (double v : g.d_weights.values) CHECK(v == 0.0);
        for (double v : g.d_bias) CHECK(v == 0.0);
        for (double v : g.d_features->values) CHECK(v == 0.0);
    }
    SUBCASE("diagonal entries carry no gradient") {
        Matrix up(n, n);
        for (std::size_t i = 0; i < n; ++i) up(i, i) = 1.0;
        const auto g = head_backward(f, p, cfg, up);
        for (double v : g.d_weights.values) CHECK(std::abs(v) < 1e-12);
    }
    SUBCASE("finite differences") {
        std::mt19937_64 rng(33);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Matrix up(n, n);
        for (double& v : up.values) v = gauss(rng);
        const auto g = head_backward(f, p, cfg, up, true);
        Projection q = p;
        FeatureSequence fq = f;
        auto loss = [&] {
            const auto r = head_forward(fq, q, cfg);
            double acc = 0.0;
            for (std::size_t i = 0; i < r.values.size(); ++i) acc += up.values[i] * r.values[i];
            return acc;
        };
        auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
            const double h = 1e-5;
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double saved = params[i];
                params[i] = saved + h;
                const double up_v = loss();
                params[i] = saved - h;
                const double down_v = loss();
                params[i] = saved;
                const double numeric = (up_v - down_v) / (2 * h);
                CHECK(std::abs(analytic[i] - numeric) / std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6}) < 1e-4);
            }
        };
        check(q.weights.values, g.d_weights.values);
        check(q.bias, g.d_bias);
        check(fq.values, g.d_features->values);
    }
    SUBCASE("shape mismatch") { CHECK_THROWS_AS(head_backward(f, p, cfg, Matrix(n + 1, n + 1)), InputError); }
}

TEST_CASE("phasor head feeds the heart-rate estimator") {
    const auto f = synth_features(84, 310, 2, 3.3, 0.0, 0);
    const auto r = head_forward(f, identity_projection(2), window(1));
    CHECK(estimate_hr(r, 30.0) == doctest::Approx(84).epsilon(2.0 / 84));
}

TEST_CASE("projection persistence") {
    for (bool bias : {true, false}) {
        const Projection p = make_projection(6, 4, 8, Activation::identity, bias);
        std::stringstream buf;
        write_projection(p, buf);
        const Projection back = read_projection(buf);
        CHECK(back.weights.values == p.weights.values);
        CHECK(back.bias == p.bias);
        CHECK(back.activation == p.activation);
    }
    std::istringstream bad("# projection in_dim=2 out_dim=2 activation=relu bias=0\n1,0\n0,1\n");
    CHECK_THROWS_AS(read_projection(bad), InputError);
}
