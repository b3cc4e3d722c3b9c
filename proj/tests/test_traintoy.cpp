#include <doctest.h>

#include <cmath>
#include <sstream>

#include "byhe/synth.hpp"
#include "byhe/traintoy.hpp"

using namespace byhe;

namespace {

TrainConfig quick(std::size_t epochs) {
    TrainConfig c;
    c.epochs = epochs;
    c.dataset.train_samples = 8;
    c.dataset.val_samples = 4;
    return c;
}

}  // namespace

TEST_CASE("dataset draws") {
    FeatureDatasetSpec spec;
    spec.delay_span = 0.5;
    const auto ds = make_dataset(spec, 3);
    REQUIRE(ds.train.size() == spec.train_samples);
    REQUIRE(ds.val.size() == spec.val_samples);
    for (const auto& s : ds.train) {
        CHECK(s.bpm >= spec.bpm_min);
        CHECK(s.bpm <= spec.bpm_max);
        CHECK(s.delay_frames >= 0.0);
        CHECK(s.delay_frames < 0.5 * 30.0 * 60.0 / s.bpm);
        CHECK(s.features.rows == spec.train_frames);
        CHECK(s.features.cols == spec.dims);
    }
    CHECK(ds.val.front().features.rows == spec.val_frames);
    const auto again = make_dataset(spec, 3);
    CHECK(again.train.front().features.values == ds.train.front().features.values);
    CHECK(make_dataset(spec, 4).train.front().bpm != ds.train.front().bpm);
}

TEST_CASE("config validation") {
    TrainConfig c;
    c.validate();
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(train(c), InputError);
    c = {};
    c.batch_size = 0;
    CHECK_THROWS_AS(train(c), InputError);
    c = {};
    c.weights.gamma = -1.0;
    CHECK_THROWS_AS(train(c), InputError);
    c = {};
    c.dataset.dims = 1;
    CHECK_THROWS_AS(train(c), InputError);
}

TEST_CASE("zero epochs report only the initial state") {
    const auto r = train(quick(0));
    REQUIRE(r.epochs.size() == 1);
    CHECK(r.epochs[0].epoch == 0);
    CHECK(std::isfinite(r.epochs[0].total));
    CHECK(r.val_pred.size() == 4);
}

TEST_CASE("identical config and seed give identical reports") {
    auto c = quick(6);
    c.dataset.noise_sigma = 0.5;
    c.dataset.dims = 5;
    c.seed = 12;
    const auto a = train(c), b = train(c);
    REQUIRE(a.epochs.size() == b.epochs.size());
    for (std::size_t e = 0; e < a.epochs.size(); ++e) {
        CHECK(a.epochs[e].total == b.epochs[e].total);
        CHECK(a.epochs[e].learning_rate == b.epochs[e].learning_rate);
    }
    CHECK(a.val_pred == b.val_pred);
    const auto x = baseline_wave_mse(c), y = baseline_wave_mse(c);
    CHECK(x.epochs.back().total == y.epochs.back().total);
    CHECK(x.val_pred == y.val_pred);
}

TEST_CASE("noise-free training without the regularizer") {
    TrainConfig c;
    c.weights.gamma = 0.0;
    c.epochs = 200;
    const auto r = train(c);
    CHECK(r.epochs.size() == 201);
    CHECK_FALSE(r.diverged);
    CHECK(r.val_failures == 0);
    CHECK(r.val_mae < 2.0);
    std::size_t rejected = 0;
    for (std::size_t e = 1; e < r.epochs.size(); ++e) {
        CHECK(r.epochs[e].total <= r.epochs[e - 1].total);
        rejected += r.epochs[e].rejected;
    }
    CHECK(rejected == r.lr_halvings);
    CHECK(r.epochs.back().total < r.epochs.front().total);
}

TEST_CASE("aligned labels: both arms work") {
    auto c = quick(60);
    c.dataset.delay_span = 0.0;
    c.learning_rate = 0.05;
    const auto byhe_arm = train(c);
    const auto base_arm = baseline_wave_mse(c);
    CHECK(byhe_arm.val_mae < 3.0);
    CHECK(base_arm.val_mae < 3.0);
    CHECK(base_arm.arm == "baseline");
    CHECK(std::isnan(base_arm.mean_offdiag));
}

TEST_CASE("BYHE accuracy does not depend on the label delay distribution") {
    auto c = quick(60);
    c.learning_rate = 0.05;
    c.dataset.noise_sigma = 1.0;
    c.dataset.dims = 6;
    c.dataset.delay_span = 0.0;
    const double aligned = train(c).val_mae;
    c.dataset.delay_span = 1.0;
    const double delayed = train(c).val_mae;
    CHECK(std::abs(aligned - delayed) <= 0.5);
}

TEST_CASE("single-sample dataset is flagged") {
    auto c = quick(20);
    c.dataset.train_samples = 1;
    const auto r = train(c);
    CHECK(r.degenerate_dataset);
    CHECK(r.epochs.back().total <= r.epochs.front().total);
    CHECK_FALSE(quick(0).dataset.train_samples < 8);
}

TEST_CASE("default regularizer weight does not collapse") {
    const auto r = train(quick(40));
    CHECK_FALSE(r.collapsed);
    CHECK(r.mean_offdiag < kCollapseThreshold);
}

TEST_CASE("mean off-diagonal") {
    CHECK(mean_off_diagonal(SimMatrix(5, 1.0)) == 1.0);
    SimMatrix m(3);
    m.values = {1, 0.5, -0.5, 0.5, 1, 0.2, -0.5, 0.2, 1};
    CHECK(mean_off_diagonal(m) == doctest::Approx(0.4 / 6));
}

TEST_CASE("gradient check") {
    const auto r = grad_check(0);
    CHECK(r.instances == kGradCheckInstances);
    CHECK(r.worst < kGradCheckTolerance);
    bool saw_skip = false;
    for (const auto& e : r.entries) {
        CAPTURE(e.name);
        CHECK(e.checked > 0);
        CHECK(e.max_rel_err < kGradCheckTolerance);
        saw_skip = saw_skip || e.skipped > 0;
    }
    CHECK(saw_skip);

    const auto coarse = grad_check(0, 1e-3);
    CHECK(std::isfinite(coarse.worst));
    CHECK(coarse.worst > r.worst);

    CHECK_THROWS_AS(grad_check(0, 1e-2), InputError);
    CHECK_THROWS_AS(grad_check(0, 1e-8), InputError);
    CHECK(relative_error(0.0, 0.0) == 0.0);
    CHECK(relative_error(2.0, 1.0) == 0.5);
}

TEST_CASE("epoch csv") {
    const auto r = train(quick(2));
    std::ostringstream out;
    write_epoch_csv(r, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,learning_rate,mse,pearson,reg,total,rejected");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
}
