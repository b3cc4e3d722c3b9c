// Runs each acceptance criterion once, prints one PASS/FAIL line per criterion
// and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "byhe/filters.hpp"
#include "byhe/hrestimate.hpp"
#include "byhe/losses.hpp"
#include "byhe/phasemap.hpp"
#include "byhe/simhead.hpp"
#include "byhe/synth.hpp"
#include "byhe/traintoy.hpp"
#include "cli.hpp"

using namespace byhe;

namespace {

constexpr double kFs = 30.0;
constexpr double kBpms[] = {48.0, 60.0, 72.0, 90.0, 120.0};

struct Outcome {
    bool pass = false;
    std::string detail;  // every number the criterion depends on, compared by the determinism rerun
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
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

// Rows 150..449 of a 600-sample wave.
constexpr std::size_t kCentralOffset = 150;
constexpr std::size_t kCentralRows = 300;

Outcome delay_invariance() {
    const auto ref = make_label(synth_bvp(clean(72)), LabelKind::bvp, kCentralRows, kCentralOffset);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
        SynthSpec s = clean(72);
        s.phase0 = phase(rng);
        worst = std::max(worst, max_abs_diff(make_label(synth_bvp(s), LabelKind::bvp, kCentralRows, kCentralOffset), ref));
    }
    return {worst < 0.1, "max_diff=" + fmt("%.6f", worst)};
}

Outcome oracle_equivalence() {
    double bvp = 0.0, ecg = 0.0;
    for (double bpm : kBpms) {
        const auto oracle = oracle_label_matrix(bpm, kFs, kCentralRows);
        bvp = std::max(bvp, max_abs_diff(make_label(synth_bvp(clean(bpm)), LabelKind::bvp, kCentralRows, kCentralOffset), oracle));
        ecg = std::max(ecg, max_abs_diff(make_label(synth_ecg_like(clean(bpm)), LabelKind::ecg, kCentralRows, kCentralOffset), oracle));
    }
    return {bvp < 0.1 && ecg < 0.15, "bvp_max_diff=" + fmt("%.6f", bvp) + " ecg_max_diff=" + fmt("%.6f", ecg)};
}

Outcome hr_round_trip() {
    double worst = 0.0;
    for (double bpm : kBpms) {
        std::vector<SynthSpec> specs{clean(bpm)};
        for (std::uint64_t seed : {11, 12, 13}) {
            SynthSpec s = clean(bpm);
            s.noise_snr_db = 5.0;
            s.seed = seed;
            specs.push_back(s);
        }
        for (const auto& s : specs) {
            const double est = estimate_hr(make_label(synth_bvp(s), LabelKind::bvp, kCentralRows, kCentralOffset), kFs);
            worst = std::max(worst, std::abs(est - bpm));
        }
    }
    return {worst <= 2.0, "max_abs_err_bpm=" + fmt("%.4f", worst)};
}

Outcome gradient_check() {
    const auto r = grad_check(0);
    std::string detail = "worst_rel_err=" + fmt("%.3e", r.worst) + " instances=" + std::to_string(r.instances);
    return {r.worst < kGradCheckTolerance, detail};
}

Outcome ablation() {
    TrainConfig cfg;
    cfg.learning_rate = 0.2;
    cfg.dataset.dims = 8;
    cfg.dataset.noise_sigma = 5.0;
    cfg.dataset.delay_span = 1.0;
    cfg.seed = 0;
    const auto byhe = train(cfg);
    const auto base = baseline_wave_mse(cfg);
    const bool pass = std::isfinite(byhe.val_mae) && byhe.val_mae < 3.0 &&
                      (!std::isfinite(base.val_mae) || base.val_mae >= 2.0 * byhe.val_mae);
    return {pass, "byhe_mae=" + fmt("%.4f", byhe.val_mae) + " baseline_mae=" + fmt("%.4f", base.val_mae)};
}

// Runs `train-toy` through the command-line entry point and returns its summary line.
std::string train_toy_summary(double gamma, bool& collapsed) {
    const auto dir = std::filesystem::temp_directory_path() / ("byhe_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    const auto config = dir / "config.json";
    std::ofstream(config) << "{\"weights\": {\"gamma\": " << gamma << "}}";
    std::ostringstream out, err;
    const int code = cli::run({"train-toy", "--config", config.string()}, out, err);
    std::filesystem::remove_all(dir);
    std::string line = out.str();
    if (!line.empty() && line.back() == '\n') line.pop_back();
    if (code != 0) line = "exit=" + std::to_string(code) + " " + err.str();
    collapsed = line.find("collapsed=true") != std::string::npos;
    return line;
}

Outcome collapse() {
    bool strong = false, mild = true;
    const auto a = train_toy_summary(10.0, strong);
    const auto b = train_toy_summary(0.1, mild);
    return {strong && !mild, "gamma=10 {" + a + "} gamma=0.1 {" + b + "}"};
}

Outcome defaults() {
    const BandpassSpec band;
    const HeadConfig head;
    const LossWeights w;
    const TrainConfig train_cfg;
    const auto grid = default_cwt_grid();
    const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
    const bool pass = band.low_hz == 0.7 && band.high_hz == 4.0 && head.window_len == 11 && head.stride == 1 &&
                      w.alpha == 1.0 && w.beta == 0.8 && w.gamma == 0.1 && !grid.empty() && *lo >= 0.3 &&
                      *hi <= 3.75 && train_cfg.learning_rate == 5e-4;
    std::ostringstream d;
    d << "band=[" << band.low_hz << ", " << band.high_hz << "] L=" << head.window_len << " stride=" << head.stride
      << " weights=(" << w.alpha << ", " << w.beta << ", " << w.gamma << ") cwt=[" << *lo << ", " << *hi
      << "] lr=" << train_cfg.learning_rate;
    return {pass, d.str()};
}

struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    bool repeat;  // rerun for the determinism check
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"delay invariance", delay_invariance, true},
        {"oracle equivalence", oracle_equivalence, true},
        {"hr round trip", hr_round_trip, true},
        {"gradient check", gradient_check, true},
        {"ablation", ablation, true},
        {"collapse", collapse, true},
        {"defaults", defaults, false},
    };

    bool all = true;
    std::vector<std::string> first;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        all = all && o.pass;
        if (criteria[i].repeat) first.push_back(o.detail);
        std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::size_t mismatches = 0, k = 0;
    for (const auto& c : criteria) {
        if (!c.repeat) continue;
        std::string again;
        try {
            again = c.run().detail;
        } catch (const std::exception& e) {
            again = std::string("threw: ") + e.what();
        }
        if (again != first[k++]) {
            ++mismatches;
            std::printf("  %s differs on rerun: %s\n", c.name, again.c_str());
        }
    }
    const bool same = mismatches == 0;
    all = all && same;
    std::printf("%s 8 determinism: %zu of %zu reruns differ (%.1f s)\n", same ? "PASS" : "FAIL", mismatches, k,
                seconds_since(t0));
    return all ? 0 : 1;
}
