#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "byhe/filters.hpp"
#include "byhe/hrestimate.hpp"
#include "byhe/json_io.hpp"
#include "byhe/log.hpp"
#include "byhe/phasemap.hpp"
#include "byhe/signalio.hpp"
#include "byhe/synth.hpp"
#include "byhe/traintoy.hpp"

namespace byhe::cli {
namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot write '" + path + "'");
    return f;
}

SimMatrix load_sim(const std::string& path) { return SimMatrix::from_matrix(load_matrix(path)); }

struct LabelMapArgs {
    std::string in, out, heatmap, kind = "bvp";
    std::size_t n = 300, window = 11, conv_margin = 0;
    std::optional<std::size_t> offset;
    std::optional<double> fs;
};

int cmd_label_map(const LabelMapArgs& a, std::ostream& out) {
    if (a.kind != "bvp" && a.kind != "ecg") throw InputError("--kind must be bvp or ecg");
    const Wave w = load_wave(a.in, a.fs);
    const std::size_t offset = a.offset.value_or(label_center_offset(a.window, a.conv_margin));
    const SimMatrix r = make_label(w, a.kind == "ecg" ? LabelKind::ecg : LabelKind::bvp, a.n, offset);
    save_matrix(r, a.out);
    if (!a.heatmap.empty()) {
        auto f = open_out(a.heatmap);
        write_pgm(r, f);
    }
    out << "wrote " << r.n << "x" << r.n << " matrix to " << a.out << '\n';
    return kExitOk;
}

struct HrArgs {
    std::string matrix, wave;
    double fs = 30.0;
};

int cmd_hr(const HrArgs& a, std::ostream& out) {
    if (a.matrix.empty() == a.wave.empty()) throw InputError("give exactly one of --matrix or --wave");
    const double bpm = a.matrix.empty() ? estimate_hr_wave(load_wave(a.wave)) : estimate_hr(load_sim(a.matrix), a.fs);
    char buf[64];
    std::snprintf(buf, sizeof buf, "bpm=%.2f", bpm);
    out << buf << '\n';
    return kExitOk;
}

struct SynthArgs {
    std::string out, kind = "bvp", config;
    SynthSpec spec;
    std::optional<double> snr;
};

int cmd_synth(SynthArgs a, std::ostream& out) {
    if (a.kind != "bvp" && a.kind != "ecg") throw InputError("--kind must be bvp or ecg");
    if (!a.config.empty()) {
        std::ifstream f(a.config);
        if (!f) throw InputError("cannot open '" + a.config + "'");
        a.spec = read_synth_spec(f);
    }
    if (a.snr) a.spec.noise_snr_db = a.snr;
    const Wave w = a.kind == "ecg" ? synth_ecg_like(a.spec) : synth_bvp(a.spec);
    save_wave(w, a.out);
    out << "wrote " << w.size() << " samples to " << a.out << '\n';
    return kExitOk;
}

struct FilterArgs {
    std::string in, out;
    BandpassSpec band;
    bool cwt = false;
    std::optional<double> fs;
};

int cmd_filter(const FilterArgs& a, std::ostream& out) {
    Wave w = butter_bandpass(load_wave(a.in, a.fs), a.band);
    if (a.cwt) w = cwt_filter(w);
    save_wave(w, a.out);
    out << "wrote " << w.size() << " samples to " << a.out << '\n';
    return kExitOk;
}

struct DiagArgs {
    std::string matrix, out;
    double fs = 30.0;
};

int cmd_diag_profile(const DiagArgs& a, std::ostream& out) {
    const Wave p = diagonal_profile(load_sim(a.matrix), a.fs);
    save_wave(p, a.out);
    out << "wrote " << p.size() << " samples to " << a.out << '\n';
    return kExitOk;
}

struct GradArgs {
    std::uint64_t seed = 0;
    double h = 1e-5;
    std::string json;
};

int cmd_grad_check(const GradArgs& a, std::ostream& out) {
    const auto r = grad_check(a.seed, a.h);
    for (const auto& e : r.entries) {
        out << e.name << " max_rel_err=" << format_double(e.max_rel_err) << " checked=" << e.checked
            << " skipped=" << e.skipped << '\n';
    }
    out << "max_rel_err=" << format_double(r.worst) << (r.worst < kGradCheckTolerance ? " (within " : " (above ")
        << format_double(kGradCheckTolerance) << ")\n";
    if (!a.json.empty()) {
        auto f = open_out(a.json);
        write_grad_check_report(r, f);
    }
    return kExitOk;
}

struct TrainArgs {
    std::string config, arm = "byhe", report, csv;
    std::optional<std::uint64_t> seed;
    bool print_config = false;
};

int cmd_train_toy(const TrainArgs& a, std::ostream& out) {
    TrainConfig cfg = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.print_config) {
        write_train_config(cfg, out);
        return kExitOk;
    }
    if (a.arm != "byhe" && a.arm != "baseline") throw InputError("--arm must be byhe or baseline");
    const TrainReport r = a.arm == "byhe" ? train(cfg) : baseline_wave_mse(cfg);
    if (!a.report.empty()) {
        auto f = open_out(a.report);
        write_train_report(r, f);
    }
    if (!a.csv.empty()) {
        auto f = open_out(a.csv);
        write_epoch_csv(r, f);
    }
    const auto& last = r.epochs.back();
    out << "arm=" << r.arm << " epochs=" << last.epoch << " loss=" << format_double(last.total)
        << " lr_halvings=" << r.lr_halvings << " val_mae=" << format_double(r.val_mae)
        << " val_failures=" << r.val_failures << " mean_offdiag=" << format_double(r.mean_offdiag)
        << " collapsed=" << (r.collapsed ? "true" : "false") << " diverged=" << (r.diverged ? "true" : "false")
        << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Phase self-similarity labels and heart-rate tools", "byhe"};
    app.require_subcommand(1);
    std::function<int()> action;

    LabelMapArgs lm;
    auto* label_map = app.add_subcommand("label-map", "Wave file to a delay-invariant label matrix");
    label_map->add_option("--in", lm.in, "input wave")->required();
    label_map->add_option("--kind", lm.kind, "bvp or ecg")->capture_default_str();
    label_map->add_option("--n", lm.n, "matrix size")->capture_default_str();
    label_map->add_option("--out", lm.out, "output matrix CSV")->required();
    label_map->add_option("--heatmap", lm.heatmap, "optional PGM heatmap");
    label_map->add_option("--window", lm.window, "head window length")->capture_default_str();
    label_map->add_option("--conv-margin", lm.conv_margin, "frames consumed by a backbone")->capture_default_str();
    label_map->add_option("--offset", lm.offset, "first sample index (overrides the window centering)");
    label_map->add_option("--fs", lm.fs, "sampling rate when the file has none");
    label_map->callback([&] { action = [&] { return cmd_label_map(lm, out); }; });

    HrArgs hr;
    auto* hr_cmd = app.add_subcommand("hr", "Heart rate from a similarity matrix or a wave");
    hr_cmd->add_option("--matrix", hr.matrix, "similarity matrix CSV");
    hr_cmd->add_option("--wave", hr.wave, "wave file");
    hr_cmd->add_option("--fs", hr.fs, "matrix frame rate")->capture_default_str();
    hr_cmd->callback([&] { action = [&] { return cmd_hr(hr, out); }; });

    SynthArgs sy;
    auto* synth = app.add_subcommand("synth", "Synthetic BVP or ECG-like wave");
    synth->add_option("--bpm", sy.spec.bpm)->capture_default_str();
    synth->add_option("--dur", sy.spec.duration_s, "seconds")->capture_default_str();
    synth->add_option("--fs", sy.spec.fs)->capture_default_str();
    synth->add_option("--phase", sy.spec.phase0, "radians")->capture_default_str();
    synth->add_option("--envelope-depth", sy.spec.envelope_depth)->capture_default_str();
    synth->add_option("--envelope-freq", sy.spec.envelope_freq, "Hz")->capture_default_str();
    synth->add_option("--harmonic2", sy.spec.harmonic2)->capture_default_str();
    synth->add_option("--snr", sy.snr, "noise SNR in dB (noise-free when absent)");
    synth->add_option("--seed", sy.spec.seed)->capture_default_str();
    synth->add_option("--kind", sy.kind, "bvp or ecg")->capture_default_str();
    synth->add_option("--config", sy.config, "JSON spec (flags other than --snr are ignored)");
    synth->add_option("--out", sy.out)->required();
    synth->callback([&] { action = [&] { return cmd_synth(sy, out); }; });

    FilterArgs fi;
    auto* filter = app.add_subcommand("filter", "Zero-phase band-pass, optionally followed by the wavelet filter");
    filter->add_option("--in", fi.in)->required();
    filter->add_option("--out", fi.out)->required();
    filter->add_option("--low", fi.band.low_hz, "Hz")->capture_default_str();
    filter->add_option("--high", fi.band.high_hz, "Hz")->capture_default_str();
    filter->add_option("--order", fi.band.order)->capture_default_str();
    filter->add_flag("--cwt", fi.cwt, "apply the wavelet emphasis filter");
    filter->add_option("--fs", fi.fs, "sampling rate when the file has none");
    filter->callback([&] { action = [&] { return cmd_filter(fi, out); }; });

    DiagArgs dp;
    auto* diag = app.add_subcommand("diag-profile", "Diagonal-mean profile of a similarity matrix");
    diag->add_option("--matrix", dp.matrix)->required();
    diag->add_option("--fs", dp.fs)->capture_default_str();
    diag->add_option("--out", dp.out)->required();
    diag->callback([&] { action = [&] { return cmd_diag_profile(dp, out); }; });

    GradArgs gc;
    auto* grad = app.add_subcommand("grad-check", "Finite-difference check of all gradients");
    grad->add_option("--seed", gc.seed)->capture_default_str();
    grad->add_option("--step", gc.h, "central difference step h")->capture_default_str();
    grad->add_option("--json", gc.json, "write the report as JSON");
    grad->callback([&] { action = [&] { return cmd_grad_check(gc, out); }; });

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train-toy", "Train the projection head on synthetic features");
    train_cmd->add_option("--config", tr.config, "JSON training config (defaults when absent)");
    train_cmd->add_option("--arm", tr.arm, "byhe or baseline")->capture_default_str();
    train_cmd->add_option("--seed", tr.seed, "overrides the config seed");
    train_cmd->add_option("--report", tr.report, "write the report as JSON");
    train_cmd->add_option("--csv", tr.csv, "write per-epoch losses as CSV");
    train_cmd->add_flag("--print-config", tr.print_config, "print the effective config and exit");
    train_cmd->callback([&] { action = [&] { return cmd_train_toy(tr, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        const CLI::App* sub = nullptr;
        for (const auto* s : app.get_subcommands()) sub = s;
        err << (sub != nullptr ? sub->help() : app.help());
        return kExitUsage;
    }

    try {
        return action();
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const EstimationError& e) {
        err << "estimation failed: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace byhe::cli
