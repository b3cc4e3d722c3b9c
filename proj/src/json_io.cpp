#include "byhe/json_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace byhe {
namespace {

using nlohmann::json;

json parse(std::istream& in) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Copies obj[key] into out when present, rejecting values of the wrong type.
template <typename T>
void take(const json& obj, const char* key, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        if constexpr (std::is_same_v<T, bool>) {  // bool counts as unsigned, so test it first
            if (!it->is_boolean()) throw InputError("");
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!it->is_number_unsigned()) throw InputError("");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw InputError("");
        }
        out = it->get<T>();
    } catch (const std::exception&) {
        throw InputError(std::string("config key '") + key + "' has the wrong type");
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const char* where) {
    if (!obj.is_object()) throw InputError(std::string(where) + " must be a JSON object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : keys) known = known || item.key() == k;
        if (!known) throw InputError(std::string("unknown key '") + item.key() + "' in " + where);
    }
}

}  // namespace

TrainConfig read_train_config(std::istream& in) {
    const json j = parse(in);
    reject_unknown(j,
                   {"epochs", "learning_rate", "batch_size", "out_dim", "activation", "halve_on_increase", "seed",
                    "dataset", "weights", "head"},
                   "train config");
    TrainConfig cfg;
    take(j, "epochs", cfg.epochs);
    take(j, "learning_rate", cfg.learning_rate);
    take(j, "batch_size", cfg.batch_size);
    take(j, "out_dim", cfg.out_dim);
    take(j, "halve_on_increase", cfg.halve_on_increase);
    take(j, "seed", cfg.seed);
    if (j.contains("activation")) {
        if (!j["activation"].is_string()) throw InputError("config key 'activation' has the wrong type");
        cfg.activation = activation_from_string(j["activation"].get<std::string>());
    }
    if (j.contains("dataset")) {
        const json& d = j["dataset"];
        reject_unknown(d,
                       {"train_samples", "val_samples", "bpm_min", "bpm_max", "delay_span", "dims", "noise_sigma",
                        "train_frames", "val_frames"},
                       "dataset");
        take(d, "train_samples", cfg.dataset.train_samples);
        take(d, "val_samples", cfg.dataset.val_samples);
        take(d, "bpm_min", cfg.dataset.bpm_min);
        take(d, "bpm_max", cfg.dataset.bpm_max);
        take(d, "delay_span", cfg.dataset.delay_span);
        take(d, "dims", cfg.dataset.dims);
        take(d, "noise_sigma", cfg.dataset.noise_sigma);
        take(d, "train_frames", cfg.dataset.train_frames);
        take(d, "val_frames", cfg.dataset.val_frames);
    }
    if (j.contains("weights")) {
        const json& w = j["weights"];
        reject_unknown(w, {"alpha", "beta", "gamma"}, "weights");
        take(w, "alpha", cfg.weights.alpha);
        take(w, "beta", cfg.weights.beta);
        take(w, "gamma", cfg.weights.gamma);
    }
    if (j.contains("head")) {
        const json& h = j["head"];
        reject_unknown(h, {"window_len", "stride", "conv_margin"}, "head");
        take(h, "window_len", cfg.head.window_len);
        take(h, "stride", cfg.head.stride);
        take(h, "conv_margin", cfg.head.conv_margin);
    }
    cfg.validate();
    return cfg;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_train_config(in);
}

void write_train_config(const TrainConfig& cfg, std::ostream& out) {
    json j;
    j["epochs"] = cfg.epochs;
    j["learning_rate"] = cfg.learning_rate;
    j["batch_size"] = cfg.batch_size;
    j["out_dim"] = cfg.out_dim;
    j["activation"] = to_string(cfg.activation);
    j["halve_on_increase"] = cfg.halve_on_increase;
    j["seed"] = cfg.seed;
    j["dataset"] = {{"train_samples", cfg.dataset.train_samples}, {"val_samples", cfg.dataset.val_samples},
                    {"bpm_min", cfg.dataset.bpm_min},             {"bpm_max", cfg.dataset.bpm_max},
                    {"delay_span", cfg.dataset.delay_span},       {"dims", cfg.dataset.dims},
                    {"noise_sigma", cfg.dataset.noise_sigma},     {"train_frames", cfg.dataset.train_frames},
                    {"val_frames", cfg.dataset.val_frames}};
    j["weights"] = {{"alpha", cfg.weights.alpha}, {"beta", cfg.weights.beta}, {"gamma", cfg.weights.gamma}};
    j["head"] = {{"window_len", cfg.head.window_len}, {"stride", cfg.head.stride},
                 {"conv_margin", cfg.head.conv_margin}};
    out << j.dump(2) << '\n';
}

SynthSpec read_synth_spec(std::istream& in) {
    const json j = parse(in);
    reject_unknown(j,
                   {"bpm", "duration_s", "fs", "phase0", "envelope_depth", "envelope_freq", "noise_snr_db",
                    "harmonic2", "seed"},
                   "synth spec");
    SynthSpec s;
    take(j, "bpm", s.bpm);
    take(j, "duration_s", s.duration_s);
    take(j, "fs", s.fs);
    take(j, "phase0", s.phase0);
    take(j, "envelope_depth", s.envelope_depth);
    take(j, "envelope_freq", s.envelope_freq);
    take(j, "harmonic2", s.harmonic2);
    take(j, "seed", s.seed);
    if (j.contains("noise_snr_db") && !j["noise_snr_db"].is_null()) {
        double snr = 0.0;
        take(j, "noise_snr_db", snr);
        s.noise_snr_db = snr;
    }
    validate(s);
    return s;
}

void write_synth_spec(const SynthSpec& s, std::ostream& out) {
    json j = {{"bpm", s.bpm},
              {"duration_s", s.duration_s},
              {"fs", s.fs},
              {"phase0", s.phase0},
              {"envelope_depth", s.envelope_depth},
              {"envelope_freq", s.envelope_freq},
              {"harmonic2", s.harmonic2},
              {"seed", s.seed}};
    j["noise_snr_db"] = s.noise_snr_db ? json(*s.noise_snr_db) : json(nullptr);
    out << j.dump(2) << '\n';
}

void write_train_report(const TrainReport& r, std::ostream& out) {
    json epochs = json::array();
    for (const auto& e : r.epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"learning_rate", e.learning_rate},
                          {"mse", number_or_null(e.mse)},
                          {"pearson", number_or_null(e.pearson)},
                          {"reg", number_or_null(e.reg)},
                          {"total", number_or_null(e.total)},
                          {"rejected", e.rejected}});
    }
    json pred = json::array();
    for (double v : r.val_pred) pred.push_back(number_or_null(v));
    json j = {{"arm", r.arm},
              {"epochs", epochs},
              {"lr_halvings", r.lr_halvings},
              {"diverged", r.diverged},
              {"degenerate_dataset", r.degenerate_dataset},
              {"val_truth", r.val_truth},
              {"val_pred", pred},
              {"val_failures", r.val_failures},
              {"val_mae", number_or_null(r.val_mae)},
              {"val_std", number_or_null(r.val_std)},
              {"val_rmse", number_or_null(r.val_rmse)},
              {"mean_offdiag", number_or_null(r.mean_offdiag)},
              {"collapsed", r.collapsed}};
    out << j.dump(2) << '\n';
}

void write_grad_check_report(const GradCheckReport& r, std::ostream& out) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"name", e.name},
                           {"max_rel_err", number_or_null(e.max_rel_err)},
                           {"checked", e.checked},
                           {"skipped", e.skipped}});
    }
    json j = {{"h", r.h}, {"instances", r.instances}, {"worst", number_or_null(r.worst)}, {"entries", entries}};
    out << j.dump(2) << '\n';
}

}  // namespace byhe
