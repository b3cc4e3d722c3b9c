#include "byhe/phasemap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace byhe {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

PhaseSeries instantaneous_phase(const AnalyticWave& a) {
    if (a.re.size() != a.im.size()) throw InputError("analytic wave parts differ in length");
    if (a.re.empty()) throw InputError("empty analytic wave");

    PhaseSeries p;
    p.fs = a.fs;
    p.phase.resize(a.size());
    std::size_t degenerate = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::hypot(a.re[i], a.im[i]) < 1e-12) ++degenerate;
        double phi = std::atan2(a.im[i], a.re[i]);
        if (phi < 0.0) phi += kTwoPi;
        if (phi >= kTwoPi) phi = 0.0;
        p.phase[i] = phi;
    }
    if (static_cast<double>(degenerate) > 0.01 * static_cast<double>(a.size())) {
        throw EstimationError("envelope vanishes at " + std::to_string(degenerate) + " of " +
                              std::to_string(a.size()) + " samples; phase undefined");
    }
    return p;
}

SimMatrix label_matrix(const PhaseSeries& p, const std::vector<std::size_t>& indices) {
    if (indices.size() < 2) throw InputError("label matrix needs at least 2 indices");
    for (const std::size_t idx : indices) {
        if (idx >= p.size()) {
            throw InputError("label index " + std::to_string(idx) + " out of range (" + std::to_string(p.size()) +
                             " samples)");
        }
    }
    const std::size_t n = indices.size();
    SimMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = std::cos(p.phase[indices[i]] - p.phase[indices[j]]);
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

std::size_t label_center_offset(std::size_t window_len, std::size_t conv_margin) {
    return (window_len > 0 ? (window_len - 1) / 2 : 0) + conv_margin / 2;
}

PhaseSeries label_phase(const Wave& raw) {
    const auto pad = static_cast<std::size_t>(std::ceil(kLabelPadSeconds * raw.fs));
    const std::size_t order = std::min(kLabelPredictionOrder, raw.size() / 4);
    const Wave extended = order > 0 ? extend_by_prediction(raw, pad, order) : raw;
    const std::size_t skip = order > 0 ? pad : 0;

    const Wave banded = butter_bandpass(extended);
    const Wave narrow = cwt_filter(banded);
    PhaseSeries full = instantaneous_phase(analytic_signal(narrow));
    PhaseSeries p{{}, raw.fs};
    p.phase.assign(full.phase.begin() + static_cast<std::ptrdiff_t>(skip),
                   full.phase.begin() + static_cast<std::ptrdiff_t>(skip + raw.size()));
    return p;
}

SimMatrix make_label(const Wave& raw, LabelKind /*kind*/, std::size_t n_out, std::size_t center_offset) {
    if (n_out < 2) throw InputError("label size must be at least 2");
    if (!(raw.fs > 0.0)) throw InputError("label wave has no sampling rate");
    const double needed = static_cast<double>(n_out) / raw.fs + 2.0;
    if (raw.duration() < needed) {
        throw InputError("label wave too short: " + std::to_string(raw.duration()) + " s, need " +
                         std::to_string(needed) + " s");
    }
    if (center_offset + n_out > raw.size()) throw InputError("label window runs past the end of the wave");

    const auto phase = label_phase(raw);
    std::vector<std::size_t> indices(n_out);
    for (std::size_t i = 0; i < n_out; ++i) indices[i] = center_offset + i;
    return label_matrix(phase, indices);
}

}  // namespace byhe
