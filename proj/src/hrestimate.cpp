#include "byhe/hrestimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "byhe/filters.hpp"

namespace byhe {
namespace {

// Narrow-banded signals whose RMS falls below this fraction of the input
// peak are numerical residue (e.g. a constant profile after band-pass).
constexpr double kResidueRatio = 1e-6;

double peak_interval_bpm(const Wave& raw) {
    const Wave narrow = cwt_filter(butter_bandpass(raw));

    double input_peak = 0.0;
    for (const double v : raw.samples) input_peak = std::max(input_peak, std::abs(v));
    double sq = 0.0;
    for (const double v : narrow.samples) sq += v * v;
    const double rms = std::sqrt(sq / static_cast<double>(narrow.size()));
    if (!(rms > kResidueRatio * input_peak)) {
        throw EstimationError("fewer than 2 peaks: no oscillation left after filtering");
    }

    const auto peaks = detect_peaks(narrow, peak_min_distance(raw.fs));
    if (peaks.size() < 2) {
        throw EstimationError("fewer than 2 peaks (found " + std::to_string(peaks.size()) + ")");
    }
    return bpm_from_peaks(peaks, raw.fs);
}

}  // namespace

Wave diagonal_profile(const SimMatrix& m, double fs) {
    if (m.n < 8) throw InputError("diagonal profile needs a matrix of size >= 8");
    Wave w;
    w.fs = fs;
    w.samples.resize(m.n);
    for (std::size_t a = 0; a < m.n; ++a) {
        double sum = 0.0;
        for (std::size_t i = 0; i + a < m.n; ++i) sum += m(i, i + a) + m(i + a, i);
        w.samples[a] = sum / (2.0 * static_cast<double>(m.n - a));
    }
    return w;
}

std::vector<std::size_t> detect_peaks(const Wave& w, std::size_t min_dist) {
    if (min_dist < 1) throw InputError("min_dist must be >= 1");
    const auto& x = w.samples;
    const std::size_t n = x.size();
    std::vector<std::size_t> candidates;
    if (n < 3) return candidates;

    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    std::size_t i = 1;
    while (i + 1 < n) {
        if (x[i] > x[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && x[j + 1] == x[i]) ++j;
            if (j + 1 < n && x[j + 1] < x[i] && x[i] > mean) candidates.push_back(i);
            i = j + 1;
        } else {
            ++i;
        }
    }

    std::vector<std::size_t> order = candidates;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
    std::vector<std::size_t> kept;
    for (const std::size_t c : order) {
        const bool clear = std::none_of(kept.begin(), kept.end(), [&](std::size_t k) {
            return (c > k ? c - k : k - c) < min_dist;
        });
        if (clear) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::size_t peak_min_distance(double fs) { return static_cast<std::size_t>(std::ceil(fs / 4.0)); }

double bpm_from_peaks(const std::vector<std::size_t>& peaks, double fs) {
    if (peaks.size() < 2) throw EstimationError("fewer than 2 peaks");
    const double mean_interval =
        static_cast<double>(peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
    return 60.0 * fs / mean_interval;
}

double estimate_hr(const SimMatrix& m, double fs) {
    if (!(fs > 0.0)) throw InputError("frame rate must be positive");
    if (static_cast<double>(m.n) / fs < 3.0) {
        throw InputError("matrix spans " + std::to_string(static_cast<double>(m.n) / fs) +
                         " s; heart-rate estimation needs >= 3 s");
    }
    return peak_interval_bpm(diagonal_profile(m, fs));
}

double estimate_hr_wave(const Wave& w) {
    if (!(w.fs > 0.0)) throw InputError("wave has no sampling rate");
    if (w.duration() < 5.0) throw InputError("heart-rate estimation from a wave needs >= 5 s");
    return peak_interval_bpm(w);
}

HrMetrics metrics(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw InputError("prediction and truth lengths differ");
    if (pred.empty()) throw InputError("metrics of an empty sequence");
    const auto n = static_cast<double>(pred.size());
    double abs_sum = 0.0, sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        abs_sum += std::abs(e);
        sum += e;
        sq_sum += e * e;
    }
    const double mean = sum / n;
    double var = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = (pred[i] - truth[i]) - mean;
        var += d * d;
    }
    return {abs_sum / n, std::sqrt(var / n), std::sqrt(sq_sum / n)};
}

}  // namespace byhe
