#include "byhe/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace byhe {
namespace {

constexpr double kPi = std::numbers::pi;

// T bump relative to the spike: amplitude, Gaussian width (s), and delay as a
// fraction of the beat period.
constexpr double kTWaveAmplitude = 0.3;
constexpr double kTWaveWidthS = 0.10;
constexpr double kTWaveDelayFraction = 0.12;

std::vector<double> envelope(const SynthSpec& spec, std::size_t n) {
    std::vector<double> env(n, 1.0);
    if (spec.envelope_depth == 0.0) return env;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / spec.fs;
        env[i] = 1.0 + spec.envelope_depth * std::sin(2.0 * kPi * spec.envelope_freq * t);
    }
    return env;
}

void add_noise(const SynthSpec& spec, std::vector<double>& x) {
    if (!spec.noise_snr_db) return;
    double power = 0.0;
    for (const double v : x) power += v * v;
    power /= static_cast<double>(x.size());
    const double sigma = std::sqrt(power / std::pow(10.0, *spec.noise_snr_db / 10.0));
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : x) v += noise(rng);
}

std::size_t sample_count(const SynthSpec& spec) {
    return static_cast<std::size_t>(std::llround(spec.duration_s * spec.fs));
}

}  // namespace

void validate(const SynthSpec& spec) {
    if (!(spec.bpm >= 42.0 && spec.bpm <= 240.0)) throw InputError("bpm must lie in [42, 240]");
    if (!(spec.duration_s > 0.0)) throw InputError("duration must be positive");
    if (!(spec.fs > 0.0)) throw InputError("sampling rate must be positive");
    if (!(spec.envelope_depth >= 0.0 && spec.envelope_depth < 1.0)) throw InputError("envelope depth must lie in [0, 1)");
    if (!(spec.envelope_freq >= 0.0 && spec.envelope_freq < 0.2 * spec.bpm / 60.0)) {
        throw InputError("envelope frequency must be below 0.2 * heart-rate frequency");
    }
    if (!(spec.harmonic2 >= 0.0 && spec.harmonic2 < 1.0)) throw InputError("harmonic2 must lie in [0, 1)");
    if (spec.noise_snr_db && !std::isfinite(*spec.noise_snr_db)) throw InputError("noise SNR must be finite");
    if (!std::isfinite(spec.phase0)) throw InputError("phase0 must be finite");
    if (sample_count(spec) < 1) throw InputError("spec yields no samples");
}

Wave synth_bvp(const SynthSpec& spec) {
    validate(spec);
    const std::size_t n = sample_count(spec);
    const double f = spec.bpm / 60.0;
    const auto env = envelope(spec, n);

    Wave w;
    w.fs = spec.fs;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / spec.fs;
        const double carrier = std::cos(2.0 * kPi * f * t + spec.phase0) +
                               spec.harmonic2 * std::cos(4.0 * kPi * f * t + 2.0 * spec.phase0);
        w.samples[i] = env[i] * carrier;
    }
    add_noise(spec, w.samples);
    return w;
}

Wave synth_ecg_like(const SynthSpec& spec) {
    validate(spec);
    const std::size_t n = sample_count(spec);
    const double period = 60.0 / spec.bpm;
    const double offset = -spec.phase0 / (2.0 * kPi) * period;  // time of beat 0
    const double t_delay = kTWaveDelayFraction * period;
    const auto env = envelope(spec, n);

    Wave w;
    w.fs = spec.fs;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / spec.fs;
        const auto k_near = static_cast<long long>(std::floor((t - offset) / period));
        double v = 0.0;
        for (long long k = k_near - 2; k <= k_near + 2; ++k) {
            const double beat = offset + static_cast<double>(k) * period;
            const double ds = (t - beat) / kEcgSpikeWidthS;
            const double dt = (t - beat - t_delay) / kTWaveWidthS;
            v += std::exp(-0.5 * ds * ds) + kTWaveAmplitude * std::exp(-0.5 * dt * dt);
        }
        w.samples[i] = env[i] * v;
    }
    add_noise(spec, w.samples);
    return w;
}

FeatureSequence synth_features(double bpm, std::size_t frames, std::size_t dims, double delay_frames,
                               double noise_sigma, std::uint64_t seed) {
    if (dims < 2) throw InputError("feature dimension must be at least 2");
    if (frames < 30) throw InputError("feature sequence needs at least 30 frames");
    if (!(bpm > 0.0) || !std::isfinite(delay_frames) || !(noise_sigma >= 0.0)) {
        throw InputError("invalid feature synthesis parameters");
    }
    const double f = bpm / 60.0;
    FeatureSequence seq(frames, dims);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t t = 0; t < frames; ++t) {
        const double theta = 2.0 * kPi * f * (static_cast<double>(t) + delay_frames) / kFeatureFrameRate;
        seq(t, 0) = std::cos(theta);
        seq(t, 1) = std::sin(theta);
        for (std::size_t d = 2; d < dims; ++d) seq(t, d) = noise_sigma > 0.0 ? noise_sigma * noise(rng) : 0.0;
    }
    return seq;
}

SimMatrix oracle_label_matrix(double bpm, double fs, std::size_t n) {
    if (n < 2) throw InputError("oracle matrix needs n >= 2");
    if (!(fs > 0.0)) throw InputError("sampling rate must be positive");
    const double f = bpm / 60.0;
    SimMatrix m(n);
    // Diagonal a holds cos(2 pi f a / fs) exactly, shared by every (i, j) with |i - j| = a.
    std::vector<double> by_lag(n);
    for (std::size_t a = 0; a < n; ++a) by_lag[a] = std::cos(2.0 * kPi * f * static_cast<double>(a) / fs);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = by_lag[i > j ? i - j : j - i];
    }
    return m;
}

}  // namespace byhe
