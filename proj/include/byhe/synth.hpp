#pragma once

#include <cstdint>
#include <optional>

#include "byhe/types.hpp"

namespace byhe {

/// Parameters of a synthetic physiological wave.
struct SynthSpec {
    double bpm = 72.0;
    double duration_s = 20.0;
    double fs = 30.0;
    double phase0 = 0.0;           // radians
    double envelope_depth = 0.0;   // [0, 1)
    double envelope_freq = 0.1;    // Hz, < 0.2 * bpm / 60
    std::optional<double> noise_snr_db;
    double harmonic2 = 0.0;        // [0, 1), relative amplitude of the 2f term
    std::uint64_t seed = 0;
};

/// Throws InputError on any violated invariant.
void validate(const SynthSpec& spec);

/// (1 + d sin(2 pi f_env t)) [cos(2 pi f t + phi0) + h2 cos(4 pi f t + 2 phi0)] + noise.
Wave synth_bvp(const SynthSpec& spec);

/// Narrow QRS-like spikes once per beat plus a broad T bump, under the same
/// envelope and noise model as synth_bvp. Beat k peaks where 2 pi f t + phi0 = 2 pi k.
Wave synth_ecg_like(const SynthSpec& spec);

inline constexpr double kEcgSpikeWidthS = 0.040;
inline constexpr double kFeatureFrameRate = 30.0;

/// Row t = [cos(theta_t), sin(theta_t), noise...], theta_t = 2 pi (bpm/60)(t + delay)/30.
FeatureSequence synth_features(double bpm, std::size_t frames, std::size_t dims, double delay_frames,
                               double noise_sigma, std::uint64_t seed);

/// values[i][j] = cos(2 pi (bpm/60)(i - j) / fs).
SimMatrix oracle_label_matrix(double bpm, double fs, std::size_t n);

}  // namespace byhe
