#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "byhe/types.hpp"

namespace byhe {

/// Mean of each diagonal group g_a = {m[i][j] : |i - j| = a}, a = 0..n-1,
/// returned as a wave sampled at `fs` (the matrix frame rate). Needs n >= 8.
Wave diagonal_profile(const SimMatrix& m, double fs);

/// Strict local maxima above the signal mean (a plateau counts once, at its
/// first sample; endpoints never qualify). Greedy suppression keeps the
/// larger peak within `min_dist` samples, the earlier one on ties.
/// Returned indices are ascending.
std::vector<std::size_t> detect_peaks(const Wave& w, std::size_t min_dist);

/// ceil(fs / 4 Hz): the 240 bpm ceiling.
std::size_t peak_min_distance(double fs);

/// Heart rate from a similarity matrix: diagonal profile -> band-pass ->
/// CWT filter -> peaks -> 60 fs / mean peak interval.
/// InputError if n / fs < 3 s; EstimationError with fewer than 2 peaks.
double estimate_hr(const SimMatrix& m, double fs);

/// The same peak-interval estimate applied to a label wave (>= 5 s).
double estimate_hr_wave(const Wave& w);

/// Peak-interval bpm of an already narrow-banded wave.
double bpm_from_peaks(const std::vector<std::size_t>& peaks, double fs);

struct HrMetrics {
    double mae = 0.0;
    double std = 0.0;   // population std of the signed errors
    double rmse = 0.0;
};

/// Errors are pred - truth. Throws InputError on empty or mismatched input.
HrMetrics metrics(std::span<const double> pred, std::span<const double> truth);

}  // namespace byhe
