#pragma once

#include <cstddef>
#include <vector>

#include "byhe/filters.hpp"
#include "byhe/types.hpp"

namespace byhe {

/// Instantaneous phase wrapped to [0, 2 pi).
struct PhaseSeries {
    std::vector<double> phase;
    double fs = 0.0;

    std::size_t size() const { return phase.size(); }
};

enum class LabelKind { bvp, ecg };

/// Four-quadrant arctangent of (im, re). Throws EstimationError when the
/// envelope is below 1e-12 at more than 1% of the samples.
PhaseSeries instantaneous_phase(const AnalyticWave& a);

/// values[i][j] = cos(phase[idx[i]] - phase[idx[j]]).
SimMatrix label_matrix(const PhaseSeries& p, const std::vector<std::size_t>& indices);

/// Label-side alignment with the similarity head: window centers sit
/// (L - 1) / 2 + conv_margin / 2 frames into the feature sequence.
std::size_t label_center_offset(std::size_t window_len, std::size_t conv_margin = 0);

/// Band-pass -> CWT filter -> analytic signal -> phase -> label matrix over
/// indices center_offset .. center_offset + n_out - 1. BVP and ECG share the
/// chain; `kind` is carried for callers that report it.
SimMatrix make_label(const Wave& raw, LabelKind kind, std::size_t n_out, std::size_t center_offset);

/// Both ends of the raw wave are extended by linear prediction before the
/// filter chain so that label rows near the wave edges keep their phase.
inline constexpr double kLabelPadSeconds = 3.0;
inline constexpr std::size_t kLabelPredictionOrder = 16;

/// The filtered phase of a raw label wave (the chain above without the matrix step).
PhaseSeries label_phase(const Wave& raw);

}  // namespace byhe
