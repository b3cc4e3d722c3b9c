#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "byhe/types.hpp"

namespace byhe {

struct BandpassSpec {
    double low_hz = 0.7;
    double high_hz = 4.0;
    int order = 4;  // prototype order; the band-pass has 2 * order poles
    bool zero_phase = true;
};

/// One second-order section, a0 normalized to 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// Digital Butterworth band-pass (bilinear transform with pre-warped edges).
/// Throws InputError unless 0 < low < high < fs / 2 and order >= 1.
std::vector<Biquad> design_butter_bandpass(const BandpassSpec& spec, double fs);

/// Complex response of a section cascade at `freq_hz`.
std::complex<double> sos_response(std::span<const Biquad> sos, double freq_hz, double fs);

/// Causal cascade filtering (transposed direct form II) from state `zi`
/// (two entries per section).
std::vector<double> sos_filter(std::span<const Biquad> sos, std::span<const double> x,
                               std::vector<double> zi);

/// Steady-state section states for a unit step input.
std::vector<double> sos_steady_state(std::span<const Biquad> sos);

/// Butterworth band-pass. Zero-phase mode runs the cascade forward and
/// backward over an odd extension of 3 * (2 * sections + 1) samples.
Wave butter_bandpass(const Wave& w, const BandpassSpec& spec = {});

/// Burg estimate of AR coefficients a with x[n] ~ sum_i a[i] x[n - 1 - i].
std::vector<double> burg_coefficients(std::span<const double> x, std::size_t order);

/// Extends both ends by `pad` samples of AR(order) prediction fitted to the
/// mean-removed wave. Filters started on the extension settle before the
/// original first sample, so edge phase stays close to the interior.
Wave extend_by_prediction(const Wave& w, std::size_t pad, std::size_t order);

/// Analytic signal F = f + i * H[f]; re carries the input unchanged.
struct AnalyticWave {
    std::vector<double> re;
    std::vector<double> im;
    double fs = 0.0;

    std::size_t size() const { return re.size(); }
    std::vector<double> envelope() const;
};

/// FFT construction: negative frequencies zeroed, positive doubled, DC and
/// Nyquist kept. Requires at least 8 samples.
AnalyticWave analytic_signal(const Wave& w);

inline constexpr double kMorletOmega0 = 6.0;
inline constexpr double kDefaultEmphasisSigmaHz = 0.3;

/// Morlet wavelet spectrum. coeffs is row-major, one row per frequency.
struct WaveletSpectrum {
    std::vector<double> freqs_hz;
    std::vector<std::complex<double>> coeffs;
    std::size_t samples = 0;
    double fs = 0.0;

    std::size_t bins() const { return freqs_hz.size(); }
    std::complex<double>& at(std::size_t k, std::size_t t) { return coeffs[k * samples + t]; }
    const std::complex<double>& at(std::size_t k, std::size_t t) const { return coeffs[k * samples + t]; }

    /// Scale in samples for bin k: omega0 * fs / (2 pi f_k).
    double scale(std::size_t k) const;
};

/// 64 log-spaced bins over [0.3, 3.75] Hz.
std::vector<double> default_cwt_grid();
inline constexpr double kCwtGridLowHz = 0.3;
inline constexpr double kCwtGridHighHz = 3.75;
inline constexpr std::size_t kCwtGridBins = 64;

/// Convolution with the analytic Morlet wavelet (omega0 = 6) at each scale,
/// computed in the frequency domain over a zero-padded power-of-two length.
/// Coefficients are L1-normalized: a unit tone at the bin frequency has |coeff| = 1.
WaveletSpectrum cwt_forward(const Wave& w, const std::vector<double>& freqs_hz);
WaveletSpectrum cwt_forward(const Wave& w);

/// Bin with the largest time-averaged magnitude (first bin on ties).
double dominant_frequency(const WaveletSpectrum& spec);

/// Gaussian reweighting exp(-(f - f_dom)^2 / (2 sigma^2)) of each bin.
WaveletSpectrum emphasize(const WaveletSpectrum& spec, double f_dom,
                          double sigma_hz = kDefaultEmphasisSigmaHz);

/// Delta-function reconstruction: sum over bins of Re(coeff) weighted by the
/// local log-frequency spacing times omega0 / sqrt(2 pi). With L1-normalized
/// coefficients this is the usual 1/sqrt(scale) weighting of L2-normalized
/// ones. Needs at least 8 bins.
Wave cwt_inverse(const WaveletSpectrum& spec);

/// Narrow-bands a (band-passed) wave around its dominant cardiac frequency.
Wave cwt_filter(const Wave& w);

}  // namespace byhe
