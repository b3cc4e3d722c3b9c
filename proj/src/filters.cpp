#include "byhe/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "byhe/fft.hpp"

namespace byhe {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

void require_finite(const Wave& w) {
    for (const double v : w.samples) {
        if (!std::isfinite(v)) throw InputError("wave contains non-finite samples");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Butterworth

std::vector<Biquad> design_butter_bandpass(const BandpassSpec& spec, double fs) {
    if (!(fs > 0.0)) throw InputError("sampling rate must be positive");
    if (spec.order < 1) throw InputError("filter order must be >= 1");
    if (!(spec.low_hz > 0.0 && spec.low_hz < spec.high_hz && spec.high_hz < fs / 2.0)) {
        throw InputError("band [" + std::to_string(spec.low_hz) + ", " + std::to_string(spec.high_hz) +
                         "] Hz infeasible at fs=" + std::to_string(fs));
    }
    const int order = spec.order;
    const double fs2 = 2.0 * fs;
    const double wl = fs2 * std::tan(kPi * spec.low_hz / fs);
    const double wh = fs2 * std::tan(kPi * spec.high_hz / fs);
    const double bw = wh - wl;
    const double w0sq = wl * wh;

    // Analog low-pass prototype -> band-pass -> bilinear.
    std::vector<cplx> poles;
    cplx denom_prod{1.0, 0.0};
    for (int k = 0; k < order; ++k) {
        const double theta = kPi * (2.0 * k + order + 1) / (2.0 * order);
        const cplx p = std::polar(1.0, theta);
        const cplx half = p * bw / 2.0;
        const cplx root = std::sqrt(half * half - w0sq);
        for (const cplx pa : {half + root, half - root}) {
            denom_prod *= (fs2 - pa);
            poles.push_back((fs2 + pa) / (fs2 - pa));
        }
    }
    const double gain = std::pow(bw, order) * std::pow(fs2, order) / denom_prod.real();

    std::vector<cplx> upper;
    std::vector<double> real_poles;
    for (const cplx p : poles) {
        if (std::abs(p.imag()) <= 1e-12 * std::max(1.0, std::abs(p))) {
            real_poles.push_back(p.real());
        } else if (p.imag() > 0.0) {
            upper.push_back(p);
        }
    }
    std::sort(upper.begin(), upper.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    std::sort(real_poles.begin(), real_poles.end());

    // Every section gets one zero at z = 1 and one at z = -1.
    std::vector<Biquad> sos;
    for (const cplx p : upper) {
        sos.push_back({1.0, 0.0, -1.0, -2.0 * p.real(), std::norm(p)});
    }
    for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
        const double p = real_poles[i];
        const double q = real_poles[i + 1];
        sos.push_back({1.0, 0.0, -1.0, -(p + q), p * q});
    }
    sos.front().b0 *= gain;
    sos.front().b1 *= gain;
    sos.front().b2 *= gain;
    return sos;
}

cplx sos_response(std::span<const Biquad> sos, double freq_hz, double fs) {
    const cplx z1 = std::polar(1.0, -2.0 * kPi * freq_hz / fs);
    const cplx z2 = z1 * z1;
    cplx h{1.0, 0.0};
    for (const auto& s : sos) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
}

std::vector<double> sos_filter(std::span<const Biquad> sos, std::span<const double> x, std::vector<double> zi) {
    if (zi.size() != 2 * sos.size()) zi.assign(2 * sos.size(), 0.0);
    std::vector<double> y(x.begin(), x.end());
    for (std::size_t s = 0; s < sos.size(); ++s) {
        const auto& c = sos[s];
        double z0 = zi[2 * s];
        double z1 = zi[2 * s + 1];
        for (double& v : y) {
            const double in = v;
            const double out = c.b0 * in + z0;
            z0 = c.b1 * in - c.a1 * out + z1;
            z1 = c.b2 * in - c.a2 * out;
            v = out;
        }
    }
    return y;
}

std::vector<double> sos_steady_state(std::span<const Biquad> sos) {
    std::vector<double> zi(2 * sos.size());
    double scale = 1.0;
    for (std::size_t s = 0; s < sos.size(); ++s) {
        const auto& c = sos[s];
        // Solve (I - A^T) z = B for the transposed direct form II companion.
        const double m00 = 1.0 + c.a1, m01 = -1.0;
        const double m10 = c.a2, m11 = 1.0;
        const double r0 = c.b1 - c.a1 * c.b0;
        const double r1 = c.b2 - c.a2 * c.b0;
        const double det = m00 * m11 - m01 * m10;
        zi[2 * s] = scale * (r0 * m11 - m01 * r1) / det;
        zi[2 * s + 1] = scale * (m00 * r1 - m10 * r0) / det;
        scale *= (c.b0 + c.b1 + c.b2) / (1.0 + c.a1 + c.a2);
    }
    return zi;
}

Wave butter_bandpass(const Wave& w, const BandpassSpec& spec) {
    if (w.size() <= static_cast<std::size_t>(3 * std::max(spec.order, 1))) {
        throw InputError("wave too short for band-pass filtering (" + std::to_string(w.size()) + " samples)");
    }
    require_finite(w);
    const auto sos = design_butter_bandpass(spec, w.fs);
    const auto zi_unit = sos_steady_state(sos);
    auto scaled = [&](double x0) {
        auto zi = zi_unit;
        for (double& z : zi) z *= x0;
        return zi;
    };

    Wave out;
    out.fs = w.fs;
    const auto& x = w.samples;
    const std::size_t n = x.size();
    if (!spec.zero_phase) {
        out.samples = sos_filter(sos, x, scaled(x.front()));
        return out;
    }

    const std::size_t padlen = std::min<std::size_t>(3 * (2 * sos.size() + 1), n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

    auto y = sos_filter(sos, ext, scaled(ext.front()));
    std::reverse(y.begin(), y.end());
    y = sos_filter(sos, y, scaled(y.front()));
    std::reverse(y.begin(), y.end());
    out.samples.assign(y.begin() + static_cast<std::ptrdiff_t>(padlen),
                       y.begin() + static_cast<std::ptrdiff_t>(padlen + n));
    return out;
}

// ---------------------------------------------------------------------------
// Analytic signal

std::vector<double> AnalyticWave::envelope() const {
    std::vector<double> env(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) env[i] = std::hypot(re[i], im[i]);
    return env;
}

std::vector<double> burg_coefficients(std::span<const double> x, std::size_t order) {
    const std::size_t n = x.size();
    if (order == 0 || n <= 2 * order) throw InputError("prediction order too high for " + std::to_string(n) + " samples");
    std::vector<double> f(x.begin(), x.end()), b(x.begin(), x.end());
    std::vector<double> a, prev;
    a.reserve(order);
    for (std::size_t m = 0; m < order; ++m) {
        double num = 0.0, den = 0.0;
        for (std::size_t t = m + 1; t < n; ++t) {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        if (den <= 0.0) break;  // perfectly predicted already
        const double k = 2.0 * num / den;
        prev = a;
        for (std::size_t i = 0; i < m; ++i) a[i] = prev[i] - k * prev[m - 1 - i];
        a.push_back(k);
        // Descending so b[t - 1] still holds the previous stage.
        for (std::size_t t = n - 1; t > m; --t) {
            const double ft = f[t];
            f[t] = ft - k * b[t - 1];
            b[t] = b[t - 1] - k * ft;
        }
    }
    return a;
}

Wave extend_by_prediction(const Wave& w, std::size_t pad, std::size_t order) {
    const std::size_t n = w.size();
    double mean = 0.0;
    for (double v : w.samples) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = w.samples[i] - mean;
    const auto a = burg_coefficients(centered, order);

    auto predict = [&a, pad](std::vector<double> y) {
        y.reserve(y.size() + pad);
        for (std::size_t step = 0; step < pad; ++step) {
            double v = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * y[y.size() - 1 - i];
            y.push_back(v);
        }
        return std::vector<double>(y.end() - static_cast<std::ptrdiff_t>(pad), y.end());
    };
    // The Burg fit treats both directions alike, so the reversed wave shares the model.
    const auto tail = predict(centered);
    const auto head = predict(std::vector<double>(centered.rbegin(), centered.rend()));

    Wave out{{}, w.fs};
    out.samples.reserve(n + 2 * pad);
    for (auto it = head.rbegin(); it != head.rend(); ++it) out.samples.push_back(*it + mean);
    out.samples.insert(out.samples.end(), w.samples.begin(), w.samples.end());
    for (double v : tail) out.samples.push_back(v + mean);
    return out;
}

AnalyticWave analytic_signal(const Wave& w) {
    if (w.size() < 8) throw InputError("analytic signal needs at least 8 samples");
    require_finite(w);
    const std::size_t n = w.size();
    auto spectrum = fft::forward_real(w.samples, n);
    const std::size_t half = n / 2;
    for (std::size_t k = 1; k < n; ++k) {
        if (n % 2 == 0 && k == half) continue;  // Nyquist kept as is
        spectrum[k] *= (k <= (n - 1) / 2) ? 2.0 : 0.0;
    }
    const auto analytic = fft::inverse(spectrum);

    AnalyticWave a;
    a.fs = w.fs;
    a.re = w.samples;
    a.im.resize(n);
    for (std::size_t i = 0; i < n; ++i) a.im[i] = analytic[i].imag();
    return a;
}

// ---------------------------------------------------------------------------
// Morlet CWT

double WaveletSpectrum::scale(std::size_t k) const { return kMorletOmega0 * fs / (2.0 * kPi * freqs_hz[k]); }

std::vector<double> default_cwt_grid() {
    std::vector<double> grid(kCwtGridBins);
    const double log_lo = std::log(kCwtGridLowHz);
    const double step = (std::log(kCwtGridHighHz) - log_lo) / static_cast<double>(kCwtGridBins - 1);
    for (std::size_t k = 0; k < kCwtGridBins; ++k) grid[k] = std::exp(log_lo + step * static_cast<double>(k));
    grid.back() = kCwtGridHighHz;
    return grid;
}

WaveletSpectrum cwt_forward(const Wave& w, const std::vector<double>& freqs_hz) {
    if (w.empty()) throw InputError("cwt of an empty wave");
    if (freqs_hz.empty()) throw InputError("cwt needs at least one frequency");
    require_finite(w);
    for (std::size_t k = 0; k < freqs_hz.size(); ++k) {
        const double f = freqs_hz[k];
        if (!(f > 0.0 && f < w.fs / 2.0)) {
            throw InputError("cwt frequency " + std::to_string(f) + " Hz outside (0, fs/2)");
        }
        if (k > 0 && !(f > freqs_hz[k - 1])) throw InputError("cwt frequencies must be strictly increasing");
    }

    WaveletSpectrum spec;
    spec.freqs_hz = freqs_hz;
    spec.samples = w.size();
    spec.fs = w.fs;
    spec.coeffs.resize(freqs_hz.size() * w.size());

    const double max_scale = spec.scale(0);
    const std::size_t support = static_cast<std::size_t>(std::ceil(4.0 * max_scale));
    const std::size_t m = fft::next_pow2(w.size() + 2 * support);
    const auto xhat = fft::forward_real(w.samples, m);

    std::vector<cplx> prod(m);
    for (std::size_t k = 0; k < freqs_hz.size(); ++k) {
        const double s = spec.scale(k);
        std::fill(prod.begin(), prod.end(), cplx{});
        for (std::size_t j = 1; j < (m + 1) / 2; ++j) {
            const double omega = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(m);
            const double d = s * omega - kMorletOmega0;
            prod[j] = xhat[j] * (2.0 * std::exp(-0.5 * d * d));
        }
        const auto row = fft::inverse(prod);
        std::copy(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(w.size()),
                  spec.coeffs.begin() + static_cast<std::ptrdiff_t>(k * w.size()));
    }
    return spec;
}

WaveletSpectrum cwt_forward(const Wave& w) { return cwt_forward(w, default_cwt_grid()); }

double dominant_frequency(const WaveletSpectrum& spec) {
    if (spec.bins() == 0 || spec.samples == 0) throw InputError("empty wavelet spectrum");
    std::size_t best = 0;
    double best_mean = -1.0;
    for (std::size_t k = 0; k < spec.bins(); ++k) {
        double sum = 0.0;
        for (std::size_t t = 0; t < spec.samples; ++t) sum += std::abs(spec.at(k, t));
        const double mean = sum / static_cast<double>(spec.samples);
        if (mean > best_mean) {
            best_mean = mean;
            best = k;
        }
    }
    return spec.freqs_hz[best];
}

WaveletSpectrum emphasize(const WaveletSpectrum& spec, double f_dom, double sigma_hz) {
    if (!(sigma_hz > 0.0)) throw InputError("emphasis sigma must be positive");
    WaveletSpectrum out = spec;
    for (std::size_t k = 0; k < out.bins(); ++k) {
        const double d = out.freqs_hz[k] - f_dom;
        const double weight = std::exp(-d * d / (2.0 * sigma_hz * sigma_hz));
        for (std::size_t t = 0; t < out.samples; ++t) out.at(k, t) *= weight;
    }
    return out;
}

Wave cwt_inverse(const WaveletSpectrum& spec) {
    if (spec.bins() < 8) throw InputError("inverse cwt needs at least 8 frequency bins");
    const std::size_t bins = spec.bins();
    std::vector<double> log_f(bins);
    for (std::size_t k = 0; k < bins; ++k) log_f[k] = std::log(spec.freqs_hz[k]);

    const double norm = kMorletOmega0 / std::sqrt(2.0 * kPi);
    Wave out;
    out.fs = spec.fs;
    out.samples.assign(spec.samples, 0.0);
    for (std::size_t k = 0; k < bins; ++k) {
        double spacing;
        if (k == 0) {
            spacing = log_f[1] - log_f[0];
        } else if (k + 1 == bins) {
            spacing = log_f[k] - log_f[k - 1];
        } else {
            spacing = 0.5 * (log_f[k + 1] - log_f[k - 1]);
        }
        const double weight = spacing * norm;
        for (std::size_t t = 0; t < spec.samples; ++t) out.samples[t] += weight * spec.at(k, t).real();
    }
    return out;
}

Wave cwt_filter(const Wave& w) {
    const auto spec = cwt_forward(w);
    return cwt_inverse(emphasize(spec, dominant_frequency(spec)));
}

}  // namespace byhe
