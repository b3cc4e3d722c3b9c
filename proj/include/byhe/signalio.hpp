#pragma once

#include <iosfwd>
#include <optional>

#include "byhe/types.hpp"

namespace byhe {

/// Reads a wave from text.
///
/// Accepted layouts, after an optional `# fs=<Hz>` header:
///   - one value per line (fs from the header or `fs_override`);
///   - `time_seconds,value` rows on a uniform grid (fs = 1 / median step).
/// `fs_override` takes precedence over both. Blank lines and other `#`
/// comments are ignored. Parsing is locale independent.
Wave read_wave(std::istream& in, std::optional<double> fs_override = std::nullopt);

/// Writes `# fs=<Hz>` followed by one sample per line, shortest round-trip form.
void write_wave(const Wave& w, std::ostream& out);

/// Comma separated rows. Throws InputError on ragged or non-numeric input.
MatrixFile read_matrix(std::istream& in);
void write_matrix(const Matrix& m, std::ostream& out);
void write_matrix(const SimMatrix& m, std::ostream& out);

/// Reads a matrix and requires it to be square.
SimMatrix read_sim_matrix(std::istream& in);

/// Linear-interpolation resampling. Output fs = factor * w.fs and the output
/// grid k / (factor * fs) covers the original time span. factor in [0.25, 4].
Wave resample(const Wave& w, double factor);

/// Plain (P2) 8-bit PGM; [-1, 1] maps linearly onto [0, 255], values clamped.
void write_pgm(const SimMatrix& m, std::ostream& out);

// File helpers; throw InputError when the file cannot be opened.
Wave load_wave(const std::string& path, std::optional<double> fs_override = std::nullopt);
void save_wave(const Wave& w, const std::string& path);
MatrixFile load_matrix(const std::string& path);
void save_matrix(const SimMatrix& m, const std::string& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace byhe
