#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace byhe {

/// Bad input or violated precondition. Maps to CLI exit code 1.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The input was well formed but no estimate could be produced from it
/// (too few peaks, degenerate envelope). Maps to CLI exit code 2.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniformly sampled real signal.
struct Wave {
    std::vector<double> samples;
    double fs = 0.0;  // Hz

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double duration() const { return fs > 0.0 ? static_cast<double>(samples.size()) / fs : 0.0; }
};

/// Dense row-major real matrix. Also the in-memory form of a matrix file.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    bool square() const { return rows == cols; }
};

using MatrixFile = Matrix;

/// T x D feature rows over time (stand-in for backbone feature-map slices).
using FeatureSequence = Matrix;

/// Square similarity matrix (label R or prediction R-hat). Entries are cosines.
struct SimMatrix {
    std::size_t n = 0;
    std::vector<double> values;

    SimMatrix() = default;
    explicit SimMatrix(std::size_t size, double fill = 0.0) : n(size), values(size * size, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }

    /// Throws InputError unless m is square.
    static SimMatrix from_matrix(const Matrix& m);
    Matrix to_matrix() const;
};

/// Result of checking the SimMatrix invariants (range, symmetry, unit diagonal).
struct SimMatrixCheck {
    bool in_range = true;
    bool symmetric = true;
    bool unit_diagonal = true;
    bool ok() const { return in_range && symmetric && unit_diagonal; }
};

SimMatrixCheck check_sim_matrix(const SimMatrix& m, double tol = 1e-9);

}  // namespace byhe
