#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "byhe/types.hpp"

namespace byhe {

enum class Activation { identity, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Single linear layer in_dim -> out_dim followed by an activation.
/// weights is in_dim x out_dim, so v = act(W^T s + b).
struct Projection {
    Matrix weights;
    std::vector<double> bias;  // empty when the layer has no bias
    Activation activation = Activation::tanh;

    std::size_t in_dim() const { return weights.rows; }
    std::size_t out_dim() const { return weights.cols; }
    bool has_bias() const { return !bias.empty(); }
};

inline constexpr std::size_t kDefaultProjectionDim = 88;

/// Uniform(-1/sqrt(in), 1/sqrt(in)) initialization of weights and bias.
Projection make_projection(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed,
                           Activation act = Activation::tanh, bool with_bias = true);

/// in_dim x in_dim identity weights, zero bias, identity activation.
Projection identity_projection(std::size_t dim);

struct HeadConfig {
    std::size_t window_len = 11;  // L, frames
    std::size_t stride = 1;       // fixed
    std::size_t conv_margin = 0;  // frames consumed by a convolutional backbone, if any

    void validate() const;
};

/// N = T - L + 1 rows; row i is feature rows i..i+L-1 flattened row-major.
Matrix slice_windows(const FeatureSequence& f, const HeadConfig& cfg);

/// Rows v_i = act(W^T s_i + b).
Matrix project(const Matrix& slices, const Projection& p);

inline constexpr double kCosineEps = 1e-8;

/// Rows whose norm fell below kCosineEps (their self-similarity is not 1).
struct CosineDiagnostics {
    std::vector<std::size_t> degenerate_rows;
};

/// values[i][j] = <v_i, v_j> / (max(|v_i|, eps) max(|v_j|, eps)).
SimMatrix cosine_matrix(const Matrix& vectors, CosineDiagnostics* diag = nullptr);

SimMatrix head_forward(const FeatureSequence& f, const Projection& p, const HeadConfig& cfg,
                       CosineDiagnostics* diag = nullptr);

struct ProjectionGradients {
    Matrix d_weights;
    std::vector<double> d_bias;
    std::optional<Matrix> d_slices;
};

/// Back-propagates dLoss/dv through the activation and the linear map.
/// `vectors` are the forward outputs project(slices, p).
ProjectionGradients project_backward(const Matrix& slices, const Projection& p, const Matrix& vectors,
                                     const Matrix& d_vectors, bool want_slice_grad = false);

struct HeadGradients {
    Matrix d_weights;
    std::vector<double> d_bias;
    std::optional<Matrix> d_features;  // T x D, only when requested
};

/// Exact gradients of a scalar loss given dLoss/dR-hat (any n x n matrix;
/// each R-hat entry is treated as its own output).
HeadGradients head_backward(const FeatureSequence& f, const Projection& p, const HeadConfig& cfg,
                            const Matrix& d_rhat, bool want_feature_grad = false);

/// Text form: `# projection in_dim=<n> out_dim=<k> activation=<name> bias=<0|1>`,
/// then in_dim comma-separated weight rows, then the bias row when present.
void write_projection(const Projection& p, std::ostream& out);
Projection read_projection(std::istream& in);

}  // namespace byhe
