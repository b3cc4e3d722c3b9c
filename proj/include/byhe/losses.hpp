#pragma once

#include "byhe/types.hpp"

namespace byhe {

struct LossWeights {
    double alpha = 1.0;  // MSE
    double beta = 0.8;   // Pearson
    double gamma = 0.1;  // diagonal-uniformity regularizer

    void validate() const;
};

/// A loss value and its gradient with respect to R-hat (n x n).
struct LossTerm {
    double value = 0.0;
    Matrix grad;
};

struct LossBreakdown {
    double mse = 0.0;
    double pearson = 0.0;
    double reg = 0.0;
    double total = 0.0;
    LossWeights weights;
    Matrix grad;  // d total / d R-hat
};

inline constexpr double kPearsonVarianceEps = 1e-8;
inline constexpr double kRegStdEps = 1e-12;

/// Mean over all n^2 entries of (R-hat - R)^2.
LossTerm mse_loss(const SimMatrix& rhat, const SimMatrix& r);

/// Mean over rows of 1 - rho(R-hat row, R row). A row whose variance (either
/// side) is below kPearsonVarianceEps has rho = 0 and no gradient. Needs n >= 3.
LossTerm pearson_loss(const SimMatrix& rhat, const SimMatrix& r);

/// (1/N) sum_a std(g_a) over diagonal groups g_a = {R-hat[i][j] : |i - j| = a}
/// pooling both triangles. std = sqrt(var + eps) - sqrt(eps) with population
/// variance, so constant groups contribute exactly 0.
LossTerm reg_loss(const SimMatrix& rhat);

/// Population std of each diagonal group (the per-group terms of reg_loss, before the eps shift).
std::vector<double> diagonal_group_std(const SimMatrix& m);

LossBreakdown total_loss(const SimMatrix& rhat, const SimMatrix& r, const LossWeights& w = {});

}  // namespace byhe
