#include "byhe/losses.hpp"

#include <cmath>
#include <string>

namespace byhe {
namespace {

void require_same_shape(const SimMatrix& a, const SimMatrix& b) {
    if (a.n != b.n || a.values.size() != a.n * a.n || b.values.size() != b.n * b.n) {
        throw InputError("loss inputs differ in shape (" + std::to_string(a.n) + " vs " + std::to_string(b.n) + ")");
    }
}

}  // namespace

void LossWeights::validate() const {
    if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0)) throw InputError("loss weights must be non-negative");
}

LossTerm mse_loss(const SimMatrix& rhat, const SimMatrix& r) {
    require_same_shape(rhat, r);
    const std::size_t n = rhat.n;
    const double count = static_cast<double>(n * n);
    LossTerm t{0.0, Matrix(n, n)};
    for (std::size_t idx = 0; idx < rhat.values.size(); ++idx) {
        const double d = rhat.values[idx] - r.values[idx];
        t.value += d * d;
        t.grad.values[idx] = 2.0 * d / count;
    }
    t.value /= count;
    return t;
}

LossTerm pearson_loss(const SimMatrix& rhat, const SimMatrix& r) {
    require_same_shape(rhat, r);
    const std::size_t n = rhat.n;
    if (n < 3) throw InputError("pearson loss needs n >= 3");
    const double len = static_cast<double>(n);
    LossTerm t{0.0, Matrix(n, n)};

    for (std::size_t i = 0; i < n; ++i) {
        const double* x = &rhat.values[i * n];
        const double* y = &r.values[i * n];
        double mx = 0.0, my = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            mx += x[j];
            my += y[j];
        }
        mx /= len;
        my /= len;
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sxx += (x[j] - mx) * (x[j] - mx);
            syy += (y[j] - my) * (y[j] - my);
            sxy += (x[j] - mx) * (y[j] - my);
        }
        if (sxx / len < kPearsonVarianceEps || syy / len < kPearsonVarianceEps) {
            t.value += 1.0;
            continue;
        }
        const double denom = std::sqrt(sxx * syy);
        const double rho = sxy / denom;
        t.value += 1.0 - rho;
        // d rho / d x_j = (y_j - my) / sqrt(sxx syy) - rho (x_j - mx) / sxx
        for (std::size_t j = 0; j < n; ++j) {
            const double drho = (y[j] - my) / denom - rho * (x[j] - mx) / sxx;
            t.grad(i, j) = -drho / len;
        }
    }
    t.value /= len;
    return t;
}

std::vector<double> diagonal_group_std(const SimMatrix& m) {
    const std::size_t n = m.n;
    std::vector<double> out(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t pairs = n - a;
        const double size = a == 0 ? static_cast<double>(n) : 2.0 * static_cast<double>(pairs);
        double sum = 0.0;
        for (std::size_t i = 0; i < pairs; ++i) sum += a == 0 ? m(i, i) : m(i, i + a) + m(i + a, i);
        const double mean = sum / size;
        double var = 0.0;
        for (std::size_t i = 0; i < pairs; ++i) {
            if (a == 0) {
                var += (m(i, i) - mean) * (m(i, i) - mean);
            } else {
                var += (m(i, i + a) - mean) * (m(i, i + a) - mean) + (m(i + a, i) - mean) * (m(i + a, i) - mean);
            }
        }
        out[a] = std::sqrt(var / size);
    }
    return out;
}

LossTerm reg_loss(const SimMatrix& rhat) {
    const std::size_t n = rhat.n;
    if (n < 2) throw InputError("regularizer needs n >= 2");
    const double groups = static_cast<double>(n);
    const double eps_root = std::sqrt(kRegStdEps);
    LossTerm t{0.0, Matrix(n, n)};

    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t pairs = n - a;
        const double size = a == 0 ? static_cast<double>(n) : 2.0 * static_cast<double>(pairs);
        auto for_each_entry = [&](auto&& fn) {
            for (std::size_t i = 0; i < pairs; ++i) {
                fn(i, i + a);
                if (a != 0) fn(i + a, i);
            }
        };
        double sum = 0.0;
        for_each_entry([&](std::size_t i, std::size_t j) { sum += rhat(i, j); });
        const double mean = sum / size;
        double var = 0.0;
        for_each_entry([&](std::size_t i, std::size_t j) { var += (rhat(i, j) - mean) * (rhat(i, j) - mean); });
        var /= size;
        const double root = std::sqrt(var + kRegStdEps);
        t.value += root - eps_root;
        // d std / d x = (x - mean) / (size * root); the mean term cancels.
        const double scale = 1.0 / (size * root * groups);
        for_each_entry([&](std::size_t i, std::size_t j) { t.grad(i, j) = (rhat(i, j) - mean) * scale; });
    }
    t.value /= groups;
    return t;
}

LossBreakdown total_loss(const SimMatrix& rhat, const SimMatrix& r, const LossWeights& w) {
    w.validate();
    require_same_shape(rhat, r);
    const auto mse = mse_loss(rhat, r);
    const auto pearson = pearson_loss(rhat, r);
    const auto reg = reg_loss(rhat);

    LossBreakdown out;
    out.weights = w;
    out.mse = mse.value;
    out.pearson = pearson.value;
    out.reg = reg.value;
    out.total = w.alpha * mse.value + w.beta * pearson.value + w.gamma * reg.value;
    out.grad = Matrix(rhat.n, rhat.n);
    for (std::size_t idx = 0; idx < out.grad.values.size(); ++idx) {
        out.grad.values[idx] =
            w.alpha * mse.grad.values[idx] + w.beta * pearson.grad.values[idx] + w.gamma * reg.grad.values[idx];
    }
    return out;
}

}  // namespace byhe
