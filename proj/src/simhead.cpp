#include "byhe/simhead.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "byhe/log.hpp"
#include "byhe/signalio.hpp"

namespace byhe {
namespace {

double activate(Activation a, double z) { return a == Activation::tanh ? std::tanh(z) : z; }

// Derivative expressed through the activation output.
double activate_grad(Activation a, double v) { return a == Activation::tanh ? 1.0 - v * v : 1.0; }

struct ForwardCache {
    Matrix slices;
    Matrix vectors;
    std::vector<double> norms;  // max(|v_i|, eps)
    std::vector<bool> active;   // |v_i| >= eps
    SimMatrix rhat;
};

ForwardCache run_forward(const FeatureSequence& f, const Projection& p, const HeadConfig& cfg) {
    ForwardCache c;
    c.slices = slice_windows(f, cfg);
    c.vectors = project(c.slices, p);
    c.rhat = cosine_matrix(c.vectors);
    const std::size_t n = c.vectors.rows;
    c.norms.resize(n);
    c.active.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < c.vectors.cols; ++k) sq += c.vectors(i, k) * c.vectors(i, k);
        const double norm = std::sqrt(sq);
        c.active[i] = norm >= kCosineEps;
        c.norms[i] = std::max(norm, kCosineEps);
    }
    return c;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "identity"; }

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "identity") return Activation::identity;
    throw InputError("unknown activation '" + s + "'");
}

Projection make_projection(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed, Activation act,
                           bool with_bias) {
    if (in_dim == 0 || out_dim == 0) throw InputError("projection dimensions must be positive");
    Projection p;
    p.activation = act;
    p.weights = Matrix(in_dim, out_dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : p.weights.values) w = u(rng);
    if (with_bias) {
        p.bias.resize(out_dim);
        for (double& b : p.bias) b = u(rng);
    }
    return p;
}

Projection identity_projection(std::size_t dim) {
    Projection p;
    p.activation = Activation::identity;
    p.weights = Matrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) p.weights(i, i) = 1.0;
    p.bias.assign(dim, 0.0);
    return p;
}

void HeadConfig::validate() const {
    if (window_len < 1) throw InputError("window length must be >= 1");
    if (stride != 1) throw InputError("only stride 1 is supported");
}

Matrix slice_windows(const FeatureSequence& f, const HeadConfig& cfg) {
    cfg.validate();
    if (f.rows < cfg.window_len) {
        throw InputError("feature sequence of " + std::to_string(f.rows) + " frames is shorter than the window (" +
                         std::to_string(cfg.window_len) + ")");
    }
    const std::size_t n = f.rows - cfg.window_len + 1;
    const std::size_t width = cfg.window_len * f.cols;
    Matrix slices(n, width);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(f.values.begin() + static_cast<std::ptrdiff_t>(i * f.cols),
                  f.values.begin() + static_cast<std::ptrdiff_t>(i * f.cols + width),
                  slices.values.begin() + static_cast<std::ptrdiff_t>(i * width));
    }
    return slices;
}

Matrix project(const Matrix& slices, const Projection& p) {
    if (slices.cols != p.in_dim()) {
        throw InputError("slice width " + std::to_string(slices.cols) + " does not match projection input " +
                         std::to_string(p.in_dim()));
    }
    if (p.has_bias() && p.bias.size() != p.out_dim()) throw InputError("projection bias has the wrong size");
    const std::size_t k_dim = p.out_dim();
    Matrix out(slices.rows, k_dim);
    for (std::size_t i = 0; i < slices.rows; ++i) {
        double* row = &out.values[i * k_dim];
        if (p.has_bias()) std::copy(p.bias.begin(), p.bias.end(), row);
        for (std::size_t d = 0; d < slices.cols; ++d) {
            const double s = slices(i, d);
            if (s == 0.0) continue;
            const double* w = &p.weights.values[d * k_dim];
            for (std::size_t k = 0; k < k_dim; ++k) row[k] += s * w[k];
        }
        for (std::size_t k = 0; k < k_dim; ++k) row[k] = activate(p.activation, row[k]);
    }
    return out;
}

SimMatrix cosine_matrix(const Matrix& vectors, CosineDiagnostics* diag) {
    const std::size_t n = vectors.rows;
    const std::size_t dim = vectors.cols;
    std::vector<double> norms(n);
    std::vector<std::size_t> degenerate;
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < dim; ++k) sq += vectors(i, k) * vectors(i, k);
        const double norm = std::sqrt(sq);
        if (norm < kCosineEps) degenerate.push_back(i);
        norms[i] = std::max(norm, kCosineEps);
    }
    if (!degenerate.empty()) {
        log::info("cosine_matrix: " + std::to_string(degenerate.size()) + " near-zero vector(s); their similarities fall to 0");
    }

    SimMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* vi = &vectors.values[i * dim];
        for (std::size_t j = i; j < n; ++j) {
            const double* vj = &vectors.values[j * dim];
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += vi[k] * vj[k];
            const double c = dot / (norms[i] * norms[j]);
            m(i, j) = c;
            m(j, i) = c;
        }
    }
    if (diag != nullptr) diag->degenerate_rows = std::move(degenerate);
    return m;
}

SimMatrix head_forward(const FeatureSequence& f, const Projection& p, const HeadConfig& cfg,
                       CosineDiagnostics* diag) {
    return cosine_matrix(project(slice_windows(f, cfg), p), diag);
}

HeadGradients head_backward(const FeatureSequence& f, const Projection& p, const HeadConfig& cfg,
                            const Matrix& d_rhat, bool want_feature_grad) {
    const auto c = run_forward(f, p, cfg);
    const std::size_t n = c.vectors.rows;
    const std::size_t k_dim = c.vectors.cols;
    if (d_rhat.rows != n || d_rhat.cols != n) {
        throw InputError("upstream gradient must be " + std::to_string(n) + "x" + std::to_string(n));
    }

    // Each cosine c_ij feeds both R[i][j] and R[j][i].
    Matrix h(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) h(i, j) = d_rhat(i, j) + d_rhat(j, i);
    }

    // dc(a, b)/da = b / (n_a n_b) - c_ab * a / n_a^2 (second term only while |a| >= eps).
    Matrix d_vec(n, k_dim);
    for (std::size_t i = 0; i < n; ++i) {
        double* dv = &d_vec.values[i * k_dim];
        double radial = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double hij = h(i, j);
            if (hij == 0.0) continue;
            radial += hij * c.rhat(i, j);
            const double scale = hij / (c.norms[i] * c.norms[j]);
            const double* vj = &c.vectors.values[j * k_dim];
            for (std::size_t k = 0; k < k_dim; ++k) dv[k] += scale * vj[k];
        }
        if (c.active[i]) {
            const double scale = radial / (c.norms[i] * c.norms[i]);
            const double* vi = &c.vectors.values[i * k_dim];
            for (std::size_t k = 0; k < k_dim; ++k) dv[k] -= scale * vi[k];
        }
    }

    auto pg = project_backward(c.slices, p, c.vectors, d_vec, want_feature_grad);
    HeadGradients g;
    g.d_weights = std::move(pg.d_weights);
    g.d_bias = std::move(pg.d_bias);
    if (want_feature_grad) {
        // Slice row i, column d is feature frame i + d / D, channel d % D.
        Matrix df(f.rows, f.cols);
        const Matrix& ds = *pg.d_slices;
        for (std::size_t i = 0; i < ds.rows; ++i) {
            for (std::size_t d = 0; d < ds.cols; ++d) df.values[i * f.cols + d] += ds(i, d);
        }
        g.d_features = std::move(df);
    }
    return g;
}

ProjectionGradients project_backward(const Matrix& slices, const Projection& p, const Matrix& vectors,
                                     const Matrix& d_vectors, bool want_slice_grad) {
    const std::size_t n = slices.rows;
    const std::size_t k_dim = p.out_dim();
    if (slices.cols != p.in_dim() || vectors.rows != n || vectors.cols != k_dim || d_vectors.rows != n ||
        d_vectors.cols != k_dim) {
        throw InputError("projection backward: dimension mismatch");
    }

    // dz = dv * act'(z)
    Matrix d_pre = d_vectors;
    for (std::size_t idx = 0; idx < d_pre.values.size(); ++idx) {
        d_pre.values[idx] *= activate_grad(p.activation, vectors.values[idx]);
    }

    ProjectionGradients g;
    g.d_weights = Matrix(p.in_dim(), k_dim);
    if (p.has_bias()) g.d_bias.assign(k_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* dz = &d_pre.values[i * k_dim];
        for (std::size_t d = 0; d < p.in_dim(); ++d) {
            const double s = slices(i, d);
            if (s == 0.0) continue;
            double* dw = &g.d_weights.values[d * k_dim];
            for (std::size_t k = 0; k < k_dim; ++k) dw[k] += s * dz[k];
        }
        if (p.has_bias()) {
            for (std::size_t k = 0; k < k_dim; ++k) g.d_bias[k] += dz[k];
        }
    }

    if (want_slice_grad) {
        Matrix ds(n, p.in_dim());
        for (std::size_t i = 0; i < n; ++i) {
            const double* dz = &d_pre.values[i * k_dim];
            for (std::size_t d = 0; d < p.in_dim(); ++d) {
                const double* w = &p.weights.values[d * k_dim];
                double acc = 0.0;
                for (std::size_t k = 0; k < k_dim; ++k) acc += w[k] * dz[k];
                ds(i, d) = acc;
            }
        }
        g.d_slices = std::move(ds);
    }
    return g;
}

void write_projection(const Projection& p, std::ostream& out) {
    out << "# projection in_dim=" << p.in_dim() << " out_dim=" << p.out_dim()
        << " activation=" << to_string(p.activation) << " bias=" << (p.has_bias() ? 1 : 0) << '\n';
    write_matrix(p.weights, out);
    if (p.has_bias()) {
        for (std::size_t k = 0; k < p.bias.size(); ++k) {
            if (k > 0) out << ',';
            out << format_double(p.bias[k]);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed");
}

Projection read_projection(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("# projection", 0) != 0) {
        throw InputError("missing projection header");
    }
    std::istringstream hs(header.substr(12));
    std::size_t in_dim = 0, out_dim = 0;
    bool bias = false;
    Activation act = Activation::tanh;
    std::string field;
    while (hs >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string val = field.substr(eq + 1);
        try {
            if (key == "in_dim") in_dim = std::stoul(val);
            if (key == "out_dim") out_dim = std::stoul(val);
            if (key == "bias") bias = val == "1";
        } catch (const std::exception&) {
            throw InputError("bad projection header field '" + field + "'");
        }
        if (key == "activation") act = activation_from_string(val);
    }
    const Matrix all = read_matrix(in);
    if (all.cols != out_dim || all.rows != in_dim + (bias ? 1 : 0)) {
        throw InputError("projection body does not match its header dimensions");
    }
    Projection p;
    p.activation = act;
    p.weights = Matrix(in_dim, out_dim);
    std::copy(all.values.begin(), all.values.begin() + static_cast<std::ptrdiff_t>(in_dim * out_dim),
              p.weights.values.begin());
    if (bias) p.bias.assign(all.values.begin() + static_cast<std::ptrdiff_t>(in_dim * out_dim), all.values.end());
    return p;
}

}  // namespace byhe
