#include "byhe/traintoy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "byhe/hrestimate.hpp"
#include "byhe/log.hpp"
#include "byhe/phasemap.hpp"
#include "byhe/signalio.hpp"
#include "byhe/synth.hpp"

namespace byhe {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SampleResult {
    EpochRecord loss;  // epoch/lr fields unused
    ProjectionGradients grad;
};

// One training arm: per-sample loss with gradients, and validation of a
// trained projection on one held-out sample.
struct Arm {
    std::string name;
    std::function<SampleResult(const FeatureSample&, const Projection&, bool)> loss;
    std::function<double(const FeatureSample&, const Projection&, double* offdiag)> estimate;
};

Arm byhe_arm(const TrainConfig& cfg) {
    Arm arm;
    arm.name = "byhe";
    arm.loss = [&cfg](const FeatureSample& s, const Projection& p, bool want_grad) {
        const Matrix slices = slice_windows(s.features, cfg.head);
        const Matrix vectors = project(slices, p);
        const SimMatrix rhat = cosine_matrix(vectors);
        const SimMatrix label = oracle_label_matrix(s.bpm, kFeatureFrameRate, rhat.n);
        const LossBreakdown lb = total_loss(rhat, label, cfg.weights);
        SampleResult r;
        r.loss.mse = lb.mse;
        r.loss.pearson = lb.pearson;
        r.loss.reg = lb.reg;
        r.loss.total = lb.total;
        if (want_grad) {
            auto hg = head_backward(s.features, p, cfg.head, lb.grad);
            r.grad.d_weights = std::move(hg.d_weights);
            r.grad.d_bias = std::move(hg.d_bias);
        }
        return r;
    };
    arm.estimate = [&cfg](const FeatureSample& s, const Projection& p, double* offdiag) {
        const SimMatrix rhat = head_forward(s.features, p, cfg.head);
        if (offdiag != nullptr) *offdiag = mean_off_diagonal(rhat);
        return estimate_hr(rhat, kFeatureFrameRate);
    };
    return arm;
}

// Undelayed label wave sampled at the window centers.
std::vector<double> label_wave(double bpm, std::size_t n, std::size_t center) {
    std::vector<double> y(n);
    const double f = bpm / 60.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::cos(2.0 * kPi * f * static_cast<double>(i + center) / kFeatureFrameRate);
    }
    return y;
}

std::vector<double> wave_readout(const Matrix& vectors) {
    std::vector<double> out(vectors.rows, 0.0);
    for (std::size_t i = 0; i < vectors.rows; ++i) {
        for (std::size_t k = 0; k < vectors.cols; ++k) out[i] += vectors(i, k);
        out[i] /= static_cast<double>(vectors.cols);
    }
    return out;
}

Arm baseline_arm(const TrainConfig& cfg) {
    Arm arm;
    arm.name = "baseline";
    const std::size_t center = label_center_offset(cfg.head.window_len, cfg.head.conv_margin);
    arm.loss = [&cfg, center](const FeatureSample& s, const Projection& p, bool want_grad) {
        const Matrix slices = slice_windows(s.features, cfg.head);
        const Matrix vectors = project(slices, p);
        const auto pred = wave_readout(vectors);
        const auto target = label_wave(s.bpm, pred.size(), center);
        const auto n = static_cast<double>(pred.size());
        SampleResult r;
        double mse = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) mse += (pred[i] - target[i]) * (pred[i] - target[i]);
        r.loss.mse = mse / n;
        r.loss.total = r.loss.mse;
        if (want_grad) {
            Matrix d_vec(vectors.rows, vectors.cols);
            const double k_dim = static_cast<double>(vectors.cols);
            for (std::size_t i = 0; i < vectors.rows; ++i) {
                const double g = 2.0 * (pred[i] - target[i]) / (n * k_dim);
                for (std::size_t k = 0; k < vectors.cols; ++k) d_vec(i, k) = g;
            }
            r.grad = project_backward(slices, p, vectors, d_vec);
        }
        return r;
    };
    arm.estimate = [&cfg](const FeatureSample& s, const Projection& p, double* offdiag) {
        if (offdiag != nullptr) *offdiag = kNaN;
        Wave w;
        w.fs = kFeatureFrameRate;
        w.samples = wave_readout(project(slice_windows(s.features, cfg.head), p));
        return estimate_hr_wave(w);
    };
    return arm;
}

EpochRecord dataset_loss(const Arm& arm, const std::vector<FeatureSample>& data, const Projection& p) {
    EpochRecord acc;
    for (const auto& s : data) {
        const auto r = arm.loss(s, p, false);
        acc.mse += r.loss.mse;
        acc.pearson += r.loss.pearson;
        acc.reg += r.loss.reg;
        acc.total += r.loss.total;
    }
    const auto n = static_cast<double>(data.size());
    acc.mse /= n;
    acc.pearson /= n;
    acc.reg /= n;
    acc.total /= n;
    return acc;
}

bool all_finite(const ProjectionGradients& g) {
    const auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(g.d_weights.values.begin(), g.d_weights.values.end(), finite) &&
           std::all_of(g.d_bias.begin(), g.d_bias.end(), finite);
}

void validate_arm(const Arm& arm, const FeatureDataset& data, const Projection& p, TrainReport& report) {
    std::vector<double> ok_pred, ok_truth;
    double offdiag_sum = 0.0;
    std::size_t offdiag_count = 0;
    for (const auto& s : data.val) {
        report.val_truth.push_back(s.bpm);
        double offdiag = kNaN;
        try {
            const double bpm = arm.estimate(s, p, &offdiag);
            report.val_pred.push_back(bpm);
            ok_pred.push_back(bpm);
            ok_truth.push_back(s.bpm);
        } catch (const EstimationError& e) {
            // The R-hat is still computed before estimation fails.
            report.val_pred.push_back(kNaN);
            ++report.val_failures;
            log::debug(std::string("validation estimate failed: ") + e.what());
        }
        if (std::isfinite(offdiag)) {
            offdiag_sum += offdiag;
            ++offdiag_count;
        }
    }
    if (!ok_pred.empty()) {
        const auto m = metrics(ok_pred, ok_truth);
        report.val_mae = m.mae;
        report.val_std = m.std;
        report.val_rmse = m.rmse;
    } else {
        report.val_mae = report.val_std = report.val_rmse = kNaN;
    }
    if (offdiag_count > 0) {
        report.mean_offdiag = offdiag_sum / static_cast<double>(offdiag_count);
        report.collapsed = report.mean_offdiag > kCollapseThreshold;
    } else {
        report.mean_offdiag = kNaN;
        report.collapsed = false;
    }
}

void apply_step(Projection& p, const ProjectionGradients& g, double lr) {
    for (std::size_t i = 0; i < p.weights.values.size(); ++i) p.weights.values[i] -= lr * g.d_weights.values[i];
    for (std::size_t k = 0; k < p.bias.size(); ++k) p.bias[k] -= lr * g.d_bias[k];
}

TrainReport run_training(const TrainConfig& cfg, const Arm& arm) {
    cfg.validate();
    TrainReport report;
    report.arm = arm.name;
    const FeatureDataset data = make_dataset(cfg.dataset, cfg.seed);
    report.degenerate_dataset = data.train.size() < 8;
    if (report.degenerate_dataset) {
        log::info("training set has " + std::to_string(data.train.size()) + " sample(s); results are degenerate");
    }

    const std::size_t in_dim = cfg.head.window_len * cfg.dataset.dims;
    Projection proj = make_projection(in_dim, cfg.out_dim, cfg.seed ^ 0x9e3779b97f4a7c15ULL, cfg.activation);
    std::mt19937_64 shuffle_rng(cfg.seed + 17);

    double lr = cfg.learning_rate;
    EpochRecord current = dataset_loss(arm, data.train, proj);
    current.epoch = 0;
    current.learning_rate = lr;
    report.epochs.push_back(current);

    std::vector<std::size_t> order(data.train.size());
    for (std::size_t e = 1; e <= cfg.epochs && !report.diverged; ++e) {
        const Projection snapshot = proj;
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            ProjectionGradients batch;
            batch.d_weights = Matrix(proj.weights.rows, proj.weights.cols);
            batch.d_bias.assign(proj.bias.size(), 0.0);
            // Summed in sample order so results do not depend on scheduling.
            for (std::size_t b = start; b < stop; ++b) {
                const auto r = arm.loss(data.train[order[b]], proj, true);
                for (std::size_t i = 0; i < batch.d_weights.values.size(); ++i) {
                    batch.d_weights.values[i] += r.grad.d_weights.values[i];
                }
                for (std::size_t k = 0; k < batch.d_bias.size(); ++k) batch.d_bias[k] += r.grad.d_bias[k];
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (double& v : batch.d_weights.values) v *= inv;
            for (double& v : batch.d_bias) v *= inv;
            if (!all_finite(batch)) {
                report.diverged = true;
                break;
            }
            apply_step(proj, batch, lr);
        }

        EpochRecord next = report.diverged ? EpochRecord{} : dataset_loss(arm, data.train, proj);
        if (report.diverged || !std::isfinite(next.total)) {
            report.diverged = true;
            proj = snapshot;
            log::error("training diverged at epoch " + std::to_string(e));
            break;
        }
        next.epoch = e;
        if (cfg.halve_on_increase && next.total > current.total) {
            proj = snapshot;
            lr *= 0.5;
            ++report.lr_halvings;
            log::info("epoch " + std::to_string(e) + ": loss rose, step undone, learning rate halved to " +
                      format_double(lr));
            next = current;
            next.epoch = e;
            next.rejected = true;
        }
        next.learning_rate = lr;
        current = next;
        report.epochs.push_back(current);
        log::debug("epoch " + std::to_string(e) + " loss " + format_double(current.total));
    }

    validate_arm(arm, data, proj, report);
    return report;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InputError("learning rate must be positive");
    if (batch_size == 0) throw InputError("batch size must be positive");
    if (out_dim == 0) throw InputError("projection width must be positive");
    if (dataset.train_samples == 0) throw InputError("training set is empty");
    if (dataset.val_samples == 0) throw InputError("validation set is empty");
    if (!(dataset.bpm_min >= 42.0 && dataset.bpm_max <= 240.0 && dataset.bpm_min <= dataset.bpm_max)) {
        throw InputError("dataset bpm range must lie within [42, 240]");
    }
    if (!(dataset.delay_span >= 0.0) || !(dataset.noise_sigma >= 0.0)) {
        throw InputError("delay span and noise must be non-negative");
    }
    if (dataset.train_frames < std::max<std::size_t>(30, head.window_len + 2) || dataset.val_frames < 30 ||
        dataset.val_frames < head.window_len) {
        throw InputError("feature sequences too short for the window");
    }
    weights.validate();
    head.validate();
}

FeatureDataset make_dataset(const FeatureDatasetSpec& spec, std::uint64_t seed) {
    FeatureDataset ds;
    auto draw = [&](std::size_t count, std::size_t frames, std::uint64_t stream) {
        std::vector<FeatureSample> out;
        std::mt19937_64 rng(seed * 2654435761ULL + stream);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = 0; i < count; ++i) {
            FeatureSample s;
            s.bpm = spec.bpm_min + (spec.bpm_max - spec.bpm_min) * unit(rng);
            const double period_frames = kFeatureFrameRate * 60.0 / s.bpm;
            s.delay_frames = spec.delay_span * period_frames * unit(rng);
            const std::uint64_t feature_seed = rng();
            s.features = synth_features(s.bpm, frames, spec.dims, s.delay_frames, spec.noise_sigma, feature_seed);
            out.push_back(std::move(s));
        }
        return out;
    };
    ds.train = draw(spec.train_samples, spec.train_frames, 1);
    ds.val = draw(spec.val_samples, spec.val_frames, 2);
    return ds;
}

double mean_off_diagonal(const SimMatrix& m) {
    if (m.n < 2) return kNaN;
    double sum = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.n; ++j) {
            if (i != j) sum += m(i, j);
        }
    }
    return sum / static_cast<double>(m.n * (m.n - 1));
}

TrainReport train(const TrainConfig& cfg) { return run_training(cfg, byhe_arm(cfg)); }

TrainReport baseline_wave_mse(const TrainConfig& cfg) { return run_training(cfg, baseline_arm(cfg)); }

void write_epoch_csv(const TrainReport& r, std::ostream& out) {
    out << "epoch,learning_rate,mse,pearson,reg,total,rejected\n";
    for (const auto& e : r.epochs) {
        out << e.epoch << ',' << format_double(e.learning_rate) << ',' << format_double(e.mse) << ','
            << format_double(e.pearson) << ',' << format_double(e.reg) << ',' << format_double(e.total) << ','
            << (e.rejected ? 1 : 0) << '\n';
    }
    if (!out) throw std::runtime_error("write failed");
}

// ---------------------------------------------------------------------------
// Gradient checking

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

namespace {

SimMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SimMatrix m(n);
    for (double& v : m.values) v = u(rng);
    // Unit diagonal as in every cosine R-hat; its group has zero std and is skipped by reg.
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

// Central differences of `loss` over every entry of `params`, compared with `analytic`.
void check_entries(GradCheckEntry& entry, std::vector<double>& params, const std::vector<double>& analytic,
                   const std::function<double()>& loss, double h, const std::vector<bool>* skip = nullptr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (skip != nullptr && (*skip)[i]) {
            ++entry.skipped;
            continue;
        }
        const double saved = params[i];
        params[i] = saved + h;
        const double up = loss();
        params[i] = saved - h;
        const double down = loss();
        params[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        entry.max_rel_err = std::max(entry.max_rel_err, relative_error(analytic[i], numeric));
        ++entry.checked;
    }
}

// Entries whose diagonal group has a near-zero std sit where sqrt is not smooth.
std::vector<bool> reg_skip_mask(const SimMatrix& m) {
    const auto stds = diagonal_group_std(m);
    std::vector<bool> skip(m.values.size(), false);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.n; ++j) skip[i * m.n + j] = stds[i > j ? i - j : j - i] < 1e-6;
    }
    return skip;
}

}  // namespace

GradCheckReport grad_check(std::uint64_t seed, double h) {
    if (!(h >= 1e-7 && h <= 1e-3)) throw InputError("finite-difference step must lie in [1e-7, 1e-3]");
    GradCheckReport report;
    report.h = h;
    report.instances = kGradCheckInstances;
    GradCheckEntry mse{"mse_loss"}, pearson{"pearson_loss"}, reg{"reg_loss"}, total{"total_loss"};
    GradCheckEntry head_w{"head_backward.d_weights"}, head_b{"head_backward.d_bias"},
        head_f{"head_backward.d_features"}, chain{"head+total_loss.d_weights"};

    constexpr std::size_t kLossN = 8;
    const LossWeights defaults;
    for (std::size_t inst = 0; inst < kGradCheckInstances; ++inst) {
        std::mt19937_64 rng(seed * 1000003ULL + inst);

        // Loss terms on random 8x8 pairs.
        SimMatrix rhat = random_matrix(kLossN, rng);
        const SimMatrix r = random_matrix(kLossN, rng);
        const auto skip = reg_skip_mask(rhat);
        check_entries(mse, rhat.values, mse_loss(rhat, r).grad.values,
                      [&] { return mse_loss(rhat, r).value; }, h);
        check_entries(pearson, rhat.values, pearson_loss(rhat, r).grad.values,
                      [&] { return pearson_loss(rhat, r).value; }, h);
        check_entries(reg, rhat.values, reg_loss(rhat).grad.values, [&] { return reg_loss(rhat).value; }, h, &skip);
        check_entries(total, rhat.values, total_loss(rhat, r, defaults).grad.values,
                      [&] { return total_loss(rhat, r, defaults).total; }, h, &skip);

        // Head with a random linear read-out of R-hat.
        HeadConfig head;
        head.window_len = 3;
        std::normal_distribution<double> gauss(0.0, 1.0);
        FeatureSequence f(16, 3);
        for (double& v : f.values) v = gauss(rng);
        Projection p = make_projection(head.window_len * f.cols, 5, rng(), Activation::tanh, true);
        const std::size_t n = f.rows - head.window_len + 1;
        Matrix upstream(n, n);
        for (double& v : upstream.values) v = gauss(rng);
        auto linear_loss = [&] {
            const auto m = head_forward(f, p, head);
            double acc = 0.0;
            for (std::size_t i = 0; i < m.values.size(); ++i) acc += upstream.values[i] * m.values[i];
            return acc;
        };
        const auto g = head_backward(f, p, head, upstream, true);
        check_entries(head_w, p.weights.values, g.d_weights.values, linear_loss, h);
        check_entries(head_b, p.bias, g.d_bias, linear_loss, h);
        check_entries(head_f, f.values, g.d_features->values, linear_loss, h);

        // Head composed with the full objective against an oracle label.
        std::uniform_real_distribution<double> bpm_draw(60.0, 150.0);
        const SimMatrix label = oracle_label_matrix(bpm_draw(rng), kFeatureFrameRate, n);
        auto chain_loss = [&] { return total_loss(head_forward(f, p, head), label, defaults).total; };
        const auto lb = total_loss(head_forward(f, p, head), label, defaults);
        const auto gc = head_backward(f, p, head, lb.grad);
        check_entries(chain, p.weights.values, gc.d_weights.values, chain_loss, h);
    }

    report.entries = {mse, pearson, reg, total, head_w, head_b, head_f, chain};
    for (const auto& e : report.entries) report.worst = std::max(report.worst, e.max_rel_err);
    return report;
}

}  // namespace byhe
