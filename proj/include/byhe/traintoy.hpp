#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "byhe/losses.hpp"
#include "byhe/simhead.hpp"
#include "byhe/types.hpp"

namespace byhe {

/// Synthetic phasor-feature dataset. Each sample draws a bpm uniformly from
/// [bpm_min, bpm_max] and a feature delay uniformly from
/// [0, delay_span * beat period) frames.
struct FeatureDatasetSpec {
    std::size_t train_samples = 16;
    std::size_t val_samples = 8;
    double bpm_min = 60.0;
    double bpm_max = 120.0;
    double delay_span = 1.0;  // fraction of one beat period
    std::size_t dims = 4;
    double noise_sigma = 0.0;
    std::size_t train_frames = 70;
    std::size_t val_frames = 310;
};

struct TrainConfig {
    std::size_t epochs = 200;
    double learning_rate = 5e-4;
    std::size_t batch_size = 4;
    FeatureDatasetSpec dataset;
    LossWeights weights;
    HeadConfig head;
    std::size_t out_dim = kDefaultProjectionDim;
    Activation activation = Activation::tanh;
    bool halve_on_increase = true;  // reject an epoch whose training loss rose and halve the rate
    std::uint64_t seed = 0;

    void validate() const;
};

struct FeatureSample {
    double bpm = 0.0;
    double delay_frames = 0.0;
    FeatureSequence features;
};

struct FeatureDataset {
    std::vector<FeatureSample> train;
    std::vector<FeatureSample> val;
};

FeatureDataset make_dataset(const FeatureDatasetSpec& spec, std::uint64_t seed);

struct EpochRecord {
    std::size_t epoch = 0;  // 0 = before any update
    double learning_rate = 0.0;
    double mse = 0.0;
    double pearson = 0.0;
    double reg = 0.0;
    double total = 0.0;
    bool rejected = false;  // step undone and rate halved
};

struct TrainReport {
    std::string arm;  // "byhe" or "baseline"
    std::vector<EpochRecord> epochs;
    std::size_t lr_halvings = 0;
    bool diverged = false;
    bool degenerate_dataset = false;  // fewer than 8 training samples

    std::vector<double> val_truth;
    std::vector<double> val_pred;  // NaN where no estimate could be made
    std::size_t val_failures = 0;
    double val_mae = 0.0;  // over successful estimates; NaN if none
    double val_std = 0.0;
    double val_rmse = 0.0;

    double mean_offdiag = 0.0;  // mean off-diagonal R-hat over validation samples (byhe arm)
    bool collapsed = false;     // mean_offdiag > 0.99
};

inline constexpr double kCollapseThreshold = 0.99;

/// Plain gradient descent on the projection against total_loss, labels from
/// oracle_label_matrix at each sample's bpm (no delay).
TrainReport train(const TrainConfig& cfg);

/// Ablation arm: the same-size projection regresses a per-frame wave (mean of
/// its outputs) onto the undelayed label wave with plain MSE.
TrainReport baseline_wave_mse(const TrainConfig& cfg);

/// Mean of the off-diagonal entries.
double mean_off_diagonal(const SimMatrix& m);

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  // points next to a non-differentiable group std
};

struct GradCheckReport {
    double h = 0.0;
    std::size_t instances = 0;
    std::vector<GradCheckEntry> entries;
    double worst = 0.0;
};

inline constexpr std::size_t kGradCheckInstances = 20;
inline constexpr double kGradCheckTolerance = 1e-4;

/// Central finite differences of every differentiable operation on
/// kGradCheckInstances seeded instances. h must lie in [1e-7, 1e-3].
GradCheckReport grad_check(std::uint64_t seed, double h = 1e-5);

/// |a - b| / max(|a|, |b|, 1e-6).
double relative_error(double analytic, double numeric);

void write_epoch_csv(const TrainReport& r, std::ostream& out);

}  // namespace byhe
