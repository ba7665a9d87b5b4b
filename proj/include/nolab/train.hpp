#pragma once

#include <cstdint>
#include <vector>

#include "nolab/neuralop.hpp"
#include "nolab/pde.hpp"

namespace nolab {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 16;
    double lr0 = 1e-3;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    bool shuffle = true;
    bool coupled_wd = false;  // couple weight decay into the Adam gradient
    int threads = 1;

    void validate() const;
};

/// Pointwise input/output statistics of the training split.
struct Normalizer {
    Field in_mean, in_std, out_mean, out_std;
    double eps = 1e-8;
    bool enabled = true;

    static Normalizer fit(const Dataset& train);
    /// Pass-through normalizer (Kolmogorov runs train on raw fields).
    static Normalizer disabled();

    Field normalize_input(const Field& f) const;
    Field normalize_output(const Field& f) const;
    Field denormalize_output(const Field& f) const;
};

/// lr0 * 0.5 * (1 + cos(pi step / total)).
double cosine_lr(double lr0, int step, int total);

struct AdamState {
    std::vector<Tensor> m, v;
    long t = 0;

    static AdamState init(const std::vector<Tensor*>& params);
};

/// One Adam step (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) with decoupled
/// weight decay by default. Throws on non-finite gradients.
void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr, double weight_decay, bool coupled_wd = false);

struct EpochRow {
    int epoch = 0;
    double lr = 0.0;
    double train_mse = 0.0;
    double test_rel_l2 = 0.0;
};

struct FitResult {
    std::vector<EpochRow> history;
    bool diverged = false;
};

/// Minimizes MSE on normalized fields with Adam + cosine annealing. The
/// datasets must already be split; the normalizer must come from the train
/// split. Deterministic for fixed seed (independent of thread count).
FitResult fit(NnoModel& model, const Dataset& train, const Dataset& test,
              const TrainConfig& cfg, const Normalizer& norm);

struct EvalResult {
    double mean_rel_l2 = 0.0;
    std::vector<double> per_sample;
};

/// Relative L2 errors of denormalized predictions against raw outputs.
EvalResult evaluate(const NnoModel& model, const Dataset& ds, const Normalizer& norm);

/// Mean relative L2 error of projecting the true outputs onto Fourier modes
/// |k|_inf <= K. With a normalizer the projection runs in normalized
/// coordinates (normalize, truncate, denormalize); pass nullptr for the raw
/// baseline.
double fourier_truncation_baseline(const Dataset& ds, int K, const Normalizer* norm);

}  // namespace nolab
