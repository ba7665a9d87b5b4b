#pragma once

#include <cstdint>
#include <vector>

#include "nolab/neuralop.hpp"
#include "nolab/pde.hpp"
#include "nolab/train.hpp"

namespace nolab {

/// Continuous functional with a closed-form evaluator, the target of the
/// averaged-functional approximation runs.
struct FunctionalTarget {
    enum class Kind { Linear, Energy, MaxSmooth } kind = Kind::Linear;
    Field xi;  // pairing function for Linear

    static FunctionalTarget linear(Field xi);
    static FunctionalTarget energy();     // u -> mean(u^2)
    static FunctionalTarget max_smooth(); // u -> log mean exp(u)

    double operator()(const Field& u) const;
};

/// Compact input family: mean-zero periodic GRF samples truncated to
/// |k|_inf <= band_limit and clipped to [-3, 3].
Field sample_compact_input(const Grid2D& grid, std::uint64_t seed, std::uint64_t index,
                           int band_limit);

struct AvgFunctionalResult {
    NnoModel model;          // strict ANO with scalar x-free projection
    double heldout_rel_mae = 0.0;  // MAE / std(target) on held-out samples
    bool diverged = false;
};

/// Trains u -> q1(sigma(mean R(u(x), x))) against target(u) on GRF samples.
AvgFunctionalResult train_functional_average(const FunctionalTarget& target,
                                             const GrfSpec& grf, const Grid2D& grid, int d_c,
                                             int n_train, int n_test, const TrainConfig& cfg);

struct EncoderDecoderResult {
    NnoModel model;  // ANO with decoder = linear(J)
    double test_rel_l2 = 0.0;
    bool diverged = false;
};

/// The ANO-with-linear-decoder architecture the encoder-decoder fit trains.
NnoConfig encoder_decoder_config(int in_channels, int out_channels, int d_c, int J);

/// Jointly trains the averaging encoder and J trunk fields on a dataset.
EncoderDecoderResult encoder_decoder_fit(const Dataset& ds, int n_train, int J, int d_c,
                                         const TrainConfig& cfg);

/// Circular-shift dataset Psi(u)(x) = u(x + h) over the compact family.
/// h must be a grid-multiple (throws otherwise).
Dataset make_shift_dataset(const Grid2D& grid, int n, std::uint64_t seed, double hx, double hy,
                           int band_limit);

/// Circular roll by whole cells; the oracle behind the shift targets.
Field circular_shift(const Field& f, int cells_x, int cells_y);

struct ShiftDemoResult {
    double local_rel_l2 = 0.0;  // pointwise-MLP model
    double ano_rel_l2 = 0.0;
};

/// Test error of an averaging operator (linear decoder) trained on the
/// circular-shift task over the compact family.
double train_shift_ano(const Grid2D& grid, double hx, double hy, int band_limit, int d_c,
                       int n_train, int n_test, const TrainConfig& cfg);

/// Test error of the purely pointwise comparator on the same task.
double train_shift_local(const Grid2D& grid, double hx, double hy, int band_limit, int n_train,
                         int n_test, const TrainConfig& cfg);

/// Trains (a) a purely pointwise model and (b) an ANO on the shift task and
/// reports both test errors.
ShiftDemoResult shift_demo(const Grid2D& grid, double hx, double hy, int band_limit,
                           int n_train, int n_test, int d_c_ano, const TrainConfig& cfg);

}  // namespace nolab
