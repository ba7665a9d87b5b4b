#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nolab/diff.hpp"
#include "nolab/field.hpp"

namespace nolab {

/// Nonlocal term of a hidden layer.
///  - Fourier(K):        learnable multiplier on Fourier modes |k|_inf <= K
///  - Constant:          learnable matrix times the domain average
///  - LaplaceNeumann(K): learnable multipliers on cosine modes in [0, K]^2
///  - Local:             no nonlocal term (pointwise-only baseline)
enum class BasisKind { Fourier, Constant, LaplaceNeumann, Local };

enum class DecoderKind { Mlp, Linear };

struct NnoConfig {
    int in_channels = 1;
    int out_channels = 1;
    int d_c = 16;  // channel dimension of the latent function
    int L = 4;     // hidden layers
    BasisKind basis = BasisKind::Fourier;
    int K = 2;  // mode cutoff for Fourier / LaplaceNeumann
    Activation activation = Activation::Gelu;

    int lifting_depth = 0;  // hidden layers in R; 0 = affine lift
    int lifting_width = 0;  // 0 -> d_c
    int projection_depth = 1;
    int projection_width = 0;  // 0 -> 2*d_c

    DecoderKind decoder = DecoderKind::Mlp;
    int J = 1;  // rank of the linear decoder
    int trunk_depth = 2;
    int trunk_width = 32;

    bool positional_encoding = true;  // append coords to the lifting input
    bool q_positional = false;        // append coords to the projection input
    bool use_W = true;                // pointwise matrix in hidden layers

    void validate() const;

    /// 4-layer GeLU Fourier operator, affine lift, pointwise-MLP projection.
    static NnoConfig fno(int in_ch, int out_ch, int d_c, int K, int L = 4);
    /// Strict averaging operator: one constant-basis layer, no W, tanh,
    /// coordinate-aware projection.
    static NnoConfig ano(int in_ch, int out_ch, int d_c);
    /// Purely pointwise model (no nonlocal term anywhere).
    static NnoConfig local(int in_ch, int out_ch, int d_c, int L);
};

struct NnoLayerParams {
    Tensor W;              // [d, d], present when use_W
    Tensor b;              // [1, d]
    Tensor basis_weights;  // packed multipliers; empty for Local basis
};

/// Parameters + architecture of one nonlocal neural operator. Models are not
/// bound to a grid; samplings are supplied per forward call.
struct NnoModel {
    NnoConfig config;
    MlpParams lift;
    std::vector<NnoLayerParams> layers;
    MlpParams proj;    // decoder == Mlp
    Tensor dec_B;      // decoder == Linear: [d_c, J]
    Tensor dec_b;      // [1, J]
    MlpParams trunk;   // decoder == Linear: coords -> J*out_channels

    static NnoModel init(const NnoConfig& config, std::uint64_t seed);

    std::size_t param_count() const;
    /// All parameter tensors in declaration order (checkpoint + optimizer order).
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    std::vector<std::string> parameter_names() const;
};

/// Node ids of a model registered on a tape, in parameters() order, plus the
/// structured handles the forward pass needs.
struct TapedModel {
    std::vector<int> param_ids;
    TapedMlp lift;
    struct Layer {
        int W = -1, b = -1, basis = -1;
    };
    std::vector<Layer> layers;
    TapedMlp proj;
    int dec_B = -1, dec_b = -1;
    TapedMlp trunk;
};

TapedModel register_model(Tape& tape, const NnoModel& model, bool requires_grad = true);

/// Builds the lifting input tensor [N, in_channels (+2)] for a Field.
Tensor lifting_input(const NnoModel& model, const Field& u);

/// Full forward pass on an existing tape; returns the output node
/// (shape [N, out_channels]).
int model_forward_on_tape(Tape& tape, const NnoModel& model, const TapedModel& ids,
                          const Field& u);

/// Lifting layer alone: per grid point R(u(x), x) -> [N, d_c].
Tensor lift(const NnoModel& model, const Field& u);

/// One hidden layer applied to v [N, d_c] sampled on `grid`.
Tensor nno_layer(const NnoModel& model, int layer_index, const Tensor& v, const Grid2D& grid);

/// Projection/decoder applied to v [N, d_c].
Field project(const NnoModel& model, const Tensor& v, const Grid2D& grid);

/// Convenience forward (fresh tape, no gradients).
Field model_forward(const NnoModel& model, const Field& u);

/// Strict-ANO forward; requires L = 1, constant basis, use_W = false.
Field ano_forward(const NnoModel& model, const Field& u);

/// Fourier-basis forward; requires basis == Fourier.
Field fno_forward(const NnoModel& model, const Field& u);

/// The constant latent vector sigma(T mean R(u) + b) of a strict ANO,
/// computed from an explicit lifting-input tensor (rows may be permuted).
Tensor encode_average(const NnoModel& model, const Tensor& lifting_rows);

std::size_t param_count(const NnoConfig& config);

/// Channel/mode splits of one budget C = d_c * K: K in {2, 4, 8, ...} while
/// d_c = C / K >= 2. C must be a power of two >= 4.
std::vector<std::pair<int, int>> budget_pairs(int C);

}  // namespace nolab
