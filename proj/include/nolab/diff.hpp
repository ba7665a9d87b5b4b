#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nolab/field.hpp"

namespace nolab {

enum class Activation { Gelu, Tanh };

/// Exact-erf GeLU: 0.5 x (1 + erf(x / sqrt 2)).
double gelu(double x);
double gelu_derivative(double x);
double activation_apply(Activation a, double x);
double activation_derivative(Activation a, double x);

/// Dense 64-bit tensor. Shape is explicit; data is row-major.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> shape_, double fill = 0.0);
    Tensor(std::vector<int> shape_, std::vector<double> data_);

    std::size_t numel() const;
    int rows() const { return shape.at(0); }
    int cols() const { return shape.at(1); }

    /// Flattens a Field to [nx*ny, channels] (grid points as rows).
    static Tensor from_field(const Field& f);
    /// Inverse of from_field.
    Field to_field(const Grid2D& grid) const;
};

/// Mode lattice and channel sizes of one spectral convolution. Multipliers
/// are stored for the non-redundant half of the lattice |k|_inf <= K:
/// slot 0 is the (real) k = 0 matrix; each further mode contributes a real
/// and an imaginary matrix. Total stored reals: d_out*d_in*(2K+1)^2.
struct SpectralConvSpec {
    Grid2D grid;
    int K = 0;
    int d_in = 0;
    int d_out = 0;

    /// Half-lattice modes (excluding k = 0), fixed enumeration order.
    std::vector<std::pair<int, int>> half_modes() const;
    /// Shape of the packed weight tensor: [(2K+1)^2, d_out, d_in].
    std::vector<int> weight_shape() const;
};

/// Same role for the Laplace (Neumann cosine) basis: modes (k1, k2) in
/// [0, K]^2, all multipliers real. Weight shape [(K+1)^2, d_out, d_in].
struct CosineConvSpec {
    Grid2D grid;
    int K = 0;
    int d_in = 0;
    int d_out = 0;

    std::vector<int> weight_shape() const;
};

/// Records primitive applications for reverse-mode differentiation. One tape
/// per forward/backward pass; tapes are not shared between threads.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers an input; requires_grad marks trainable parameters.
    int leaf(Tensor value, bool requires_grad = false);

    const Tensor& val(int id) const;
    std::size_t num_nodes() const { return nodes_.size(); }

    // --- primitives (forward + recorded vector-Jacobian rule) ---
    int matmul(int a, int b);                  // [m,k] x [k,n]
    int add(int a, int b);
    int sub(int a, int b);
    int mul(int a, int b);                     // Hadamard
    int scale(int a, double s);
    int activation(int a, Activation kind);
    int mean_rows(int a);                      // [n,d] -> [1,d]
    int mean_all(int a);                       // any -> [1,1]
    /// mean over an axis set of a 2-D tensor; {0} -> mean_rows, {0,1} -> mean_all.
    int mean_reduce(int a, const std::vector<int>& axes);
    int broadcast_add(int a, int row);         // [n,d] + [1,d]
    int reshape(int a, std::vector<int> shape);
    int transpose(int a);                      // [m,n] -> [n,m]
    int tile_rows(int row, int n);             // [1,d] -> [n,d]
    int concat_cols(int a, int b);             // [n,p] | [n,q] -> [n,p+q]
    /// out[n,c] = sum_j beta[0,j] * tau[n, j*c_out + c]
    int trunk_combine(int tau, int beta, int c_out);
    int spectral_conv(int v, int weights, const SpectralConvSpec& spec);
    int cosine_conv(int v, int weights, const CosineConvSpec& spec);

    /// Reverse accumulation from a scalar root.
    void backward(int root);
    /// Gradient of the last backward pass w.r.t. node id.
    const Tensor& grad(int id) const;

private:
    struct Node {
        Tensor value;
        bool needs_grad = false;
        std::function<void(Tape&)> vjp;
    };
    int push(Tensor value, bool needs_grad, std::function<void(Tape&)> vjp);
    std::vector<double>& gbuf(int id) { return grads_[id].data; }

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    friend struct TapeDetail;
};

/// grad of a scalar root w.r.t. a set of tape nodes (parameters).
std::vector<Tensor> grad(Tape& tape, int root, const std::vector<int>& wrt);

/// Pointwise fully connected network: widths [w0, ..., wD], activation
/// between layers, none after the last.
struct MlpParams {
    std::vector<int> widths;
    Activation activation = Activation::Tanh;
    std::vector<Tensor> weights;  // [w_i, w_{i+1}]
    std::vector<Tensor> biases;   // [1, w_{i+1}]

    static MlpParams glorot(std::vector<int> widths, Activation act, std::uint64_t seed);
    std::size_t param_count() const;
    void validate() const;
};

/// Node ids of an MLP's parameters after registration on a tape.
struct TapedMlp {
    std::vector<int> weights;
    std::vector<int> biases;
};

TapedMlp register_mlp(Tape& tape, const MlpParams& mlp, bool requires_grad = true);
int mlp_forward(Tape& tape, const MlpParams& mlp, const TapedMlp& ids, int x);

/// Convenience: run an MLP outside any training context.
Tensor mlp_eval(const MlpParams& mlp, const Tensor& x);

}  // namespace nolab
