#include "nolab/diff.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "nolab/rng.hpp"
#include "nolab/spectral.hpp"

namespace nolab {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
using cplx = std::complex<double>;
}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_derivative(double x) {
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) +
           0.5 * x * kSqrt2OverPi * std::exp(-0.5 * x * x);
}

double activation_apply(Activation a, double x) {
    return a == Activation::Gelu ? gelu(x) : std::tanh(x);
}

double activation_derivative(Activation a, double x) {
    if (a == Activation::Gelu) return gelu_derivative(x);
    const double t = std::tanh(x);
    return 1.0 - t * t;
}

Tensor::Tensor(std::vector<int> shape_, double fill) : shape(std::move(shape_)) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
        n *= std::size_t(d);
    }
    data.assign(n, fill);
}

Tensor::Tensor(std::vector<int> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (numel() != data.size()) throw std::invalid_argument("Tensor: data length mismatch");
}

std::size_t Tensor::numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= std::size_t(d);
    return n;
}

Tensor Tensor::from_field(const Field& f) {
    Tensor t({int(f.grid.num_points()), f.channels});
    t.data = f.data;
    return t;
}

Field Tensor::to_field(const Grid2D& grid) const {
    if (shape.size() != 2 || std::size_t(shape[0]) != grid.num_points()) {
        throw std::invalid_argument("Tensor::to_field: shape does not match grid");
    }
    Field f(grid, shape[1]);
    f.data = data;
    return f;
}

std::vector<std::pair<int, int>> SpectralConvSpec::half_modes() const {
    std::vector<std::pair<int, int>> modes;
    for (int ky = 0; ky <= K; ++ky) {
        for (int kx = -K; kx <= K; ++kx) {
            if (ky > 0 || (ky == 0 && kx > 0)) modes.emplace_back(kx, ky);
        }
    }
    return modes;
}

std::vector<int> SpectralConvSpec::weight_shape() const {
    const int slots = (2 * K + 1) * (2 * K + 1);  // 1 real DC + (re, im) per half mode
    return {slots, d_out, d_in};
}

std::vector<int> CosineConvSpec::weight_shape() const {
    return {(K + 1) * (K + 1), d_out, d_in};
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

int Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&)> vjp) {
    nodes_.push_back(Node{std::move(value), needs_grad, std::move(vjp)});
    return int(nodes_.size()) - 1;
}

int Tape::leaf(Tensor value, bool requires_grad) {
    return push(std::move(value), requires_grad, nullptr);
}

const Tensor& Tape::val(int id) const { return nodes_.at(id).value; }

const Tensor& Tape::grad(int id) const {
    const Tensor& g = grads_.at(id);
    if (g.data.empty()) {
        throw std::invalid_argument("Tape::grad: node is detached from the differentiated root");
    }
    return g;
}

std::vector<Tensor> grad(Tape& tape, int root, const std::vector<int>& wrt) {
    tape.backward(root);
    std::vector<Tensor> out;
    out.reserve(wrt.size());
    for (int id : wrt) out.push_back(tape.grad(id));
    return out;
}

void Tape::backward(int root) {
    if (val(root).numel() != 1) {
        throw std::invalid_argument("Tape::backward: root must be scalar");
    }
    grads_.assign(nodes_.size(), Tensor{});
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].needs_grad) grads_[i] = Tensor(nodes_[i].value.shape, 0.0);
    }
    if (!nodes_[root].needs_grad) return;  // nothing trainable feeds the root
    grads_[root].data[0] = 1.0;
    for (int i = root; i >= 0; --i) {
        if (nodes_[i].needs_grad && nodes_[i].vjp) nodes_[i].vjp(*this);
    }
}

namespace {

void require_2d(const Tensor& t, const char* op) {
    if (t.shape.size() != 2) throw std::invalid_argument(std::string(op) + ": expected 2-D tensor");
}

}  // namespace

int Tape::matmul(int a, int b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_2d(A, "matmul");
    require_2d(B, "matmul");
    if (A.cols() != B.rows()) throw std::invalid_argument("matmul: shape mismatch");
    const int m = A.rows(), k = A.cols(), n = B.cols();
    Tensor out({m, n});
    for (int i = 0; i < m; ++i) {
        const double* arow = &A.data[std::size_t(i) * k];
        double* orow = &out.data[std::size_t(i) * n];
        for (int kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            const double* brow = &B.data[std::size_t(kk) * n];
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    const bool req = nodes_[a].needs_grad || nodes_[b].needs_grad;
    const int id = push(std::move(out), req, nullptr);
    nodes_[id].vjp = [a, b, m, k, n, id](Tape& t) {
        const auto& g = t.gbuf(id);  // [m, n]
        if (t.nodes_[a].needs_grad) {  // dA = G * B^T
            auto& ga = t.gbuf(a);
            const auto& bv = t.val(b).data;
            for (int i = 0; i < m; ++i) {
                for (int kk = 0; kk < k; ++kk) {
                    double s = 0.0;
                    const double* grow = &g[std::size_t(i) * n];
                    const double* brow = &bv[std::size_t(kk) * n];
                    for (int j = 0; j < n; ++j) s += grow[j] * brow[j];
                    ga[std::size_t(i) * k + kk] += s;
                }
            }
        }
        if (t.nodes_[b].needs_grad) {  // dB = A^T * G
            auto& gb = t.gbuf(b);
            const auto& av = t.val(a).data;
            for (int i = 0; i < m; ++i) {
                const double* arow = &av[std::size_t(i) * k];
                const double* grow = &g[std::size_t(i) * n];
                for (int kk = 0; kk < k; ++kk) {
                    const double aik = arow[kk];
                    double* gbrow = &gb[std::size_t(kk) * n];
                    for (int j = 0; j < n; ++j) gbrow[j] += aik * grow[j];
                }
            }
        }
    };
    return id;
}

int Tape::add(int a, int b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (A.shape != B.shape) throw std::invalid_argument("add: shape mismatch");
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] + B.data[i];
    const bool req = nodes_[a].needs_grad || nodes_[b].needs_grad;
    const int id = push(std::move(out), req, nullptr);
    nodes_[id].vjp = [a, b, id](Tape& t) {
        const auto& g = t.gbuf(id);
        if (t.nodes_[a].needs_grad) {
            auto& ga = t.gbuf(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.nodes_[b].needs_grad) {
            auto& gb = t.gbuf(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        }
    };
    return id;
}

int Tape::sub(int a, int b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (A.shape != B.shape) throw std::invalid_argument("sub: shape mismatch");
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] - B.data[i];
    const bool req = nodes_[a].needs_grad || nodes_[b].needs_grad;
    const int id = push(std::move(out), req, nullptr);
    nodes_[id].vjp = [a, b, id](Tape& t) {
        const auto& g = t.gbuf(id);
        if (t.nodes_[a].needs_grad) {
            auto& ga = t.gbuf(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.nodes_[b].needs_grad) {
            auto& gb = t.gbuf(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    };
    return id;
}

int Tape::mul(int a, int b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (A.shape != B.shape) throw std::invalid_argument("mul: shape mismatch");
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] * B.data[i];
    const bool req = nodes_[a].needs_grad || nodes_[b].needs_grad;
    const int id = push(std::move(out), req, nullptr);
    nodes_[id].vjp = [a, b, id](Tape& t) {
        const auto& g = t.gbuf(id);
        if (t.nodes_[a].needs_grad) {
            auto& ga = t.gbuf(a);
            const auto& bv = t.val(b).data;
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (t.nodes_[b].needs_grad) {
            auto& gb = t.gbuf(b);
            const auto& av = t.val(a).data;
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    };
    return id;
}

int Tape::scale(int a, double s) {
    const Tensor& A = val(a);
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] * s;
    const int id = push(std::move(out), nodes_[a].needs_grad, nullptr);
    nodes_[id].vjp = [a, s, id](Tape& t) {
        if (!t.nodes_[a].needs_grad) return;
        const auto& g = t.gbuf(id);
        auto& ga = t.gbuf(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
    };
    return id;
}

int Tape::activation(int a, Activation kind) {
    const Tensor& A = val(a);
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = activation_apply(kind, A.data[i]);
    }
    const int id = push(std::move(out), nodes_[a].needs_grad, nullptr);
    nodes_[id].vjp = [a, kind, id](Tape& t) {
        if (!t.nodes_[a].needs_grad) return;
        const auto& g = t.gbuf(id);
        auto& ga = t.gbuf(a);
        const auto& x = t.val(a).data;
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i] * activation_derivative(kind, x[i]);
        }
    };
    return id;
}

int Tape::mean_rows(int a) {
    const Tensor& A = val(a);
    require_2d(A, "mean_rows");
    const int n = A.rows(), d = A.cols();
    Tensor out({1, d});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) out.data[j] += A.data[std::size_t(i) * d + j];
    }
    for (int j = 0; j < d; ++j) out.data[j] /= double(n);
    const int id = push(std::move(out), nodes_[a].needs_grad, nullptr);
    nodes_[id].vjp = [a, n, d, id](Tape& t) {
        if (!t.nodes_[a].needs_grad) return;
        const auto& g = t.gbuf(id);
        auto& ga = t.gbuf(a);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) ga[std::size_t(i) * d + j] += g[j] / double(n);
        }
    };
    return id;
}

int Tape::mean_all(int a) {
    const Tensor& A = val(a);
    const std::size_t n = A.numel();
    double s = 0.0;
    for (double v : A.data) s += v;
    Tensor out({1, 1});
    out.data[0] = s / double(n);
    const int id = push(std::move(out), nodes_[a].needs_grad, nullptr);
    nodes_[id].vjp = [a, n, id](Tape& t) {
        if (!t.nodes_[a].needs_grad) return;
        const double g = t.gbuf(id)[0] / double(n);
        auto& ga = t.gbuf(a);
        for (double& v : ga) v += g;
    };
    return id;
}

int Tape::mean_reduce(int a, const std::vector<int>& axes) {
    if (axes == std::vector<int>{0}) return mean_rows(a);
    if (axes == std::vector<int>{0, 1}) return mean_all(a);
    throw std::invalid_argument("mean_reduce: unsupported axis set");
}

int Tape::broadcast_add(int a, int row) {
    const Tensor& A = val(a);
    const Tensor& R = val(row);
    require_2d(A, "broadcast_add");
    if (R.shape != std::vector<int>{1, A.cols()}) {
        throw std::invalid_argument("broadcast_add: row must be [1, cols]");
    }
    const int n = A.rows(), d = A.cols();
    Tensor out({n, d});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            out.data[std::size_t(i) * d + j] = A.data[std::size_t(i) * d + j] + R.data[j];
        }
    }
    const bool req = nodes_[a].needs_grad || nodes_[row].needs_grad;
    const int id = push(std::move(out), req, nullptr);
    nodes_[id].vjp = [a, row, n, d, id](Tape& t) {
        const auto& g = t.gbuf(id);
        if (t.nodes_[a].needs_grad) {
            auto& ga = t.gbuf(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.nodes_[row].needs_grad) {
            auto& gr = t.gbuf(row);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < d; ++j) gr[j] += g[std::size_t(i) * d + j];
            }
        }
    };
    return id;
}

int Tape::reshape(int a, std::vector<int> shape) {
    const Tensor& A = val(a);
    Tensor out(shape);
    if (out.numel() != A.numel()) throw std::invalid_argument("reshape: element count mismatch");
    out.data = A.data;
    const int id = push(std::move(out), nodes_[a].needs_grad, nullptr);
    nodes_[id].vjp = [a, id](Tape& t) {
        if (!t.nodes_[a].needs_grad) return;
        const auto& g = t.gbuf(id);
        auto& ga = t.gbuf(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    };
    return id;
}

int Tape::transpose(int a) {
    const Tensor& A = val(a);
    require_2d(A, "transpose");
    const int m = A.rows(), n = A.cols();
    Tensor out({n, m});
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) out.data[std::size_t(j) * m + i] = A.data[std::size_t(i) * n + j];
    }
    const int id = push(std::move(out), nodes_[a].needs_grad, nullptr);
    nodes_[id].vjp = [a, m, n, id](Tape& t) {
        if (!t.nodes_[a].needs_grad) return;
        const auto& g = t.gbuf(id);
        auto& ga = t.gbuf(a);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) ga[std::size_t(i) * n + j] += g[std::size_t(j) * m + i];
        }
    };
    return id;
}

int Tape::tile_rows(int row, int n) {
    const Tensor& R = val(row);
    require_2d(R, "tile_rows");
    if (R.rows() != 1) throw std::invalid_argument("tile_rows: input must be [1, d]");
    const int d = R.cols();
    Tensor out({n, d});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) out.data[std::size_t(i) * d + j] = R.data[j];
    }
    const int id = push(std::move(out), nodes_[row].needs_grad, nullptr);
    nodes_[id].vjp = [row, n, d, id](Tape& t) {
        if (!t.nodes_[row].needs_grad) return;
        const auto& g = t.gbuf(id);
        auto& gr = t.gbuf(row);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) gr[j] += g[std::size_t(i) * d + j];
        }
    };
    return id;
}

int Tape::concat_cols(int a, int b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_2d(A, "concat_cols");
    require_2d(B, "concat_cols");
    if (A.rows() != B.rows()) throw std::invalid_argument("concat_cols: row count mismatch");
    const int n = A.rows(), p = A.cols(), q = B.cols();
    Tensor out({n, p + q});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) out.data[std::size_t(i) * (p + q) + j] = A.data[std::size_t(i) * p + j];
        for (int j = 0; j < q; ++j) out.data[std::size_t(i) * (p + q) + p + j] = B.data[std::size_t(i) * q + j];
    }
    const bool req = nodes_[a].needs_grad || nodes_[b].needs_grad;
    const int id = push(std::move(out), req, nullptr);
    nodes_[id].vjp = [a, b, n, p, q, id](Tape& t) {
        const auto& g = t.gbuf(id);
        if (t.nodes_[a].needs_grad) {
            auto& ga = t.gbuf(a);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < p; ++j) ga[std::size_t(i) * p + j] += g[std::size_t(i) * (p + q) + j];
            }
        }
        if (t.nodes_[b].needs_grad) {
            auto& gb = t.gbuf(b);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < q; ++j) gb[std::size_t(i) * q + j] += g[std::size_t(i) * (p + q) + p + j];
            }
        }
    };
    return id;
}

int Tape::trunk_combine(int tau, int beta, int c_out) {
    const Tensor& T = val(tau);
    const Tensor& B = val(beta);
    require_2d(T, "trunk_combine");
    require_2d(B, "trunk_combine");
    if (B.rows() != 1 || T.cols() % c_out != 0 || T.cols() / c_out != B.cols()) {
        throw std::invalid_argument("trunk_combine: shape mismatch");
    }
    const int n = T.rows(), J = B.cols();
    Tensor out({n, c_out});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < J; ++j) {
            const double bj = B.data[j];
            for (int c = 0; c < c_out; ++c) {
                out.data[std::size_t(i) * c_out + c] +=
                    bj * T.data[std::size_t(i) * (J * c_out) + j * c_out + c];
            }
        }
    }
    const bool req = nodes_[tau].needs_grad || nodes_[beta].needs_grad;
    const int id = push(std::move(out), req, nullptr);
    nodes_[id].vjp = [tau, beta, n, J, c_out, id](Tape& t) {
        const auto& g = t.gbuf(id);
        const auto& Tv = t.val(tau).data;
        const auto& Bv = t.val(beta).data;
        if (t.nodes_[tau].needs_grad) {
            auto& gt = t.gbuf(tau);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < J; ++j) {
                    for (int c = 0; c < c_out; ++c) {
                        gt[std::size_t(i) * (J * c_out) + j * c_out + c] +=
                            g[std::size_t(i) * c_out + c] * Bv[j];
                    }
                }
            }
        }
        if (t.nodes_[beta].needs_grad) {
            auto& gb = t.gbuf(beta);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < J; ++j) {
                    double s = 0.0;
                    for (int c = 0; c < c_out; ++c) {
                        s += g[std::size_t(i) * c_out + c] *
                             Tv[std::size_t(i) * (J * c_out) + j * c_out + c];
                    }
                    gb[j] += s;
                }
            }
        }
    };
    return id;
}

// ---------------------------------------------------------------------------
// Spectral convolution
// ---------------------------------------------------------------------------

namespace {

struct ModeMatrix {
    int kx = 0, ky = 0;
    std::vector<cplx> m;  // d_out x d_in
};

// Applies out = ifft( M_k fft(v) restricted to the lattice ), v real [N, d_in].
Tensor apply_spectral(const Tensor& v, const std::vector<ModeMatrix>& modes,
                      const SpectralConvSpec& spec, int d_in, int d_out,
                      std::vector<std::vector<cplx>>* save_vhat) {
    const int nx = spec.grid.nx, ny = spec.grid.ny;
    const std::size_t plane = std::size_t(nx) * ny;

    // Forward transforms of all input channels.
    std::vector<std::vector<cplx>> vhat(d_in, std::vector<cplx>(plane));
    for (int ch = 0; ch < d_in; ++ch) {
        for (std::size_t p = 0; p < plane; ++p) vhat[ch][p] = v.data[p * d_in + ch];
        fft2_inplace(vhat[ch].data(), nx, ny, false);
    }
    auto mode_index = [nx, ny](int kx, int ky) {
        const int i = kx >= 0 ? kx : kx + nx;
        const int j = ky >= 0 ? ky : ky + ny;
        return std::size_t(j) * nx + i;
    };

    if (save_vhat) {
        save_vhat->assign(modes.size(), std::vector<cplx>(d_in));
        for (std::size_t mi = 0; mi < modes.size(); ++mi) {
            const std::size_t p = mode_index(modes[mi].kx, modes[mi].ky);
            for (int ch = 0; ch < d_in; ++ch) (*save_vhat)[mi][ch] = vhat[ch][p];
        }
    }

    std::vector<std::vector<cplx>> ohat(d_out, std::vector<cplx>(plane, cplx(0.0)));
    std::vector<cplx> in_vec(d_in), out_vec(d_out);
    for (const ModeMatrix& mm : modes) {
        const std::size_t p = mode_index(mm.kx, mm.ky);
        for (int ch = 0; ch < d_in; ++ch) in_vec[ch] = vhat[ch][p];
        for (int o = 0; o < d_out; ++o) {
            cplx s(0.0);
            for (int ch = 0; ch < d_in; ++ch) s += mm.m[std::size_t(o) * d_in + ch] * in_vec[ch];
            out_vec[o] = s;
        }
        const bool is_dc = (mm.kx == 0 && mm.ky == 0);
        const std::size_t pm = mode_index(-mm.kx, -mm.ky);
        for (int o = 0; o < d_out; ++o) {
            ohat[o][p] = out_vec[o];
            if (!is_dc) ohat[o][pm] = std::conj(out_vec[o]);
        }
    }

    Tensor out({v.rows(), d_out});
    for (int o = 0; o < d_out; ++o) {
        fft2_inplace(ohat[o].data(), nx, ny, true);
        for (std::size_t p = 0; p < plane; ++p) out.data[p * d_out + o] = ohat[o][p].real();
    }
    return out;
}

std::vector<ModeMatrix> unpack_modes(const Tensor& w, const SpectralConvSpec& spec,
                                     bool conj_transpose) {
    const int d_in = spec.d_in, d_out = spec.d_out;
    const auto half = spec.half_modes();
    std::vector<ModeMatrix> modes(1 + half.size());
    const std::size_t mat = std::size_t(d_out) * d_in;
    // Slot 0: real DC matrix; slots 2m+1 / 2m+2: real / imaginary parts.
    modes[0].kx = 0;
    modes[0].ky = 0;
    modes[0].m.resize(mat);
    for (std::size_t e = 0; e < mat; ++e) modes[0].m[e] = w.data[e];
    for (std::size_t mi = 0; mi < half.size(); ++mi) {
        ModeMatrix& mm = modes[mi + 1];
        mm.kx = half[mi].first;
        mm.ky = half[mi].second;
        mm.m.resize(mat);
        const double* re = &w.data[(2 * mi + 1) * mat];
        const double* im = &w.data[(2 * mi + 2) * mat];
        for (std::size_t e = 0; e < mat; ++e) mm.m[e] = cplx(re[e], im[e]);
    }
    if (conj_transpose) {
        for (ModeMatrix& mm : modes) {
            std::vector<cplx> t(mat);
            for (int o = 0; o < d_out; ++o) {
                for (int i = 0; i < d_in; ++i) {
                    t[std::size_t(i) * d_out + o] = std::conj(mm.m[std::size_t(o) * d_in + i]);
                }
            }
            mm.m = std::move(t);
        }
    }
    return modes;
}

}  // namespace

int Tape::spectral_conv(int v, int weights, const SpectralConvSpec& spec) {
    const Tensor& V = val(v);
    const Tensor& W = val(weights);
    require_2d(V, "spectral_conv");
    if (V.rows() != int(spec.grid.num_points()) || V.cols() != spec.d_in) {
        throw std::invalid_argument("spectral_conv: input shape mismatch");
    }
    if (W.shape != spec.weight_shape()) {
        throw std::invalid_argument("spectral_conv: weight shape mismatch");
    }
    if (spec.K >= std::min(spec.grid.nx, spec.grid.ny) / 2) {
        throw std::invalid_argument("spectral_conv: K >= n/2");
    }

    const auto modes = unpack_modes(W, spec, false);
    auto vhat_saved = std::make_shared<std::vector<std::vector<cplx>>>();
    Tensor out = apply_spectral(V, modes, spec, spec.d_in, spec.d_out, vhat_saved.get());

    const bool req = nodes_[v].needs_grad || nodes_[weights].needs_grad;
    const int id = push(std::move(out), req, nullptr);
    nodes_[id].vjp = [v, weights, spec, vhat_saved, id](Tape& t) {
        const auto& gout = t.gbuf(id);
        Tensor cot({int(spec.grid.num_points()), spec.d_out});
        cot.data = gout;
        if (t.nodes_[v].needs_grad) {
            // Adjoint in v: spectral conv with conjugate-transposed multipliers.
            SpectralConvSpec tspec = spec;
            tspec.d_in = spec.d_out;
            tspec.d_out = spec.d_in;
            const auto tmodes = unpack_modes(t.val(weights), spec, true);
            Tensor gv = apply_spectral(cot, tmodes, tspec, spec.d_out, spec.d_in, nullptr);
            auto& ga = t.gbuf(v);
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gv.data[i];
        }
        if (t.nodes_[weights].needs_grad) {
            // Outer product of the truncated input and cotangent spectra.
            const int nx = spec.grid.nx, ny = spec.grid.ny;
            const std::size_t plane = std::size_t(nx) * ny;
            const double N = double(plane);
            std::vector<std::vector<cplx>> chat(spec.d_out, std::vector<cplx>(plane));
            for (int o = 0; o < spec.d_out; ++o) {
                for (std::size_t p = 0; p < plane; ++p) chat[o][p] = cot.data[p * spec.d_out + o];
                fft2_inplace(chat[o].data(), nx, ny, false);
            }
            auto mode_index = [nx, ny](int kx, int ky) {
                const int i = kx >= 0 ? kx : kx + nx;
                const int j = ky >= 0 ? ky : ky + ny;
                return std::size_t(j) * nx + i;
            };
            auto& gw = t.gbuf(weights);
            const std::size_t mat = std::size_t(spec.d_out) * spec.d_in;
            const auto half = spec.half_modes();
            // DC slot: real matrix, single (self-conjugate) mode.
            for (int o = 0; o < spec.d_out; ++o) {
                const cplx c0 = chat[o][0];
                for (int ii = 0; ii < spec.d_in; ++ii) {
                    const cplx z = (*vhat_saved)[0][ii] * std::conj(c0);
                    gw[std::size_t(o) * spec.d_in + ii] += N * z.real();
                }
            }
            for (std::size_t mi = 0; mi < half.size(); ++mi) {
                const std::size_t p = mode_index(half[mi].first, half[mi].second);
                double* gre = &gw[(2 * mi + 1) * mat];
                double* gim = &gw[(2 * mi + 2) * mat];
                for (int o = 0; o < spec.d_out; ++o) {
                    const cplx c = std::conj(chat[o][p]);
                    for (int ii = 0; ii < spec.d_in; ++ii) {
                        const cplx z = (*vhat_saved)[mi + 1][ii] * c;
                        gre[std::size_t(o) * spec.d_in + ii] += 2.0 * N * z.real();
                        gim[std::size_t(o) * spec.d_in + ii] -= 2.0 * N * z.imag();
                    }
                }
            }
        }
    };
    return id;
}

// ---------------------------------------------------------------------------
// Cosine (Laplace-Neumann) convolution
// ---------------------------------------------------------------------------

namespace {

// out = idct2( M_k dct2(v) restricted to [0,K]^2 ); transpose applies M^T.
Tensor apply_cosine(const Tensor& v, const Tensor& w, const CosineConvSpec& spec,
                    bool transpose, int d_in, int d_out,
                    std::vector<std::vector<double>>* save_vtilde) {
    Field vf = v.to_field(spec.grid);
    Field vt = dct2(vf);
    const int K = spec.K;
    if (save_vtilde) {
        save_vtilde->assign(std::size_t(K + 1) * (K + 1), std::vector<double>(d_in));
        for (int k2 = 0; k2 <= K; ++k2)
            for (int k1 = 0; k1 <= K; ++k1)
                for (int ch = 0; ch < d_in; ++ch)
                    (*save_vtilde)[std::size_t(k2) * (K + 1) + k1][ch] = vt.at(k1, k2, ch);
    }
    Field ot(spec.grid, d_out, 0.0);
    const std::size_t mat = std::size_t(spec.d_out) * spec.d_in;
    for (int k2 = 0; k2 <= K; ++k2) {
        for (int k1 = 0; k1 <= K; ++k1) {
            const double* M = &w.data[(std::size_t(k2) * (K + 1) + k1) * mat];
            for (int o = 0; o < d_out; ++o) {
                double s = 0.0;
                for (int ch = 0; ch < d_in; ++ch) {
                    const double m = transpose ? M[std::size_t(ch) * d_out + o]
                                               : M[std::size_t(o) * d_in + ch];
                    s += m * vt.at(k1, k2, ch);
                }
                ot.at(k1, k2, o) = s;
            }
        }
    }
    Field of = idct2(ot);
    return Tensor::from_field(of);
}

}  // namespace

int Tape::cosine_conv(int v, int weights, const CosineConvSpec& spec) {
    const Tensor& V = val(v);
    const Tensor& W = val(weights);
    require_2d(V, "cosine_conv");
    if (V.rows() != int(spec.grid.num_points()) || V.cols() != spec.d_in) {
        throw std::invalid_argument("cosine_conv: input shape mismatch");
    }
    if (W.shape != spec.weight_shape()) {
        throw std::invalid_argument("cosine_conv: weight shape mismatch");
    }
    if (spec.K >= std::min(spec.grid.nx, spec.grid.ny) / 2) {
        throw std::invalid_argument("cosine_conv: K >= n/2");
    }

    auto vtilde = std::make_shared<std::vector<std::vector<double>>>();
    Tensor out = apply_cosine(V, W, spec, false, spec.d_in, spec.d_out, vtilde.get());

    const bool req = nodes_[v].needs_grad || nodes_[weights].needs_grad;
    const int id = push(std::move(out), req, nullptr);
    nodes_[id].vjp = [v, weights, spec, vtilde, id](Tape& t) {
        const auto& gout = t.gbuf(id);
        Tensor cot({int(spec.grid.num_points()), spec.d_out});
        cot.data = gout;
        if (t.nodes_[v].needs_grad) {
            CosineConvSpec tspec = spec;
            tspec.d_in = spec.d_out;
            tspec.d_out = spec.d_in;
            Tensor gv = apply_cosine(cot, t.val(weights), tspec, true, spec.d_out, spec.d_in,
                                     nullptr);
            auto& ga = t.gbuf(v);
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gv.data[i];
        }
        if (t.nodes_[weights].needs_grad) {
            Field cf = cot.to_field(spec.grid);
            Field ct = dct2(cf);
            auto& gw = t.gbuf(weights);
            const int K = spec.K;
            const std::size_t mat = std::size_t(spec.d_out) * spec.d_in;
            for (int k2 = 0; k2 <= K; ++k2) {
                for (int k1 = 0; k1 <= K; ++k1) {
                    double* G = &gw[(std::size_t(k2) * (K + 1) + k1) * mat];
                    const auto& vk = (*vtilde)[std::size_t(k2) * (K + 1) + k1];
                    for (int o = 0; o < spec.d_out; ++o) {
                        const double ck = ct.at(k1, k2, o);
                        for (int ch = 0; ch < spec.d_in; ++ch) {
                            G[std::size_t(o) * spec.d_in + ch] += ck * vk[ch];
                        }
                    }
                }
            }
        }
    };
    return id;
}

// ---------------------------------------------------------------------------
// MLP
// ---------------------------------------------------------------------------

void MlpParams::validate() const {
    if (widths.size() < 2) throw std::invalid_argument("MlpParams: need at least two widths");
    if (weights.size() != widths.size() - 1 || biases.size() != widths.size() - 1) {
        throw std::invalid_argument("MlpParams: layer count mismatch");
    }
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        if (weights[l].shape != std::vector<int>{widths[l], widths[l + 1]} ||
            biases[l].shape != std::vector<int>{1, widths[l + 1]}) {
            throw std::invalid_argument("MlpParams: inconsistent adjacent widths");
        }
    }
}

MlpParams MlpParams::glorot(std::vector<int> widths, Activation act, std::uint64_t seed) {
    MlpParams mlp;
    mlp.widths = std::move(widths);
    mlp.activation = act;
    std::uint64_t counter = 0;
    for (std::size_t l = 0; l + 1 < mlp.widths.size(); ++l) {
        const int fan_in = mlp.widths[l], fan_out = mlp.widths[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Tensor w({fan_in, fan_out});
        for (double& x : w.data) {
            x = limit * (2.0 * rng::uniform(seed, 0x6d6c70, counter++) - 1.0);
        }
        mlp.weights.push_back(std::move(w));
        mlp.biases.emplace_back(std::vector<int>{1, fan_out}, 0.0);
    }
    mlp.validate();
    return mlp;
}

std::size_t MlpParams::param_count() const {
    std::size_t n = 0;
    for (const Tensor& w : weights) n += w.numel();
    for (const Tensor& b : biases) n += b.numel();
    return n;
}

TapedMlp register_mlp(Tape& tape, const MlpParams& mlp, bool requires_grad) {
    TapedMlp ids;
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        ids.weights.push_back(tape.leaf(mlp.weights[l], requires_grad));
        ids.biases.push_back(tape.leaf(mlp.biases[l], requires_grad));
    }
    return ids;
}

int mlp_forward(Tape& tape, const MlpParams& mlp, const TapedMlp& ids, int x) {
    mlp.validate();
    if (tape.val(x).cols() != mlp.widths.front()) {
        throw std::invalid_argument("mlp_forward: input width mismatch");
    }
    int h = x;
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        h = tape.broadcast_add(tape.matmul(h, ids.weights[l]), ids.biases[l]);
        if (l + 1 < mlp.weights.size()) h = tape.activation(h, mlp.activation);
    }
    return h;
}

Tensor mlp_eval(const MlpParams& mlp, const Tensor& x) {
    Tape tape;
    const int in = tape.leaf(x, false);
    const TapedMlp ids = register_mlp(tape, mlp, false);
    return tape.val(mlp_forward(tape, mlp, ids, in));
}

}  // namespace nolab
