#include "nolab/neuralop.hpp"

#include <cmath>
#include <stdexcept>

#include "nolab/rng.hpp"

namespace nolab {

void NnoConfig::validate() const {
    if (in_channels < 1 || out_channels < 1) throw std::invalid_argument("NnoConfig: channels >= 1");
    if (d_c < 1) throw std::invalid_argument("NnoConfig: d_c >= 1");
    if (L < 1) throw std::invalid_argument("NnoConfig: L >= 1");
    if (K < 0) throw std::invalid_argument("NnoConfig: K >= 0");
    if (decoder == DecoderKind::Linear && J < 1) {
        throw std::invalid_argument("NnoConfig: linear decoder requires J >= 1");
    }
    if (lifting_depth < 0 || projection_depth < 0 || trunk_depth < 0) {
        throw std::invalid_argument("NnoConfig: negative depth");
    }
}

NnoConfig NnoConfig::fno(int in_ch, int out_ch, int d_c, int K, int L) {
    NnoConfig c;
    c.in_channels = in_ch;
    c.out_channels = out_ch;
    c.d_c = d_c;
    c.K = K;
    c.L = L;
    c.basis = BasisKind::Fourier;
    c.activation = Activation::Gelu;
    c.positional_encoding = true;
    c.q_positional = false;
    c.use_W = true;
    return c;
}

NnoConfig NnoConfig::ano(int in_ch, int out_ch, int d_c) {
    NnoConfig c;
    c.in_channels = in_ch;
    c.out_channels = out_ch;
    c.d_c = d_c;
    c.L = 1;
    c.basis = BasisKind::Constant;
    c.K = 0;
    c.activation = Activation::Tanh;
    c.lifting_depth = 1;   // single-hidden-layer R of width d_c
    c.lifting_width = 0;
    c.projection_depth = 1;
    c.projection_width = 0;
    c.positional_encoding = true;
    c.q_positional = true;
    c.use_W = false;
    return c;
}

NnoConfig NnoConfig::local(int in_ch, int out_ch, int d_c, int L) {
    NnoConfig c = fno(in_ch, out_ch, d_c, 0, L);
    c.basis = BasisKind::Local;
    return c;
}

namespace {

int lift_width(const NnoConfig& c) { return c.lifting_width > 0 ? c.lifting_width : c.d_c; }
int proj_width(const NnoConfig& c) {
    return c.projection_width > 0 ? c.projection_width : 2 * c.d_c;
}

std::vector<int> lift_widths(const NnoConfig& c) {
    std::vector<int> w;
    w.push_back(c.in_channels + (c.positional_encoding ? 2 : 0));
    for (int i = 0; i < c.lifting_depth; ++i) w.push_back(lift_width(c));
    w.push_back(c.d_c);
    return w;
}

std::vector<int> proj_widths(const NnoConfig& c) {
    std::vector<int> w;
    w.push_back(c.d_c + (c.q_positional ? 2 : 0));
    for (int i = 0; i < c.projection_depth; ++i) w.push_back(proj_width(c));
    w.push_back(c.out_channels);
    return w;
}

std::vector<int> trunk_widths(const NnoConfig& c) {
    std::vector<int> w;
    w.push_back(2);
    for (int i = 0; i < c.trunk_depth; ++i) w.push_back(c.trunk_width);
    w.push_back(c.J * c.out_channels);
    return w;
}

std::vector<int> basis_weight_shape(const NnoConfig& c) {
    switch (c.basis) {
        case BasisKind::Fourier: {
            const int slots = (2 * c.K + 1) * (2 * c.K + 1);
            return {slots, c.d_c, c.d_c};
        }
        case BasisKind::LaplaceNeumann: {
            const int slots = (c.K + 1) * (c.K + 1);
            return {slots, c.d_c, c.d_c};
        }
        case BasisKind::Constant:
            return {1, c.d_c, c.d_c};
        case BasisKind::Local:
            return {};
    }
    return {};
}

double basis_init_scale(const NnoConfig& c) {
    switch (c.basis) {
        case BasisKind::Fourier: return 1.0 / (double(c.d_c) * (2 * c.K + 1));
        case BasisKind::LaplaceNeumann: return 1.0 / (double(c.d_c) * (c.K + 1));
        default: return 1.0 / double(c.d_c);
    }
}

}  // namespace

NnoModel NnoModel::init(const NnoConfig& config, std::uint64_t seed) {
    config.validate();
    NnoModel m;
    m.config = config;
    m.lift = MlpParams::glorot(lift_widths(config), config.activation, rng::mix(seed) ^ 0x11);
    for (int l = 0; l < config.L; ++l) {
        NnoLayerParams layer;
        std::uint64_t counter = 0;
        const std::uint64_t lseed = rng::mix(seed ^ (0x22 + l));
        if (config.use_W) {
            const double limit = std::sqrt(6.0 / (2.0 * config.d_c));
            layer.W = Tensor({config.d_c, config.d_c});
            for (double& x : layer.W.data) {
                x = limit * (2.0 * rng::uniform(lseed, 1, counter++) - 1.0);
            }
        }
        layer.b = Tensor({1, config.d_c}, 0.0);
        const auto bshape = basis_weight_shape(config);
        if (!bshape.empty()) {
            const double s = basis_init_scale(config);
            layer.basis_weights = Tensor(bshape);
            for (double& x : layer.basis_weights.data) {
                x = s * (2.0 * rng::uniform(lseed, 2, counter++) - 1.0);
            }
        }
        m.layers.push_back(std::move(layer));
    }
    if (config.decoder == DecoderKind::Mlp) {
        m.proj = MlpParams::glorot(proj_widths(config), config.activation, rng::mix(seed) ^ 0x33);
    } else {
        const std::uint64_t dseed = rng::mix(seed ^ 0x44);
        std::uint64_t counter = 0;
        const double limit = std::sqrt(6.0 / (config.d_c + config.J));
        m.dec_B = Tensor({config.d_c, config.J});
        for (double& x : m.dec_B.data) x = limit * (2.0 * rng::uniform(dseed, 3, counter++) - 1.0);
        m.dec_b = Tensor({1, config.J}, 0.0);
        m.trunk = MlpParams::glorot(trunk_widths(config), config.activation, rng::mix(seed) ^ 0x55);
    }
    return m;
}

std::vector<Tensor*> NnoModel::parameters() {
    std::vector<Tensor*> out;
    for (std::size_t l = 0; l < lift.weights.size(); ++l) {
        out.push_back(&lift.weights[l]);
        out.push_back(&lift.biases[l]);
    }
    for (NnoLayerParams& layer : layers) {
        if (config.use_W) out.push_back(&layer.W);
        out.push_back(&layer.b);
        if (!layer.basis_weights.data.empty()) out.push_back(&layer.basis_weights);
    }
    if (config.decoder == DecoderKind::Mlp) {
        for (std::size_t l = 0; l < proj.weights.size(); ++l) {
            out.push_back(&proj.weights[l]);
            out.push_back(&proj.biases[l]);
        }
    } else {
        out.push_back(&dec_B);
        out.push_back(&dec_b);
        for (std::size_t l = 0; l < trunk.weights.size(); ++l) {
            out.push_back(&trunk.weights[l]);
            out.push_back(&trunk.biases[l]);
        }
    }
    return out;
}

std::vector<const Tensor*> NnoModel::parameters() const {
    auto mut = const_cast<NnoModel*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

std::vector<std::string> NnoModel::parameter_names() const {
    std::vector<std::string> names;
    for (std::size_t l = 0; l < lift.weights.size(); ++l) {
        names.push_back("lift.w" + std::to_string(l));
        names.push_back("lift.b" + std::to_string(l));
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (config.use_W) names.push_back("layer" + std::to_string(l) + ".W");
        names.push_back("layer" + std::to_string(l) + ".b");
        if (!layers[l].basis_weights.data.empty()) {
            names.push_back("layer" + std::to_string(l) + ".T");
        }
    }
    if (config.decoder == DecoderKind::Mlp) {
        for (std::size_t l = 0; l < proj.weights.size(); ++l) {
            names.push_back("proj.w" + std::to_string(l));
            names.push_back("proj.b" + std::to_string(l));
        }
    } else {
        names.push_back("dec.B");
        names.push_back("dec.b");
        for (std::size_t l = 0; l < trunk.weights.size(); ++l) {
            names.push_back("trunk.w" + std::to_string(l));
            names.push_back("trunk.b" + std::to_string(l));
        }
    }
    return names;
}

std::size_t NnoModel::param_count() const {
    std::size_t n = 0;
    for (const Tensor* t : parameters()) n += t->numel();
    return n;
}

std::size_t param_count(const NnoConfig& config) {
    return NnoModel::init(config, 0).param_count();
}

std::vector<std::pair<int, int>> budget_pairs(int C) {
    if (C < 4 || (C & (C - 1)) != 0) {
        throw std::invalid_argument("budget_pairs: C must be a power of two >= 4");
    }
    std::vector<std::pair<int, int>> pairs;
    for (int K = 2; C / K >= 2; K *= 2) pairs.emplace_back(C / K, K);
    return pairs;
}

TapedModel register_model(Tape& tape, const NnoModel& model, bool requires_grad) {
    TapedModel ids;
    auto track = [&](int id) {
        ids.param_ids.push_back(id);
        return id;
    };
    for (std::size_t l = 0; l < model.lift.weights.size(); ++l) {
        ids.lift.weights.push_back(track(tape.leaf(model.lift.weights[l], requires_grad)));
        ids.lift.biases.push_back(track(tape.leaf(model.lift.biases[l], requires_grad)));
    }
    for (const NnoLayerParams& layer : model.layers) {
        TapedModel::Layer lid;
        if (model.config.use_W) lid.W = track(tape.leaf(layer.W, requires_grad));
        lid.b = track(tape.leaf(layer.b, requires_grad));
        if (!layer.basis_weights.data.empty()) {
            lid.basis = track(tape.leaf(layer.basis_weights, requires_grad));
        }
        ids.layers.push_back(lid);
    }
    if (model.config.decoder == DecoderKind::Mlp) {
        for (std::size_t l = 0; l < model.proj.weights.size(); ++l) {
            ids.proj.weights.push_back(track(tape.leaf(model.proj.weights[l], requires_grad)));
            ids.proj.biases.push_back(track(tape.leaf(model.proj.biases[l], requires_grad)));
        }
    } else {
        ids.dec_B = track(tape.leaf(model.dec_B, requires_grad));
        ids.dec_b = track(tape.leaf(model.dec_b, requires_grad));
        for (std::size_t l = 0; l < model.trunk.weights.size(); ++l) {
            ids.trunk.weights.push_back(track(tape.leaf(model.trunk.weights[l], requires_grad)));
            ids.trunk.biases.push_back(track(tape.leaf(model.trunk.biases[l], requires_grad)));
        }
    }
    return ids;
}

Tensor lifting_input(const NnoModel& model, const Field& u) {
    if (u.channels != model.config.in_channels) {
        throw std::invalid_argument("lift: input channel count does not match config");
    }
    const int n = int(u.grid.num_points());
    const int c = u.channels;
    if (!model.config.positional_encoding) {
        Tensor t({n, c});
        t.data = u.data;
        return t;
    }
    const Field xy = coords_field(u.grid);
    Tensor t({n, c + 2});
    for (int p = 0; p < n; ++p) {
        for (int ch = 0; ch < c; ++ch) t.data[std::size_t(p) * (c + 2) + ch] = u.data[std::size_t(p) * c + ch];
        t.data[std::size_t(p) * (c + 2) + c] = xy.data[std::size_t(p) * 2];
        t.data[std::size_t(p) * (c + 2) + c + 1] = xy.data[std::size_t(p) * 2 + 1];
    }
    return t;
}

namespace {

int layer_forward_on_tape(Tape& tape, const NnoModel& model, const TapedModel::Layer& lid,
                          int v, const Grid2D& grid) {
    const NnoConfig& c = model.config;
    const int n = int(grid.num_points());

    int nonlocal_2d = -1;   // [N, d]
    int nonlocal_row = -1;  // [1, d]
    switch (c.basis) {
        case BasisKind::Fourier: {
            SpectralConvSpec spec{grid, c.K, c.d_c, c.d_c};
            nonlocal_2d = tape.spectral_conv(v, lid.basis, spec);
            break;
        }
        case BasisKind::LaplaceNeumann: {
            CosineConvSpec spec{grid, c.K, c.d_c, c.d_c};
            nonlocal_2d = tape.cosine_conv(v, lid.basis, spec);
            break;
        }
        case BasisKind::Constant: {
            // T * mean(v). T is stored [d_out, d_in] like the conv multipliers,
            // so the row-vector form multiplies by its transpose.
            const int tmat = tape.transpose(tape.reshape(lid.basis, {c.d_c, c.d_c}));
            nonlocal_row = tape.matmul(tape.mean_rows(v), tmat);
            break;
        }
        case BasisKind::Local:
            break;
    }

    int row_term = lid.b;
    if (nonlocal_row >= 0) row_term = tape.add(nonlocal_row, lid.b);

    int pre;
    if (c.use_W) {
        int pointwise = tape.matmul(v, lid.W);
        if (nonlocal_2d >= 0) pointwise = tape.add(pointwise, nonlocal_2d);
        pre = tape.broadcast_add(pointwise, row_term);
    } else if (nonlocal_2d >= 0) {
        pre = tape.broadcast_add(nonlocal_2d, row_term);
    } else {
        pre = tape.tile_rows(row_term, n);
    }
    return tape.activation(pre, c.activation);
}

int decoder_forward_on_tape(Tape& tape, const NnoModel& model, const TapedModel& ids, int v,
                            const Grid2D& grid) {
    const NnoConfig& c = model.config;
    if (c.decoder == DecoderKind::Mlp) {
        int qin = v;
        if (c.q_positional) {
            const int coords = tape.leaf(Tensor::from_field(coords_field(grid)), false);
            qin = tape.concat_cols(v, coords);
        }
        return mlp_forward(tape, model.proj, ids.proj, qin);
    }
    // Linear(J) decoder: beta = B * encoded + b, output = sum_j beta_j tau_j(x).
    const int mean_row = tape.mean_rows(v);
    const int beta = tape.broadcast_add(tape.matmul(mean_row, ids.dec_B), ids.dec_b);
    const int coords = tape.leaf(Tensor::from_field(coords_field(grid)), false);
    const int tau = mlp_forward(tape, model.trunk, ids.trunk, coords);
    return tape.trunk_combine(tau, beta, c.out_channels);
}

}  // namespace

int model_forward_on_tape(Tape& tape, const NnoModel& model, const TapedModel& ids,
                          const Field& u) {
    model.config.validate();
    const int input = tape.leaf(lifting_input(model, u), false);
    int v = mlp_forward(tape, model.lift, ids.lift, input);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        v = layer_forward_on_tape(tape, model, ids.layers[l], v, u.grid);
    }
    return decoder_forward_on_tape(tape, model, ids, v, u.grid);
}

Field model_forward(const NnoModel& model, const Field& u) {
    Tape tape;
    const TapedModel ids = register_model(tape, model, false);
    const int out = model_forward_on_tape(tape, model, ids, u);
    Field f = tape.val(out).to_field(u.grid);
    check_finite(f, "model_forward");
    return f;
}

Field ano_forward(const NnoModel& model, const Field& u) {
    const NnoConfig& c = model.config;
    if (c.L != 1 || c.basis != BasisKind::Constant || c.use_W) {
        throw std::invalid_argument(
            "ano_forward: config must be L = 1, constant basis, use_W = false");
    }
    return model_forward(model, u);
}

Field fno_forward(const NnoModel& model, const Field& u) {
    if (model.config.basis != BasisKind::Fourier) {
        throw std::invalid_argument("fno_forward: config basis must be fourier");
    }
    return model_forward(model, u);
}

Tensor lift(const NnoModel& model, const Field& u) {
    Tape tape;
    const TapedModel ids = register_model(tape, model, false);
    const int input = tape.leaf(lifting_input(model, u), false);
    return tape.val(mlp_forward(tape, model.lift, ids.lift, input));
}

Tensor nno_layer(const NnoModel& model, int layer_index, const Tensor& v, const Grid2D& grid) {
    if (layer_index < 0 || layer_index >= int(model.layers.size())) {
        throw std::invalid_argument("nno_layer: layer index out of range");
    }
    Tape tape;
    const TapedModel ids = register_model(tape, model, false);
    const int vid = tape.leaf(v, false);
    return tape.val(layer_forward_on_tape(tape, model, ids.layers[layer_index], vid, grid));
}

Field project(const NnoModel& model, const Tensor& v, const Grid2D& grid) {
    Tape tape;
    const TapedModel ids = register_model(tape, model, false);
    const int vid = tape.leaf(v, false);
    const int out = decoder_forward_on_tape(tape, model, ids, vid, grid);
    return tape.val(out).to_field(grid);
}

Tensor encode_average(const NnoModel& model, const Tensor& lifting_rows) {
    const NnoConfig& c = model.config;
    if (c.L != 1 || c.basis != BasisKind::Constant || c.use_W) {
        throw std::invalid_argument("encode_average: strict-ANO config required");
    }
    Tape tape;
    const TapedModel ids = register_model(tape, model, false);
    const int input = tape.leaf(lifting_rows, false);
    const int lifted = mlp_forward(tape, model.lift, ids.lift, input);
    const int tmat = tape.transpose(tape.reshape(ids.layers[0].basis, {c.d_c, c.d_c}));
    const int pre = tape.add(tape.matmul(tape.mean_rows(lifted), tmat), ids.layers[0].b);
    return tape.val(tape.activation(pre, c.activation));
}

}  // namespace nolab
