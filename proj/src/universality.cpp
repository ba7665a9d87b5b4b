#include "nolab/universality.hpp"

#include <algorithm>
#include <random>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "nolab/spectral.hpp"

namespace nolab {

FunctionalTarget FunctionalTarget::linear(Field xi) {
    FunctionalTarget t;
    t.kind = Kind::Linear;
    t.xi = std::move(xi);
    return t;
}

FunctionalTarget FunctionalTarget::energy() {
    FunctionalTarget t;
    t.kind = Kind::Energy;
    return t;
}

FunctionalTarget FunctionalTarget::max_smooth() {
    FunctionalTarget t;
    t.kind = Kind::MaxSmooth;
    return t;
}

double FunctionalTarget::operator()(const Field& u) const {
    switch (kind) {
        case Kind::Linear:
            return inner_product(u, xi);
        case Kind::Energy: {
            double s = 0.0;
            for (double v : u.data) s += v * v;
            return s / double(u.data.size());
        }
        case Kind::MaxSmooth: {
            double s = 0.0;
            for (double v : u.data) s += std::exp(v);
            return std::log(s / double(u.data.size()));
        }
    }
    throw std::logic_error("FunctionalTarget: unknown kind");
}

Field sample_compact_input(const Grid2D& grid, std::uint64_t seed, std::uint64_t index,
                           int band_limit) {
    GrfSpec spec;
    spec.basis = GrfBasis::PeriodicFourier;
    spec.tau_sq = 9.0;
    spec.power = 2.0;
    spec.seed = seed;
    spec.include_mean_mode = false;
    Field u = truncate_modes(sample_grf_one(spec, grid, index), band_limit);
    for (double& v : u.data) v = std::clamp(v, -3.0, 3.0);
    return u;
}

namespace {

// Scalar-target training loop for the averaged-functional architecture.
// The graph is q1(sigma(T mean R(u, x) + b)) evaluated once per sample, so it
// avoids materializing a grid-wide projection.
struct ScalarSample {
    Tensor lift_rows;  // [N, in(+2)]
    double target = 0.0;
};

double scalar_forward_backward(NnoModel& model, const ScalarSample& s,
                               std::vector<Tensor>* grads_out) {
    Tape tape;
    const TapedModel ids = register_model(tape, model, grads_out != nullptr);
    const int input = tape.leaf(s.lift_rows, false);
    const int lifted = mlp_forward(tape, model.lift, ids.lift, input);
    const int tmat =
        tape.transpose(tape.reshape(ids.layers[0].basis, {model.config.d_c, model.config.d_c}));
    const int pre = tape.add(tape.matmul(tape.mean_rows(lifted), tmat), ids.layers[0].b);
    const int code = tape.activation(pre, model.config.activation);
    const int out = mlp_forward(tape, model.proj, ids.proj, code);  // [1, 1]
    const int target = tape.leaf(Tensor({1, 1}, s.target), false);
    const int diff = tape.sub(out, target);
    const int loss = tape.mean_all(tape.mul(diff, diff));
    if (grads_out) *grads_out = grad(tape, loss, ids.param_ids);
    return tape.val(loss).data[0];
}

double scalar_predict(const NnoModel& model, const Tensor& lift_rows) {
    const Tensor code = encode_average(model, lift_rows);
    return mlp_eval(model.proj, code).data[0];
}

}  // namespace

AvgFunctionalResult train_functional_average(const FunctionalTarget& target,
                                             const GrfSpec& grf, const Grid2D& grid, int d_c,
                                             int n_train, int n_test, const TrainConfig& cfg) {
    cfg.validate();
    // The product structure u * xi(x) inside R is hard to reach by gradient
    // descent from a narrow single-hidden-layer tanh start; a two-hidden-layer
    // GeLU lift crosses the feature-learning plateau reliably within the desk
    // budget. GeLU satisfies the smoothness assumptions of the architecture.
    NnoConfig mc = NnoConfig::ano(1, 1, d_c);
    mc.q_positional = false;  // q1 sees only the encoded vector
    mc.activation = Activation::Gelu;
    mc.lifting_depth = 2;
    mc.lifting_width = 2 * d_c;
    AvgFunctionalResult res;
    res.model = NnoModel::init(mc, cfg.seed);

    // Standardize the inputs (scalar amplitude) and targets from the train
    // split; the relative error metric is invariant to both.
    double u_scale = 0.0;
    {
        double acc = 0.0;
        std::size_t cnt = 0;
        const int probe = std::min(n_train, 32);
        for (int i = 0; i < probe; ++i) {
            const Field u = sample_grf_one(grf, grid, i);
            for (double v : u.data) acc += v * v;
            cnt += u.data.size();
        }
        u_scale = std::max(std::sqrt(acc / double(cnt)), 1e-12);
    }

    std::vector<ScalarSample> train(n_train), test(n_test);
    double t_mean = 0.0, t_var = 0.0;
    for (int i = 0; i < n_train + n_test; ++i) {
        Field u = sample_grf_one(grf, grid, i);
        const double t = target(u);
        for (double& v : u.data) v /= u_scale;
        ScalarSample sample;
        sample.lift_rows = lifting_input(res.model, u);
        sample.target = t;
        if (i < n_train) {
            t_mean += t / n_train;
            train[i] = std::move(sample);
        } else {
            test[i - n_train] = std::move(sample);
        }
    }
    for (const ScalarSample& s : train) {
        t_var += (s.target - t_mean) * (s.target - t_mean) / n_train;
    }
    const double t_scale = std::max(std::sqrt(t_var), 1e-12);
    for (ScalarSample& s : train) s.target = (s.target - t_mean) / t_scale;

    std::vector<Tensor*> params = res.model.parameters();
    AdamState state = AdamState::init(params);
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 shuffler(cfg.seed ^ 0x5eedULL);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_lr(cfg.lr0, epoch, cfg.epochs);
        if (cfg.shuffle) std::shuffle(order.begin(), order.end(), shuffler);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t bend = std::min(order.size(), start + cfg.batch_size);
            const int bsize = int(bend - start);
            std::vector<std::vector<Tensor>> slot_grads(bsize);
            std::vector<double> slot_loss(bsize);
            auto worker = [&](int tid) {
                for (int s = tid; s < bsize; s += cfg.threads) {
                    slot_loss[s] = scalar_forward_backward(res.model, train[order[start + s]],
                                                           &slot_grads[s]);
                }
            };
            if (cfg.threads == 1) {
                worker(0);
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker, t);
                for (auto& th : pool) th.join();
            }
            double loss = slot_loss[0];
            std::vector<Tensor> acc = std::move(slot_grads[0]);
            for (int s = 1; s < bsize; ++s) {
                loss += slot_loss[s];
                for (std::size_t p = 0; p < acc.size(); ++p) {
                    for (std::size_t k = 0; k < acc[p].data.size(); ++k) {
                        acc[p].data[k] += slot_grads[s][p].data[k];
                    }
                }
            }
            loss /= bsize;
            for (auto& g : acc) {
                for (double& v : g.data) v /= bsize;
            }
            if (!std::isfinite(loss) || loss > 1e6) {
                res.diverged = true;
                return res;
            }
            adam_step(params, acc, state, lr, cfg.weight_decay, cfg.coupled_wd);
        }
    }

    double mae = 0.0, var = 0.0;
    double test_mean = 0.0;
    for (const ScalarSample& s : test) test_mean += s.target / n_test;
    for (const ScalarSample& s : test) {
        const double pred = t_mean + t_scale * scalar_predict(res.model, s.lift_rows);
        mae += std::abs(pred - s.target) / double(n_test);
        var += (s.target - test_mean) * (s.target - test_mean) / double(n_test);
    }
    res.heldout_rel_mae = mae / std::max(std::sqrt(var), 1e-12);
    return res;
}

NnoConfig encoder_decoder_config(int in_channels, int out_channels, int d_c, int J) {
    NnoConfig mc = NnoConfig::ano(in_channels, out_channels, d_c);
    mc.activation = Activation::Gelu;
    mc.lifting_depth = 2;
    mc.lifting_width = d_c;
    mc.decoder = DecoderKind::Linear;
    mc.J = J;
    mc.trunk_depth = 2;
    mc.trunk_width = 32;
    return mc;
}

EncoderDecoderResult encoder_decoder_fit(const Dataset& ds, int n_train, int J, int d_c,
                                         const TrainConfig& cfg) {
    if (J < 1) throw std::invalid_argument("encoder_decoder_fit: J must be >= 1");
    if (n_train < 1 || std::size_t(n_train) >= ds.size()) {
        throw std::invalid_argument("encoder_decoder_fit: bad train split");
    }
    const NnoConfig mc =
        encoder_decoder_config(ds.inputs[0].channels, ds.outputs[0].channels, d_c, J);

    Dataset train = ds, test = ds;
    train.inputs.assign(ds.inputs.begin(), ds.inputs.begin() + n_train);
    train.outputs.assign(ds.outputs.begin(), ds.outputs.begin() + n_train);
    test.inputs.assign(ds.inputs.begin() + n_train, ds.inputs.end());
    test.outputs.assign(ds.outputs.begin() + n_train, ds.outputs.end());

    EncoderDecoderResult res;
    res.model = NnoModel::init(mc, cfg.seed);
    // Raw fields: a rank-one target has pointwise std proportional to |eta(x)|,
    // so pointwise normalization would make the normalized target discontinuous
    // across the zero set of eta.
    const Normalizer norm = Normalizer::disabled();
    const FitResult fr = fit(res.model, train, test, cfg, norm);
    res.diverged = fr.diverged;
    res.test_rel_l2 = fr.history.empty() ? 1e9 : fr.history.back().test_rel_l2;
    return res;
}

Field circular_shift(const Field& f, int cells_x, int cells_y) {
    const int nx = f.grid.nx, ny = f.grid.ny;
    Field out(f.grid, f.channels);
    for (int j = 0; j < ny; ++j) {
        const int js = ((j + cells_y) % ny + ny) % ny;
        for (int i = 0; i < nx; ++i) {
            const int is = ((i + cells_x) % nx + nx) % nx;
            for (int ch = 0; ch < f.channels; ++ch) out.at(i, j, ch) = f.at(is, js, ch);
        }
    }
    return out;
}

Dataset make_shift_dataset(const Grid2D& grid, int n, std::uint64_t seed, double hx, double hy,
                           int band_limit) {
    const double cx = hx / grid.dx();
    const double cy = hy / grid.dy();
    const int icx = int(std::lround(cx)), icy = int(std::lround(cy));
    if (std::abs(cx - icx) > 1e-9 || std::abs(cy - icy) > 1e-9) {
        throw std::invalid_argument("make_shift_dataset: shift is not grid-aligned");
    }
    Dataset ds;
    ds.task = Task::DarcyPc;  // placeholder task tag; metadata only
    ds.grid = grid;
    ds.seed = seed;
    ds.grf.basis = GrfBasis::PeriodicFourier;
    ds.grf.seed = seed;
    ds.grf.include_mean_mode = false;
    for (int i = 0; i < n; ++i) {
        Field u = sample_compact_input(grid, seed, i, band_limit);
        ds.inputs.push_back(u);
        ds.outputs.push_back(circular_shift(u, icx, icy));
    }
    return ds;
}

namespace {

// Scale selected input columns of an MLP's first weight matrix. Used to start
// coordinate pathways at O(2 pi) frequencies; Glorot-scale coordinate weights
// cover less than one trig period and the trainers stall on their spectral
// bias otherwise.
void scale_input_columns(MlpParams& mlp, int first, int count, double factor) {
    Tensor& w = mlp.weights[0];
    const int in = w.shape[0], out = w.shape[1];
    for (int r = first; r < first + count; ++r) {
        for (int c = 0; c < out; ++c) w.data[std::size_t(r) * out + c] *= factor;
    }
}

void split_shift(const Dataset& all, int n_train, Dataset& train, Dataset& test) {
    train = all;
    test = all;
    train.inputs.assign(all.inputs.begin(), all.inputs.begin() + n_train);
    train.outputs.assign(all.outputs.begin(), all.outputs.begin() + n_train);
    test.inputs.assign(all.inputs.begin() + n_train, all.inputs.end());
    test.outputs.assign(all.outputs.begin() + n_train, all.outputs.end());
}

}  // namespace

double train_shift_ano(const Grid2D& grid, double hx, double hy, int band_limit, int d_c,
                       int n_train, int n_test, const TrainConfig& cfg) {
    const Dataset all = make_shift_dataset(grid, n_train + n_test, 3, hx, hy, band_limit);
    Dataset train, test;
    split_shift(all, n_train, train, test);
    const Normalizer norm = Normalizer::fit(train);

    NnoConfig mc = NnoConfig::ano(1, 1, d_c);
    mc.activation = Activation::Gelu;
    mc.lifting_depth = 2;
    mc.lifting_width = d_c;
    mc.decoder = DecoderKind::Linear;
    mc.J = 12;
    mc.trunk_depth = 2;
    mc.trunk_width = 64;
    NnoModel m = NnoModel::init(mc, cfg.seed);
    scale_input_columns(m.lift, 1, 2, 8.0);   // coordinate columns
    scale_input_columns(m.lift, 0, 1, 3.0);   // input-value column
    scale_input_columns(m.trunk, 0, 2, 8.0);
    const FitResult fr = fit(m, train, test, cfg, norm);
    if (fr.diverged) return 1e9;
    return evaluate(m, test, norm).mean_rel_l2;
}

double train_shift_local(const Grid2D& grid, double hx, double hy, int band_limit, int n_train,
                         int n_test, const TrainConfig& cfg) {
    const Dataset all = make_shift_dataset(grid, n_train + n_test, 3, hx, hy, band_limit);
    Dataset train, test;
    split_shift(all, n_train, train, test);
    const Normalizer norm = Normalizer::fit(train);
    NnoConfig lc = NnoConfig::local(1, 1, 16, 2);
    NnoModel local = NnoModel::init(lc, cfg.seed);
    fit(local, train, test, cfg, norm);
    return evaluate(local, test, norm).mean_rel_l2;
}

ShiftDemoResult shift_demo(const Grid2D& grid, double hx, double hy, int band_limit,
                           int n_train, int n_test, int d_c_ano, const TrainConfig& cfg) {
    ShiftDemoResult res;
    res.local_rel_l2 = train_shift_local(grid, hx, hy, band_limit, n_train, n_test, cfg);
    res.ano_rel_l2 = train_shift_ano(grid, hx, hy, band_limit, d_c_ano, n_train, n_test, cfg);
    return res;
}

}  // namespace nolab
