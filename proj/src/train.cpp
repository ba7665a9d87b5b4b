#include "nolab/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "nolab/spectral.hpp"

namespace nolab {

void TrainConfig::validate() const {
    if (!(lr0 > 0.0)) throw std::invalid_argument("TrainConfig: lr0 must be positive");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size >= 1");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs >= 0");
    if (threads < 1) throw std::invalid_argument("TrainConfig: threads >= 1");
}

Normalizer Normalizer::fit(const Dataset& train) {
    train.validate();
    Normalizer n;
    const int cin = train.inputs[0].channels;
    const int cout = train.outputs[0].channels;
    const double count = double(train.size());
    n.in_mean = Field(train.grid, cin, 0.0);
    n.out_mean = Field(train.grid, cout, 0.0);
    for (std::size_t s = 0; s < train.size(); ++s) {
        for (std::size_t k = 0; k < n.in_mean.data.size(); ++k) {
            n.in_mean.data[k] += train.inputs[s].data[k] / count;
        }
        for (std::size_t k = 0; k < n.out_mean.data.size(); ++k) {
            n.out_mean.data[k] += train.outputs[s].data[k] / count;
        }
    }
    n.in_std = Field(train.grid, cin, 0.0);
    n.out_std = Field(train.grid, cout, 0.0);
    for (std::size_t s = 0; s < train.size(); ++s) {
        for (std::size_t k = 0; k < n.in_std.data.size(); ++k) {
            const double d = train.inputs[s].data[k] - n.in_mean.data[k];
            n.in_std.data[k] += d * d / count;
        }
        for (std::size_t k = 0; k < n.out_std.data.size(); ++k) {
            const double d = train.outputs[s].data[k] - n.out_mean.data[k];
            n.out_std.data[k] += d * d / count;
        }
    }
    for (double& v : n.in_std.data) v = std::sqrt(v);
    for (double& v : n.out_std.data) v = std::sqrt(v);
    return n;
}

Normalizer Normalizer::disabled() {
    Normalizer n;
    n.enabled = false;
    return n;
}

Field Normalizer::normalize_input(const Field& f) const {
    if (!enabled) return f;
    Field out = f;
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        out.data[k] = (out.data[k] - in_mean.data[k]) / (in_std.data[k] + eps);
    }
    return out;
}

Field Normalizer::normalize_output(const Field& f) const {
    if (!enabled) return f;
    Field out = f;
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        out.data[k] = (out.data[k] - out_mean.data[k]) / (out_std.data[k] + eps);
    }
    return out;
}

Field Normalizer::denormalize_output(const Field& f) const {
    if (!enabled) return f;
    Field out = f;
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        out.data[k] = out.data[k] * (out_std.data[k] + eps) + out_mean.data[k];
    }
    return out;
}

double cosine_lr(double lr0, int step, int total) {
    if (step < 0 || step > total || total <= 0) {
        throw std::invalid_argument("cosine_lr: step must lie in [0, total]");
    }
    return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * double(step) / double(total)));
}

AdamState AdamState::init(const std::vector<Tensor*>& params) {
    AdamState s;
    for (const Tensor* p : params) {
        s.m.emplace_back(p->shape, 0.0);
        s.v.emplace_back(p->shape, 0.0);
    }
    return s;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr, double weight_decay, bool coupled_wd) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw std::invalid_argument("adam_step: parameter/gradient count mismatch");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, double(state.t));
    const double bc2 = 1.0 - std::pow(beta2, double(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& w = *params[p];
        const Tensor& g = grads[p];
        if (w.shape != g.shape) throw std::invalid_argument("adam_step: gradient shape mismatch");
        for (std::size_t i = 0; i < w.data.size(); ++i) {
            double gi = g.data[i];
            if (!std::isfinite(gi)) {
                throw std::runtime_error("adam_step: non-finite gradient in parameter " +
                                         std::to_string(p));
            }
            if (coupled_wd) {
                gi += weight_decay * w.data[i];
            } else if (weight_decay != 0.0) {
                w.data[i] -= lr * weight_decay * w.data[i];
            }
            state.m[p].data[i] = beta1 * state.m[p].data[i] + (1.0 - beta1) * gi;
            state.v[p].data[i] = beta2 * state.v[p].data[i] + (1.0 - beta2) * gi * gi;
            const double mhat = state.m[p].data[i] / bc1;
            const double vhat = state.v[p].data[i] / bc2;
            w.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

namespace {

struct SampleGrads {
    double loss = 0.0;
    std::vector<Tensor> grads;
};

// MSE + gradients of one normalized sample. Independent per sample, so batch
// members can run on worker threads; results are merged in index order.
SampleGrads sample_backward(const NnoModel& model, const Field& in_n, const Field& out_n) {
    Tape tape;
    const TapedModel ids = register_model(tape, model, true);
    const int pred = model_forward_on_tape(tape, model, ids, in_n);
    const int target = tape.leaf(Tensor::from_field(out_n), false);
    const int diff = tape.sub(pred, target);
    const int loss = tape.mean_all(tape.mul(diff, diff));
    SampleGrads sg;
    sg.loss = tape.val(loss).data[0];
    sg.grads = grad(tape, loss, ids.param_ids);
    return sg;
}

}  // namespace

FitResult fit(NnoModel& model, const Dataset& train, const Dataset& test,
              const TrainConfig& cfg, const Normalizer& norm) {
    cfg.validate();
    train.validate();
    FitResult result;
    if (cfg.epochs == 0) return result;

    // Normalize once up front.
    std::vector<Field> in_n, out_n;
    in_n.reserve(train.size());
    out_n.reserve(train.size());
    for (std::size_t s = 0; s < train.size(); ++s) {
        in_n.push_back(norm.normalize_input(train.inputs[s]));
        out_n.push_back(norm.normalize_output(train.outputs[s]));
    }

    std::vector<Tensor*> params = model.parameters();
    AdamState state = AdamState::init(params);
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 shuffler(cfg.seed ^ 0x5eedULL);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_lr(cfg.lr0, epoch, cfg.epochs);
        if (cfg.shuffle) std::shuffle(order.begin(), order.end(), shuffler);

        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t bend = std::min(order.size(), start + cfg.batch_size);
            const int bsize = int(bend - start);
            std::vector<SampleGrads> slots(bsize);
            auto worker = [&](int tid) {
                for (int s = tid; s < bsize; s += cfg.threads) {
                    const std::size_t idx = order[start + s];
                    slots[s] = sample_backward(model, in_n[idx], out_n[idx]);
                }
            };
            if (cfg.threads == 1) {
                worker(0);
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker, t);
                for (auto& th : pool) th.join();
            }

            // Deterministic merge in sample order regardless of thread count.
            double batch_loss = slots[0].loss;
            std::vector<Tensor> grads = std::move(slots[0].grads);
            for (int s = 1; s < bsize; ++s) {
                batch_loss += slots[s].loss;
                for (std::size_t p = 0; p < grads.size(); ++p) {
                    for (std::size_t i = 0; i < grads[p].data.size(); ++i) {
                        grads[p].data[i] += slots[s].grads[p].data[i];
                    }
                }
            }
            batch_loss /= bsize;
            for (auto& gt : grads) {
                for (double& v : gt.data) v /= bsize;
            }

            if (!std::isfinite(batch_loss) || batch_loss > 1e6) {
                result.diverged = true;
                return result;
            }
            adam_step(params, grads, state, lr, cfg.weight_decay, cfg.coupled_wd);
            epoch_loss += batch_loss;
            ++batches;
        }

        EpochRow row;
        row.epoch = epoch;
        row.lr = lr;
        row.train_mse = epoch_loss / std::max(1, batches);
        row.test_rel_l2 = test.size() > 0 ? evaluate(model, test, norm).mean_rel_l2 : 0.0;
        result.history.push_back(row);
    }
    return result;
}

EvalResult evaluate(const NnoModel& model, const Dataset& ds, const Normalizer& norm) {
    ds.validate();
    EvalResult res;
    res.per_sample.reserve(ds.size());
    for (std::size_t s = 0; s < ds.size(); ++s) {
        const Field pred_n = model_forward(model, norm.normalize_input(ds.inputs[s]));
        const Field pred = norm.denormalize_output(pred_n);
        res.per_sample.push_back(rel_l2_error(pred, ds.outputs[s]));
    }
    for (double e : res.per_sample) res.mean_rel_l2 += e;
    res.mean_rel_l2 /= double(res.per_sample.size());
    return res;
}

double fourier_truncation_baseline(const Dataset& ds, int K, const Normalizer* norm) {
    ds.validate();
    double sum = 0.0;
    for (std::size_t s = 0; s < ds.size(); ++s) {
        const Field& truth = ds.outputs[s];
        Field projected;
        if (norm != nullptr && norm->enabled) {
            projected = norm->denormalize_output(truncate_modes(norm->normalize_output(truth), K));
        } else {
            projected = truncate_modes(truth, K);
        }
        sum += rel_l2_error(projected, truth);
    }
    return sum / double(ds.size());
}

}  // namespace nolab
