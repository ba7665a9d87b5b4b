// Command-line surface of the operator-learning lab: dataset generation,
// training, evaluation, budget sweeps, truncation baselines, and the
// universality demos. Configs are JSON; bulk data uses the NODS/NOCK formats.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "nolab/io.hpp"
#include "nolab/neuralop.hpp"
#include "nolab/pde.hpp"
#include "nolab/train.hpp"
#include "nolab/universality.hpp"

using namespace nolab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
        }
    }
}

struct ExperimentConfig {
    Task task = Task::DarcyPc;
    int grid_n = 64;
    GrfSpec grf;
    TaskParams params;
    int model_L = 4;
    std::string model_activation = "gelu";
    TrainConfig train;
    bool normalize = true;
    std::vector<int> c_list = {32};
    std::vector<int> k_list;  // empty: every budget pair
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    int n_train = 160;
    int n_test = 40;
    std::uint64_t data_seed = 1;
    std::string output_dir = "out";

    static ExperimentConfig from_json(const json& j);
    json to_json() const;
};

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    reject_unknown_keys(j, {"task", "grid", "grf", "solver", "model", "train", "sweep", "seeds",
                            "n_train", "n_test", "data_seed", "output_dir"},
                        "top level");
    ExperimentConfig c;
    if (j.contains("task")) c.task = task_from_name(j.at("task").get<std::string>());
    if (j.contains("grid")) {
        reject_unknown_keys(j.at("grid"), {"n"}, "grid");
        c.grid_n = j.at("grid").value("n", c.grid_n);
    }
    if (j.contains("grf")) {
        reject_unknown_keys(j.at("grf"), {"tau_sq", "power"}, "grf");
        c.grf.tau_sq = j.at("grf").value("tau_sq", 9.0);
        c.grf.power = j.at("grf").value("power", 2.0);
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        reject_unknown_keys(s, {"tol", "omega", "re", "forcing_n", "h", "dt", "burn_in",
                                "pairs_per_traj"},
                            "solver");
        c.params.solver_tol = s.value("tol", c.params.solver_tol);
        c.params.helmholtz_omega = s.value("omega", c.params.helmholtz_omega);
        c.params.kolmogorov_re = s.value("re", c.params.kolmogorov_re);
        c.params.kolmogorov_forcing_n = s.value("forcing_n", c.params.kolmogorov_forcing_n);
        c.params.kolmogorov_h = s.value("h", c.params.kolmogorov_h);
        c.params.kolmogorov_dt = s.value("dt", c.params.kolmogorov_dt);
        c.params.kolmogorov_burn_in = s.value("burn_in", c.params.kolmogorov_burn_in);
        c.params.kolmogorov_pairs_per_traj =
            s.value("pairs_per_traj", c.params.kolmogorov_pairs_per_traj);
    }
    if (j.contains("model")) {
        const json& m = j.at("model");
        reject_unknown_keys(m, {"L", "activation"}, "model");
        c.model_L = m.value("L", 4);
        c.model_activation = m.value("activation", std::string("gelu"));
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        reject_unknown_keys(t, {"epochs", "batch_size", "lr0", "weight_decay", "shuffle",
                                "coupled_wd", "threads", "normalize"},
                            "train");
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.batch_size = t.value("batch_size", c.train.batch_size);
        c.train.lr0 = t.value("lr0", c.train.lr0);
        c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
        c.train.shuffle = t.value("shuffle", true);
        c.train.coupled_wd = t.value("coupled_wd", false);
        c.train.threads = t.value("threads", 2);
        c.normalize = t.value("normalize", true);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        reject_unknown_keys(s, {"C_list", "K_list"}, "sweep");
        if (s.contains("C_list")) c.c_list = s.at("C_list").get<std::vector<int>>();
        if (s.contains("K_list")) c.k_list = s.at("K_list").get<std::vector<int>>();
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.n_train = j.value("n_train", c.n_train);
    c.n_test = j.value("n_test", c.n_test);
    c.data_seed = j.value("data_seed", c.data_seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    return c;
}

json ExperimentConfig::to_json() const {
    return json{
        {"task", task_name(task)},
        {"grid", {{"n", grid_n}}},
        {"grf", {{"tau_sq", grf.tau_sq}, {"power", grf.power}}},
        {"solver",
         {{"tol", params.solver_tol},
          {"omega", params.helmholtz_omega},
          {"re", params.kolmogorov_re},
          {"forcing_n", params.kolmogorov_forcing_n},
          {"h", params.kolmogorov_h},
          {"dt", params.kolmogorov_dt},
          {"burn_in", params.kolmogorov_burn_in},
          {"pairs_per_traj", params.kolmogorov_pairs_per_traj}}},
        {"model", {{"L", model_L}, {"activation", model_activation}}},
        {"train",
         {{"epochs", train.epochs},
          {"batch_size", train.batch_size},
          {"lr0", train.lr0},
          {"weight_decay", train.weight_decay},
          {"shuffle", train.shuffle},
          {"coupled_wd", train.coupled_wd},
          {"threads", train.threads},
          {"normalize", normalize}}},
        {"sweep", {{"C_list", c_list}, {"K_list", k_list}}},
        {"seeds", seeds},
        {"n_train", n_train},
        {"n_test", n_test},
        {"data_seed", data_seed},
        {"output_dir", output_dir}};
}

void split_dataset(const Dataset& all, int n_train, Dataset& train, Dataset& test) {
    if (n_train < 1 || std::size_t(n_train) >= all.size()) {
        throw std::runtime_error("split: n_train must lie in [1, n_samples)");
    }
    train = all;
    test = all;
    train.inputs.assign(all.inputs.begin(), all.inputs.begin() + n_train);
    train.outputs.assign(all.outputs.begin(), all.outputs.begin() + n_train);
    test.inputs.assign(all.inputs.begin() + n_train, all.inputs.end());
    test.outputs.assign(all.outputs.begin() + n_train, all.outputs.end());
}

Dataset load_or_generate(const ExperimentConfig& cfg, const std::string& cache_dir) {
    const std::string name = "data_" + task_name(cfg.task) + "_" + std::to_string(cfg.grid_n) +
                             "_" + std::to_string(cfg.n_train + cfg.n_test) + "_s" +
                             std::to_string(cfg.data_seed) + ".nods";
    const fs::path path = fs::path(cache_dir) / name;
    if (fs::exists(path)) {
        std::printf("[data] reusing %s\n", path.string().c_str());
        return io::load_dataset(path.string());
    }
    std::printf("[data] generating %d samples of %s at %d^2 ...\n", cfg.n_train + cfg.n_test,
                task_name(cfg.task).c_str(), cfg.grid_n);
    std::fflush(stdout);
    const Grid2D grid = default_grid(cfg.task, cfg.grid_n);
    Dataset ds = generate_dataset(cfg.task, grid, cfg.n_train + cfg.n_test, cfg.data_seed,
                                  cfg.params);
    fs::create_directories(cache_dir);
    io::save_dataset(ds, path.string());
    return ds;
}

// One sweep cell: train an FNO(d_c, K), evaluate, compute the K-truncation
// baseline, return the CSV row.
io::ResultRow run_cell(const ExperimentConfig& cfg, const Dataset& train_ds,
                       const Dataset& test_ds, const Normalizer& norm, int C, int d_c, int K,
                       std::uint64_t seed, int threads) {
    const double t0 = now_seconds();
    NnoConfig mc = NnoConfig::fno(train_ds.inputs[0].channels, train_ds.outputs[0].channels,
                                  d_c, K, cfg.model_L);
    if (cfg.model_activation == "tanh") mc.activation = Activation::Tanh;
    NnoModel model = NnoModel::init(mc, seed);
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    tc.threads = threads;
    const FitResult fr = fit(model, train_ds, test_ds, tc, norm);
    if (fr.diverged) throw std::runtime_error("training diverged (loss > 1e6)");

    io::ResultRow row;
    row.task = task_name(cfg.task);
    row.C = C;
    row.d_c = d_c;
    row.K = K;
    row.seed = seed;
    row.n_train = int(train_ds.size());
    row.n_test = int(test_ds.size());
    row.param_count = model.param_count();
    row.train_err = evaluate(model, train_ds, norm).mean_rel_l2;
    row.test_err = evaluate(model, test_ds, norm).mean_rel_l2;
    row.baseline_trunc_err =
        fourier_truncation_baseline(test_ds, K, cfg.normalize ? &norm : nullptr);
    row.wallclock_s = now_seconds() - t0;
    return row;
}

int cmd_gen_data(const std::string& task_str, int grid_n, int n, std::uint64_t seed,
                 const std::string& out, double tol, double omega, double re, double dt,
                 double burn_in) {
    const Task task = task_from_name(task_str);
    TaskParams params;
    params.solver_tol = tol;
    params.helmholtz_omega = omega;
    params.kolmogorov_re = re;
    params.kolmogorov_dt = dt;
    params.kolmogorov_burn_in = burn_in;
    try {
        const Grid2D grid = default_grid(task, grid_n);
        const Dataset ds = generate_dataset(task, grid, n, seed, params);
        io::save_dataset(ds, out);
        std::printf("wrote %s (%d pairs, %d^2)\n", out.c_str(), int(ds.size()), grid_n);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "gen-data failed: %s\n", e.what());
        return 2;
    }
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& out, const std::string& history,
              int n_train, const std::string& model_json, int d_c, int K, int L,
              const std::string& basis, int epochs, int batch, double lr0, double wd,
              std::uint64_t seed, int threads, bool no_normalize) {
    const Dataset all = io::load_dataset(data_path);
    Dataset train_ds, test_ds;
    split_dataset(all, n_train > 0 ? n_train : int(all.size()) * 4 / 5, train_ds, test_ds);

    NnoConfig mc;
    if (!model_json.empty()) {
        std::ifstream is(model_json);
        std::string text((std::istreambuf_iterator<char>(is)), {});
        mc = io::config_from_json(text);
    } else {
        mc = NnoConfig::fno(all.inputs[0].channels, all.outputs[0].channels, d_c, K, L);
        if (basis == "constant") {
            mc = NnoConfig::ano(all.inputs[0].channels, all.outputs[0].channels, d_c);
        } else if (basis == "laplace-neumann") {
            mc.basis = BasisKind::LaplaceNeumann;
        } else if (basis == "local") {
            mc.basis = BasisKind::Local;
        }
    }
    NnoModel model = NnoModel::init(mc, seed);
    std::printf("model: %zu parameters\n", model.param_count());

    const Normalizer norm = no_normalize ? Normalizer::disabled() : Normalizer::fit(train_ds);
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch;
    tc.lr0 = lr0;
    tc.weight_decay = wd;
    tc.seed = seed;
    tc.threads = threads;
    const FitResult fr = fit(model, train_ds, test_ds, tc, norm);
    if (!history.empty()) {
        std::ofstream os(history, std::ios::trunc);
        os << "epoch,lr,train_mse,test_rel_l2\n";
        for (const EpochRow& r : fr.history) {
            os << r.epoch << "," << io::format_double(r.lr) << ","
               << io::format_double(r.train_mse) << "," << io::format_double(r.test_rel_l2)
               << "\n";
        }
    }
    if (fr.diverged) {
        std::fprintf(stderr, "training diverged; checkpoint not written\n");
        return 1;
    }
    io::save_checkpoint(model, out);
    std::printf("final test rel-L2: %.6g  (checkpoint %s)\n",
                fr.history.empty() ? 0.0 : fr.history.back().test_rel_l2, out.c_str());
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, int skip,
             bool no_normalize, bool per_sample) {
    const NnoModel model = io::load_checkpoint(model_path);
    const Dataset all = io::load_dataset(data_path);
    Dataset head, ds;
    if (skip > 0) {
        split_dataset(all, skip, head, ds);
    } else {
        ds = all;
        head = all;
    }
    const Normalizer norm =
        no_normalize ? Normalizer::disabled() : Normalizer::fit(skip > 0 ? head : all);
    const EvalResult res = evaluate(model, ds, norm);
    std::printf("mean rel-L2 over %zu samples: %.6g\n", ds.size(), res.mean_rel_l2);
    if (per_sample) {
        for (std::size_t i = 0; i < res.per_sample.size(); ++i) {
            std::printf("  sample %3zu: %.6g\n", i, res.per_sample[i]);
        }
    }
    return 0;
}

int cmd_baseline(const std::string& data_path, std::vector<int> k_list, int n_train,
                 bool normalized) {
    const Dataset all = io::load_dataset(data_path);
    Dataset train_ds, test_ds;
    split_dataset(all, n_train > 0 ? n_train : int(all.size()) * 4 / 5, train_ds, test_ds);
    const Normalizer norm = Normalizer::fit(train_ds);
    if (k_list.empty()) k_list = {1, 2, 4, 8, 16};
    std::printf("K, rel_l2%s\n", normalized ? " (normalized truncation)" : "");
    for (int K : k_list) {
        const double err = fourier_truncation_baseline(test_ds, K, normalized ? &norm : nullptr);
        std::printf("%d, %s\n", K, io::format_double(err).c_str());
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, bool force, int jobs) {
    std::ifstream is(config_path);
    if (!is) throw std::runtime_error("cannot open config " + config_path);
    const ExperimentConfig cfg = ExperimentConfig::from_json(json::parse(is));
    fs::create_directories(cfg.output_dir);
    {
        std::ofstream os(fs::path(cfg.output_dir) / "resolved_config.json");
        os << cfg.to_json().dump(2) << "\n";
    }
    const std::string csv = (fs::path(cfg.output_dir) / "results.csv").string();

    // Resume: skip completed (task, C, K, seed) cells unless forced.
    std::set<std::tuple<std::string, int, int, std::uint64_t>> done;
    if (!force) {
        for (const io::ResultRow& r : io::read_results(csv)) {
            done.insert({r.task, r.C, r.K, r.seed});
        }
    }

    const Dataset all = load_or_generate(cfg, cfg.output_dir);
    Dataset train_ds, test_ds;
    split_dataset(all, cfg.n_train, train_ds, test_ds);
    const Normalizer norm = cfg.normalize ? Normalizer::fit(train_ds) : Normalizer::disabled();

    struct Cell {
        int C, d_c, K;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int C : cfg.c_list) {
        for (const auto& [d_c, K] : budget_pairs(C)) {
            if (!cfg.k_list.empty() &&
                std::find(cfg.k_list.begin(), cfg.k_list.end(), K) == cfg.k_list.end()) {
                continue;
            }
            if (K > cfg.grid_n / 2 - 1) continue;
            for (std::uint64_t seed : cfg.seeds) {
                if (done.count({task_name(cfg.task), C, K, seed})) {
                    std::printf("[skip] C=%d K=%d seed=%llu (already in results.csv)\n", C, K,
                                (unsigned long long)seed);
                    continue;
                }
                cells.push_back({C, d_c, K, seed});
            }
        }
    }

    std::mutex csv_mu;
    std::atomic<std::size_t> next{0};
    const int cell_threads = jobs > 1 ? 1 : cfg.train.threads;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            const Cell& c = cells[i];
            io::ResultRow row =
                run_cell(cfg, train_ds, test_ds, norm, c.C, c.d_c, c.K, c.seed, cell_threads);
            std::lock_guard<std::mutex> lock(csv_mu);
            io::append_results(csv, {row});
            std::printf("[cell] C=%d d_c=%d K=%d seed=%llu test=%.5g baseline=%.5g (%.1fs)\n",
                        c.C, c.d_c, c.K, (unsigned long long)c.seed, row.test_err,
                        row.baseline_trunc_err, row.wallclock_s);
            std::fflush(stdout);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    const auto rows = io::read_results(csv);
    if (!rows.empty()) {
        io::write_sweep_svg((fs::path(cfg.output_dir) / "sweep.svg").string(), rows);
        std::printf("wrote %s and sweep.svg (%zu rows)\n", csv.c_str(), rows.size());
    }
    return 0;
}

int cmd_universality(const std::string& out_dir, bool quick) {
    fs::create_directories(out_dir);
    const std::string csv = (fs::path(out_dir) / "results.csv").string();
    const Grid2D grid(32, 32);
    std::vector<io::ResultRow> rows;

    // Shift-operator demo: pointwise-local model vs averaging operator.
    {
        TrainConfig cfg;
        cfg.epochs = quick ? 20 : 80;
        cfg.batch_size = 16;
        cfg.lr0 = 3e-3;
        cfg.seed = 0;
        cfg.threads = 2;
        const ShiftDemoResult r =
            shift_demo(grid, 0.25, 0.0, 4, quick ? 64 : 256, 64, quick ? 16 : 64, cfg);
        std::printf("[shift] local rel-L2 %.4g, averaging rel-L2 %.4g\n", r.local_rel_l2,
                    r.ano_rel_l2);
        io::ResultRow row;
        row.task = "shift-local";
        row.test_err = r.local_rel_l2;
        row.n_test = 64;
        row.param_count = 1;
        rows.push_back(row);
        row.task = "shift-averaging";
        row.test_err = r.ano_rel_l2;
        rows.push_back(row);
    }

    // Averaged-functional fit of a linear pairing.
    {
        Field xi(grid, 1);
        for (int j = 0; j < grid.ny; ++j) {
            for (int i = 0; i < grid.nx; ++i) {
                xi.at(i, j) = std::cos(2.0 * std::numbers::pi * grid.x(i));
            }
        }
        GrfSpec grf;
        grf.basis = GrfBasis::PeriodicFourier;
        grf.include_mean_mode = false;
        grf.seed = 17;
        TrainConfig cfg;
        cfg.epochs = quick ? 30 : 150;
        cfg.batch_size = 32;
        cfg.lr0 = 1e-2;
        cfg.weight_decay = 0.0;
        cfg.seed = 1;
        cfg.threads = 2;
        const AvgFunctionalResult r = train_functional_average(
            FunctionalTarget::linear(xi), grf, grid, 32, quick ? 200 : 1200, 200, cfg);
        std::printf("[functional] held-out relative MAE %.4g\n", r.heldout_rel_mae);
        io::ResultRow row;
        row.task = "functional-linear";
        row.test_err = r.heldout_rel_mae;
        row.n_test = 200;
        row.param_count = r.model.param_count();
        rows.push_back(row);
    }

    io::append_results(csv, rows);
    std::printf("appended %zu rows to %s\n", rows.size(), csv.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal operator learning lab"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a PDE dataset");
    std::string g_task = "darcy-pc", g_out = "data.nods";
    int g_grid = 64, g_n = 8;
    std::uint64_t g_seed = 1;
    double g_tol = 1e-8, g_omega = 15.0, g_re = 40.0, g_dt = 0.005, g_burn = 20.0;
    gen->add_option("--task", g_task, "helmholtz|darcy-pc|darcy-lognormal|kolmogorov");
    gen->add_option("--grid", g_grid, "grid size per axis (power of two)");
    gen->add_option("--n", g_n, "number of pairs");
    gen->add_option("--seed", g_seed, "generation seed");
    gen->add_option("--out", g_out, "output NODS path");
    gen->add_option("--tol", g_tol, "solver tolerance");
    gen->add_option("--omega", g_omega, "helmholtz frequency");
    gen->add_option("--re", g_re, "kolmogorov Reynolds number");
    gen->add_option("--dt", g_dt, "kolmogorov time step");
    gen->add_option("--burn-in", g_burn, "kolmogorov burn-in time");

    // train
    auto* tr = app.add_subcommand("train", "train one model on a dataset");
    std::string t_data, t_out = "model.nock", t_hist, t_model_json, t_basis = "fourier";
    int t_ntrain = 0, t_dc = 16, t_K = 2, t_L = 4, t_epochs = 100, t_batch = 16, t_threads = 2;
    double t_lr = 1e-3, t_wd = 1e-4;
    std::uint64_t t_seed = 0;
    bool t_nonorm = false;
    tr->add_option("--data", t_data, "NODS dataset")->required();
    tr->add_option("--out", t_out, "checkpoint path");
    tr->add_option("--history", t_hist, "per-epoch history CSV");
    tr->add_option("--model-config", t_model_json, "model config JSON file");
    tr->add_option("--n-train", t_ntrain, "training split size (default 80%)");
    tr->add_option("--d-c", t_dc, "channel dimension");
    tr->add_option("--K", t_K, "mode cutoff");
    tr->add_option("--L", t_L, "hidden layers");
    tr->add_option("--basis", t_basis, "fourier|constant|laplace-neumann|local");
    tr->add_option("--epochs", t_epochs, "epochs");
    tr->add_option("--batch", t_batch, "batch size");
    tr->add_option("--lr0", t_lr, "initial learning rate");
    tr->add_option("--wd", t_wd, "weight decay");
    tr->add_option("--seed", t_seed, "training seed");
    tr->add_option("--threads", t_threads, "batch-parallel threads");
    tr->add_flag("--no-normalize", t_nonorm, "train on raw fields");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string e_model, e_data;
    int e_skip = 0;
    bool e_nonorm = false, e_per_sample = false;
    ev->add_option("--model", e_model, "NOCK checkpoint")->required();
    ev->add_option("--data", e_data, "NODS dataset")->required();
    ev->add_option("--skip", e_skip, "treat the first N samples as the (normalizer) train split");
    ev->add_flag("--no-normalize", e_nonorm, "evaluate on raw fields");
    ev->add_flag("--per-sample", e_per_sample, "print per-sample errors");

    // sweep
    auto* sw = app.add_subcommand("sweep", "run the channel-width vs modes budget sweep");
    std::string s_config;
    bool s_force = false;
    int s_jobs = 1;
    sw->add_option("--config", s_config, "experiment config JSON")->required();
    sw->add_flag("--force", s_force, "re-run completed cells");
    sw->add_option("--jobs", s_jobs, "parallel cells");

    // baseline
    auto* bl = app.add_subcommand("baseline", "Fourier-truncation baseline of a dataset");
    std::string b_data;
    std::vector<int> b_k;
    int b_ntrain = 0;
    bool b_norm = false;
    bl->add_option("--data", b_data, "NODS dataset")->required();
    bl->add_option("--K", b_k, "mode cutoffs");
    bl->add_option("--n-train", b_ntrain, "normalizer split size (default 80%)");
    bl->add_flag("--normalized", b_norm, "truncate in normalized coordinates");

    // universality
    auto* un = app.add_subcommand("universality", "run the universality demos");
    std::string u_out = "out-universality";
    bool u_quick = false;
    un->add_option("--out-dir", u_out, "output directory");
    un->add_flag("--quick", u_quick, "reduced-budget smoke run");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_gen_data(g_task, g_grid, g_n, g_seed, g_out, g_tol, g_omega, g_re, g_dt,
                                g_burn);
        }
        if (tr->parsed()) {
            return cmd_train(t_data, t_out, t_hist, t_ntrain, t_model_json, t_dc, t_K, t_L,
                             t_basis, t_epochs, t_batch, t_lr, t_wd, t_seed, t_threads,
                             t_nonorm);
        }
        if (ev->parsed()) return cmd_eval(e_model, e_data, e_skip, e_nonorm, e_per_sample);
        if (sw->parsed()) return cmd_sweep(s_config, s_force, s_jobs);
        if (bl->parsed()) return cmd_baseline(b_data, b_k, b_ntrain, b_norm);
        if (un->parsed()) return cmd_universality(u_out, u_quick);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
