#include "nolab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nolab::io {

namespace {

using nlohmann::json;

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw std::runtime_error("unexpected end of file");
    return v;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * 8));
}

void read_doubles(std::istream& is, std::vector<double>& v) {
    is.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * 8));
    if (!is) throw std::runtime_error("unexpected end of file");
}

json grf_to_json(const GrfSpec& g) {
    return json{{"tau_sq", g.tau_sq},
                {"power", g.power},
                {"basis", g.basis == GrfBasis::NeumannCosine ? "neumann-cosine" : "periodic-fourier"},
                {"seed", g.seed},
                {"include_mean_mode", g.include_mean_mode}};
}

GrfSpec grf_from_json(const json& j) {
    GrfSpec g;
    g.tau_sq = j.at("tau_sq").get<double>();
    g.power = j.at("power").get<double>();
    g.basis = j.at("basis").get<std::string>() == "neumann-cosine" ? GrfBasis::NeumannCosine
                                                                  : GrfBasis::PeriodicFourier;
    g.seed = j.at("seed").get<std::uint64_t>();
    g.include_mean_mode = j.value("include_mean_mode", true);
    return g;
}

json params_to_json(const TaskParams& p) {
    return json{{"helmholtz_omega", p.helmholtz_omega},
                {"solver_tol", p.solver_tol},
                {"kolmogorov_re", p.kolmogorov_re},
                {"kolmogorov_forcing_n", p.kolmogorov_forcing_n},
                {"kolmogorov_h", p.kolmogorov_h},
                {"kolmogorov_dt", p.kolmogorov_dt},
                {"kolmogorov_burn_in", p.kolmogorov_burn_in},
                {"kolmogorov_pairs_per_traj", p.kolmogorov_pairs_per_traj}};
}

TaskParams params_from_json(const json& j) {
    TaskParams p;
    p.helmholtz_omega = j.value("helmholtz_omega", p.helmholtz_omega);
    p.solver_tol = j.value("solver_tol", p.solver_tol);
    p.kolmogorov_re = j.value("kolmogorov_re", p.kolmogorov_re);
    p.kolmogorov_forcing_n = j.value("kolmogorov_forcing_n", p.kolmogorov_forcing_n);
    p.kolmogorov_h = j.value("kolmogorov_h", p.kolmogorov_h);
    p.kolmogorov_dt = j.value("kolmogorov_dt", p.kolmogorov_dt);
    p.kolmogorov_burn_in = j.value("kolmogorov_burn_in", p.kolmogorov_burn_in);
    p.kolmogorov_pairs_per_traj = j.value("kolmogorov_pairs_per_traj", p.kolmogorov_pairs_per_traj);
    return p;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
    os.write("NODS", 4);
    write_u32(os, 1);
    write_u32(os, std::uint32_t(ds.size()));
    write_u32(os, std::uint32_t(ds.grid.nx));
    write_u32(os, std::uint32_t(ds.grid.ny));
    write_u32(os, std::uint32_t(ds.inputs[0].channels));
    write_u32(os, std::uint32_t(ds.outputs[0].channels));
    const std::uint8_t dtype = 1;  // f64
    os.write(reinterpret_cast<const char*>(&dtype), 1);
    for (std::size_t s = 0; s < ds.size(); ++s) {
        write_doubles(os, ds.inputs[s].data);
        write_doubles(os, ds.outputs[s].data);
    }
    if (!os) throw std::runtime_error("save_dataset: write failed for " + path);
    os.close();

    json meta{{"task", task_name(ds.task)},
              {"lx", ds.grid.lx},
              {"ly", ds.grid.ly},
              {"seed", ds.seed},
              {"grf", grf_to_json(ds.grf)},
              {"params", params_to_json(ds.params)}};
    std::ofstream ms(path + ".json", std::ios::trunc);
    ms << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NODS", 4) != 0) {
        throw std::runtime_error("load_dataset: bad magic in " + path);
    }
    const std::uint32_t version = read_u32(is);
    if (version != 1) throw std::runtime_error("load_dataset: unsupported version");
    const std::uint32_t n = read_u32(is);
    const std::uint32_t nx = read_u32(is);
    const std::uint32_t ny = read_u32(is);
    const std::uint32_t c_in = read_u32(is);
    const std::uint32_t c_out = read_u32(is);
    std::uint8_t dtype = 0;
    is.read(reinterpret_cast<char*>(&dtype), 1);
    if (!is || dtype != 1) throw std::runtime_error("load_dataset: unsupported dtype");

    Dataset ds;
    double lx = 1.0, ly = 1.0;
    const std::string meta_path = path + ".json";
    if (std::filesystem::exists(meta_path)) {
        std::ifstream ms(meta_path);
        json meta = json::parse(ms);
        ds.task = task_from_name(meta.at("task").get<std::string>());
        lx = meta.at("lx").get<double>();
        ly = meta.at("ly").get<double>();
        ds.seed = meta.at("seed").get<std::uint64_t>();
        ds.grf = grf_from_json(meta.at("grf"));
        ds.params = params_from_json(meta.at("params"));
    }
    ds.grid = Grid2D(int(nx), int(ny), lx, ly);
    for (std::uint32_t s = 0; s < n; ++s) {
        Field in(ds.grid, int(c_in));
        Field out(ds.grid, int(c_out));
        read_doubles(is, in.data);
        read_doubles(is, out.data);
        ds.inputs.push_back(std::move(in));
        ds.outputs.push_back(std::move(out));
    }
    is.peek();
    if (!is.eof()) throw std::runtime_error("load_dataset: trailing bytes in " + path);
    ds.validate();
    return ds;
}

std::string config_to_json(const NnoConfig& c) {
    const char* basis = c.basis == BasisKind::Fourier          ? "fourier"
                        : c.basis == BasisKind::Constant       ? "constant"
                        : c.basis == BasisKind::LaplaceNeumann ? "laplace-neumann"
                                                               : "local";
    json j{{"in_channels", c.in_channels},
           {"out_channels", c.out_channels},
           {"d_c", c.d_c},
           {"L", c.L},
           {"basis", basis},
           {"K", c.K},
           {"activation", c.activation == Activation::Gelu ? "gelu" : "tanh"},
           {"lifting_depth", c.lifting_depth},
           {"lifting_width", c.lifting_width},
           {"projection_depth", c.projection_depth},
           {"projection_width", c.projection_width},
           {"decoder", c.decoder == DecoderKind::Mlp ? "mlp" : "linear"},
           {"J", c.J},
           {"trunk_depth", c.trunk_depth},
           {"trunk_width", c.trunk_width},
           {"positional_encoding", c.positional_encoding},
           {"q_positional", c.q_positional},
           {"use_W", c.use_W}};
    return j.dump();
}

NnoConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    NnoConfig c;
    c.in_channels = j.at("in_channels").get<int>();
    c.out_channels = j.at("out_channels").get<int>();
    c.d_c = j.at("d_c").get<int>();
    c.L = j.at("L").get<int>();
    const std::string basis = j.at("basis").get<std::string>();
    if (basis == "fourier") c.basis = BasisKind::Fourier;
    else if (basis == "constant") c.basis = BasisKind::Constant;
    else if (basis == "laplace-neumann") c.basis = BasisKind::LaplaceNeumann;
    else if (basis == "local") c.basis = BasisKind::Local;
    else throw std::runtime_error("config_from_json: unknown basis " + basis);
    c.K = j.at("K").get<int>();
    c.activation = j.at("activation").get<std::string>() == "gelu" ? Activation::Gelu
                                                                   : Activation::Tanh;
    c.lifting_depth = j.at("lifting_depth").get<int>();
    c.lifting_width = j.at("lifting_width").get<int>();
    c.projection_depth = j.at("projection_depth").get<int>();
    c.projection_width = j.at("projection_width").get<int>();
    c.decoder = j.at("decoder").get<std::string>() == "mlp" ? DecoderKind::Mlp
                                                            : DecoderKind::Linear;
    c.J = j.at("J").get<int>();
    c.trunk_depth = j.at("trunk_depth").get<int>();
    c.trunk_width = j.at("trunk_width").get<int>();
    c.positional_encoding = j.at("positional_encoding").get<bool>();
    c.q_positional = j.at("q_positional").get<bool>();
    c.use_W = j.at("use_W").get<bool>();
    c.validate();
    return c;
}

void save_checkpoint(const NnoModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os.write("NOCK", 4);
    write_u32(os, 1);
    const std::string cfg = config_to_json(model.config);
    write_u32(os, std::uint32_t(cfg.size()));
    os.write(cfg.data(), std::streamsize(cfg.size()));
    for (const Tensor* t : model.parameters()) {
        write_u32(os, std::uint32_t(t->shape.size()));
        for (int d : t->shape) write_u32(os, std::uint32_t(d));
        write_doubles(os, t->data);
    }
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

NnoModel load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NOCK", 4) != 0) {
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    }
    if (read_u32(is) != 1) throw std::runtime_error("load_checkpoint: unsupported version");
    const std::uint32_t cfg_len = read_u32(is);
    std::string cfg(cfg_len, '\0');
    is.read(cfg.data(), cfg_len);
    if (!is) throw std::runtime_error("load_checkpoint: truncated config");
    NnoModel model = NnoModel::init(config_from_json(cfg), 0);
    for (Tensor* t : model.parameters()) {
        const std::uint32_t ndim = read_u32(is);
        std::vector<int> shape(ndim);
        for (std::uint32_t d = 0; d < ndim; ++d) shape[d] = int(read_u32(is));
        if (shape != t->shape) throw std::runtime_error("load_checkpoint: shape mismatch");
        read_doubles(is, t->data);
    }
    is.peek();
    if (!is.eof()) throw std::runtime_error("load_checkpoint: trailing bytes in " + path);
    return model;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {
const char* kCsvHeader =
    "task,C,d_c,K,seed,n_train,n_test,param_count,train_err,test_err,"
    "baseline_trunc_err,wallclock_s";
}

void append_results(const std::string& path, const std::vector<ResultRow>& rows) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream os(path, std::ios::app);
    if (!os) throw std::runtime_error("append_results: cannot open " + path);
    if (fresh) os << kCsvHeader << "\n";
    for (const ResultRow& r : rows) {
        os << r.task << "," << r.C << "," << r.d_c << "," << r.K << "," << r.seed << ","
           << r.n_train << "," << r.n_test << "," << r.param_count << ","
           << format_double(r.train_err) << "," << format_double(r.test_err) << ","
           << format_double(r.baseline_trunc_err) << "," << format_double(r.wallclock_s)
           << "\n";
    }
}

std::vector<ResultRow> read_results(const std::string& path) {
    std::vector<ResultRow> rows;
    std::ifstream is(path);
    if (!is) return rows;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        ResultRow r;
        std::getline(ss, r.task, ',');
        auto next = [&]() {
            std::getline(ss, cell, ',');
            return cell;
        };
        r.C = std::stoi(next());
        r.d_c = std::stoi(next());
        r.K = std::stoi(next());
        r.seed = std::stoull(next());
        r.n_train = std::stoi(next());
        r.n_test = std::stoi(next());
        r.param_count = std::stoull(next());
        r.train_err = std::strtod(next().c_str(), nullptr);
        r.test_err = std::strtod(next().c_str(), nullptr);
        r.baseline_trunc_err = std::strtod(next().c_str(), nullptr);
        r.wallclock_s = std::strtod(next().c_str(), nullptr);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_sweep_svg(const std::string& path, const std::vector<ResultRow>& rows) {
    // Median test error over seeds per (C, K); baseline likewise.
    std::map<std::pair<int, int>, std::vector<double>> cells;
    std::map<int, std::vector<double>> baseline_cells;
    for (const ResultRow& r : rows) {
        cells[{r.C, r.K}].push_back(r.test_err);
        baseline_cells[r.K].push_back(r.baseline_trunc_err);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };

    std::map<int, std::map<int, double>> per_c;  // C -> K -> median err
    std::map<int, double> baseline;              // K -> median err
    double err_min = 1e300, err_max = 0.0;
    int k_min = 1 << 30, k_max = 0;
    for (auto& [key, v] : cells) {
        const double m = median(v);
        per_c[key.first][key.second] = m;
        err_min = std::min(err_min, m);
        err_max = std::max(err_max, m);
        k_min = std::min(k_min, key.second);
        k_max = std::max(k_max, key.second);
    }
    for (auto& [k, v] : baseline_cells) {
        const double m = median(v);
        baseline[k] = m;
        err_min = std::min(err_min, std::max(m, 1e-16));
        err_max = std::max(err_max, m);
    }
    if (per_c.empty()) throw std::runtime_error("write_sweep_svg: no rows");
    err_min = std::max(err_min * 0.8, 1e-16);
    err_max = std::max(err_max * 1.25, err_min * 10.0);

    const double W = 640, H = 480, ml = 70, mr = 20, mt = 20, mb = 50;
    const double lkmin = std::log2(double(k_min)), lkmax = std::log2(double(k_max));
    const double lemin = std::log10(err_min), lemax = std::log10(err_max);
    auto px = [&](double k) {
        return ml + (std::log2(k) - lkmin) / std::max(lkmax - lkmin, 1e-9) * (W - ml - mr);
    };
    auto py = [&](double e) {
        return H - mb - (std::log10(std::max(e, 1e-16)) - lemin) / (lemax - lemin) * (H - mt - mb);
    };

    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_sweep_svg: cannot open " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
       << H - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    for (int k = k_min; k <= k_max; k *= 2) {
        os << "<text x=\"" << px(k) << "\" y=\"" << H - mb + 18
           << "\" font-size=\"12\" text-anchor=\"middle\">" << k << "</text>\n";
    }
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
       << "\" font-size=\"13\" text-anchor=\"middle\">Fourier modes K</text>\n";
    for (int e = int(std::floor(lemin)); e <= int(std::ceil(lemax)); ++e) {
        const double y = py(std::pow(10.0, e));
        if (y < mt || y > H - mb) continue;
        os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
           << "\" font-size=\"12\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
       << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (mt + H - mb) / 2 << ")\">relative L2 test error</text>\n";

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    int ci = 0;
    double legend_y = mt + 14;
    for (auto& [C, curve] : per_c) {
        const char* col = colors[ci % 6];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.8\" points=\"";
        for (auto& [k, e] : curve) os << px(k) << "," << py(e) << " ";
        os << "\"/>\n";
        for (auto& [k, e] : curve) {
            os << "<circle cx=\"" << px(k) << "\" cy=\"" << py(e) << "\" r=\"3\" fill=\"" << col
               << "\"/>\n";
        }
        os << "<text x=\"" << W - mr - 110 << "\" y=\"" << legend_y << "\" font-size=\"12\" fill=\""
           << col << "\">C = " << C << "</text>\n";
        legend_y += 16;
        ++ci;
    }
    if (!baseline.empty()) {
        os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" "
              "stroke-dasharray=\"6 4\" points=\"";
        for (auto& [k, e] : baseline) os << px(k) << "," << py(e) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << W - mr - 110 << "\" y=\"" << legend_y
           << "\" font-size=\"12\" fill=\"black\">Fourier truncation</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace nolab::io
