#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nolab/neuralop.hpp"
#include "nolab/pde.hpp"

namespace nolab::io {

/// Dataset container ("NODS"): magic, u32 version=1, u32 n, u32 nx, u32 ny,
/// u32 c_in, u32 c_out, u8 dtype (1 = f64), then n records of
/// (input field, output field) as little-endian doubles in field layout.
/// A JSON sidecar at <path>.json carries the generation metadata.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Checkpoint container ("NOCK"): magic, u32 version=1, u32 config JSON
/// length, JSON bytes, then parameter tensors in declaration order, each as
/// u32 ndim, u32 dims..., f64 data.
void save_checkpoint(const NnoModel& model, const std::string& path);
NnoModel load_checkpoint(const std::string& path);

std::string config_to_json(const NnoConfig& c);
NnoConfig config_from_json(const std::string& json_text);

/// One line of results.csv; columns in exactly this order.
struct ResultRow {
    std::string task;
    int C = 0;
    int d_c = 0;
    int K = 0;
    std::uint64_t seed = 0;
    int n_train = 0;
    int n_test = 0;
    std::uint64_t param_count = 0;
    double train_err = 0.0;
    double test_err = 0.0;
    double baseline_trunc_err = 0.0;
    double wallclock_s = 0.0;
};

/// Locale-independent "%.17g" formatting.
std::string format_double(double v);

/// Appends rows, writing the header only when the file is new.
void append_results(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results(const std::string& path);

/// Self-contained sweep plot: test error vs K (log-log), one solid polyline
/// per C, dashed Fourier-truncation baseline.
void write_sweep_svg(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace nolab::io
