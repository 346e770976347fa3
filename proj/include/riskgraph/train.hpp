#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskgraph/dist.hpp"
#include "riskgraph/ingest.hpp"
#include "riskgraph/model.hpp"

namespace riskgraph::train {

/// Divergence, NaN/Inf losses or gradients. Kept distinct from I/O and
/// validation failures so the CLI can map it to its own exit code.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    double lr = 1e-3;
    int epochs = 200;
    int batch_size = 8;
    int patience = 20;
    std::uint64_t seed = 0;
    dist::Y0Form y0_form = dist::Y0Form::exact;
    double clip_norm = 5.0;
    bool verbose = false;  // per-epoch progress on stderr

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_nll = 0.0;
    double val_nll = 0.0;
    double seconds = 0.0;  // measured wall time; not serialized (see write_history_csv)
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;  // 0 = initial parameters were never improved on
    double best_val_nll = 0.0;
};

/// Mean over all |V| x k entries of -loglik(params, y).
double batch_nll(const model::ForecastDistribution& fd, const nn::Tensor& y,
                 dist::Y0Form form = dist::Y0Form::exact);

/// Adam first/second moments per parameter, laid out in store registration
/// order. beta/eps fixed at standard defaults.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long t = 0;
    std::vector<nn::Tensor> m, v;

    static AdamState init(const nn::ParamStore& params);
};

/// Bias-corrected in-place update from the store's current gradients.
/// Throws std::runtime_error naming the parameter on non-finite gradients.
void adam_step(nn::ParamStore& params, AdamState& state, double lr);

/// Scales all gradients so the global L2 norm is at most max_norm; returns
/// the pre-clip norm.
double clip_gradients(nn::ParamStore& params, double max_norm);

/// Shuffled mini-batch NLL training with early stopping on validation NLL.
/// The model is left holding the best-validation parameters.
TrainHistory train_model(model::Model& m, const std::vector<ingest::WindowSample>& train_set,
                         const std::vector<ingest::WindowSample>& val_set,
                         const graph::AdjacencyMatrix& A, const TrainConfig& cfg);

/// Header `epoch,train_nll,val_nll,seconds`. The seconds column is pinned to
/// 0 so the file is byte-stable across runs; measured timings stay in the
/// in-memory history (and stderr when verbose).
void write_history_csv(const TrainHistory& h, const std::string& path);

void save_checkpoint(const model::Model& m, std::uint64_t graph_hash, std::uint64_t train_seed,
                     const std::string& path);

struct LoadedCheckpoint {
    model::Model m;
    std::uint64_t graph_hash = 0;
    std::uint64_t train_seed = 0;
};

/// Throws std::runtime_error when the file cannot be opened and
/// std::invalid_argument on parse errors, schema violations, unknown or
/// missing parameters, or (when expected_graph_hash is given) hash mismatch.
LoadedCheckpoint load_checkpoint(const std::string& path,
                                 std::optional<std::uint64_t> expected_graph_hash = std::nullopt);

}  // namespace riskgraph::train
