#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskgraph/ingest.hpp"
#include "riskgraph/model.hpp"
#include "riskgraph/train.hpp"

namespace riskgraph::cli {

struct PathsConfig {
    std::string nodes;      // node CSV (road_id,x,y)
    std::string edges;      // edge CSV (road_id_a,road_id_b)
    std::string accidents;  // accident CSV, ingest only
    std::string risk;       // risk tensor CSV; written by ingest/synth, read downstream
    std::string out_dir;    // where a command writes its files
};

/// Window protocol. `label` is one of long|short|custom; long and short pin
/// (T,k) to (14,14) and (7,7).
struct WindowConfig {
    std::string label = "long";
    int t = 14;
    int k = 14;
    int stride = 1;

    std::string display() const;  // "Long(14-14)" etc., used in reports
};

struct SplitConfig {
    double train_frac = 0.6;
    double val_frac = 0.2;
};

struct ModelSection {
    std::string head = "zinb";  // zinb | nb | gauss
    int gru_hidden = 32;
    int gat_hidden = 32;
    int gat_heads = 2;
    int gat_layers = 1;
    bool scale_inputs = false;
};

struct TrainSection {
    double lr = 1e-3;
    int epochs = 200;
    int batch_size = 8;
    int patience = 20;
    std::string y0_form = "exact";  // exact | paper_literal
    double clip_norm = 5.0;
    bool verbose = false;
};

struct EvalSection {
    double top_frac = 0.2;
    double kld_epsilon = 1e-6;
    std::vector<std::string> checkpoints;  // checkpoint files to score
    bool include_ha = true;
};

struct SpilloverConfig {
    double alpha1 = 0.5;
    double alpha2 = 0.25;
};

/// Synthetic dataset spec. For series=zinb each node gets static params drawn
/// uniformly from the ranges; for series=bursty the two-regime generator runs
/// with `burst` and no params file is written (there is no single true
/// triple per node).
struct SynthSection {
    std::size_t n_nodes = 100;
    std::size_t n_days = 365;
    std::string graph_model = "grid";  // grid | random_geometric
    std::string series = "zinb";       // zinb | bursty
    double pi_lo = 0.9, pi_hi = 0.99;
    double n_lo = 1.0, n_hi = 4.0;
    double p_lo = 0.3, p_hi = 0.7;
    ingest::BurstSpec burst;
    std::string start_date = "2019-01-01";
};

struct PredictSection {
    std::string checkpoint;
    std::string as_of_date;  // empty: last day of the risk tensor
    double level = 0.9;
};

struct Seeds {
    std::uint64_t data_seed = 1;
    std::uint64_t train_seed = 2;
};

/// One config file drives every subcommand; each command reads the sections
/// it needs and ignores the rest, so a single file can describe a whole
/// synth -> train -> evaluate -> predict pipeline.
struct RunConfig {
    PathsConfig paths;
    std::string period_start;  // ISO dates, inclusive; ingest only
    std::string period_end;
    WindowConfig window;
    SplitConfig split;
    ModelSection model;
    TrainSection train;
    EvalSection eval;
    ingest::SeverityWeights severity_weights;
    SpilloverConfig spillover;
    SynthSection synth;
    PredictSection predict;
    Seeds seeds;
};

/// Strict parse: unknown keys and type mismatches are rejected
/// (std::invalid_argument), absent keys fall back to the defaults above.
RunConfig load_config(const std::string& path);

/// Serializes the fully resolved config (defaults materialized) so each run
/// directory is self-describing. load_config on the output reproduces it.
void write_resolved_config(const RunConfig& c, const std::string& path);

model::ModelConfig model_config(const RunConfig& c);
train::TrainConfig train_config(const RunConfig& c);

// Commands throw on failure: std::invalid_argument for config/content
// problems, train::NumericError for divergence, std::runtime_error for I/O.
void cmd_ingest(const RunConfig& c);
void cmd_synth(const RunConfig& c);
void cmd_train(const RunConfig& c);
void cmd_evaluate(const RunConfig& c);
void cmd_predict(const RunConfig& c);

/// Loads the config, applies the --out override, dispatches, and maps
/// exceptions to exit codes: 0 success, 2 config/validation, 3 numeric,
/// 4 I/O.
int run_command(const std::string& name, const std::string& config_path,
                const std::optional<std::string>& out_override);

}  // namespace riskgraph::cli
