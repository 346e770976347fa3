#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskgraph/calendar.hpp"
#include "riskgraph/dist.hpp"
#include "riskgraph/graph.hpp"
#include "riskgraph/tensor.hpp"

namespace riskgraph::ingest {

enum class Severity { slight, serious, fatal };

Severity parse_severity(const std::string& s);
const char* severity_name(Severity s);

struct AccidentRecord {
    cal::Day date = 0;
    std::optional<std::string> road_id;       // exactly one of road_id / location
    std::optional<graph::Coord> location;
    Severity severity = Severity::slight;
    std::size_t line_no = 0;                  // source line for diagnostics
};

struct SeverityWeights {
    double slight = 1.0;
    double serious = 2.0;
    double fatal = 3.0;

    double of(Severity s) const {
        switch (s) {
            case Severity::slight: return slight;
            case Severity::serious: return serious;
            default: return fatal;
        }
    }
};

/// Daily risk levels, nonnegative integers, |V| x D.
struct RiskTensor {
    std::size_t num_nodes = 0;
    std::vector<cal::Day> day_index;          // D consecutive calendar days
    std::vector<long long> values;            // row-major num_nodes x D

    std::size_t num_days() const { return day_index.size(); }
    long long at(std::size_t node, std::size_t day) const {
        return values[node * day_index.size() + day];
    }
    long long& at(std::size_t node, std::size_t day) {
        return values[node * day_index.size() + day];
    }
    double zero_fraction() const;
};

/// Calendar features per day: day-of-week one-hot (Monday first) + weekend
/// flag. Identical for every node; stored once per day.
struct FeatureTensor {
    static constexpr std::size_t kDim = 8;

    std::size_t num_nodes = 0;
    std::vector<cal::Day> day_index;
    std::vector<double> day_features;         // D x kDim

    std::span<const double> day_row(std::size_t day) const {
        return {day_features.data() + day * kDim, kDim};
    }
};

/// One seq2seq sample: input days [start_day, start_day+T), target days
/// [start_day+T, start_day+T+k), contiguous and non-overlapping.
struct WindowSample {
    nn::Tensor input_risk;       // V x T (integral values)
    nn::Tensor input_features;   // V x T x kDim
    nn::Tensor target_risk;      // V x k (integral values)
    std::size_t start_day = 0;
};

/// Accumulates severity weights onto (nearest road, day). Records located by
/// coordinates require graph coords; nearest = min Euclidean distance with
/// ties to the lowest node index. Throws on dates outside day_index.
nn::Tensor assign_accidents(std::span<const AccidentRecord> records, const graph::RoadGraph& g,
                            const SeverityWeights& weights, std::span<const cal::Day> day_index);

/// Adds alpha1 * w to 1st-order and alpha2 * w to 2nd-order neighbors for
/// every base entry w; no rounding.
nn::Tensor spillover_base(const nn::Tensor& base, const graph::RoadGraph& g, double alpha1,
                          double alpha2);

/// spillover_base followed by rounding to nearest integer, ties away from
/// zero. Requires 0 <= alpha2 <= alpha1 <= 1.
RiskTensor apply_spillover(const nn::Tensor& base, const graph::RoadGraph& g, double alpha1,
                           double alpha2, std::vector<cal::Day> day_index);

FeatureTensor build_features(std::size_t num_nodes, std::vector<cal::Day> day_index);

/// Requires D >= T + k; returns floor((D-T-k)/stride) + 1 samples in
/// chronological order.
std::vector<WindowSample> make_windows(const RiskTensor& risk, const FeatureTensor& features,
                                       int T, int k, int stride);

/// Day range [d0, d1) of the tensor; throws on an empty or out-of-range span.
RiskTensor slice_days(const RiskTensor& risk, std::size_t d0, std::size_t d1);

struct SplitResult {
    std::vector<WindowSample> train, val, test;
};

/// Contiguous chronological partition; floor(n*frac) for train and val, the
/// remainder to test. Throws if any split is empty.
SplitResult chronological_split(std::vector<WindowSample> samples, double train_frac,
                                double val_frac);

enum class GraphModel { grid, random_geometric };

/// grid: ceil(sqrt(n))-wide lattice with unit spacing scaled to 100 m.
/// random_geometric: uniform points in a square, radius targeting mean
/// degree ~4. Deterministic under seed.
graph::RoadGraph generate_synthetic_graph(std::size_t n_nodes, GraphModel model,
                                          std::uint64_t seed);

/// Each (node, day) entry drawn independently from the node's ZINB params via
/// a sub-seed mixed from (seed, node, day); bit-identical across runs.
RiskTensor generate_zinb_series(const graph::RoadGraph& g, std::size_t n_days,
                                std::span<const dist::ZinbParams> params_per_node,
                                std::uint64_t seed, cal::Day start_day);

/// Regime-switching generator: each node follows a two-state Markov chain
/// (quiet/burst) with per-state ZINB emission params; used to produce
/// zero-inflated data with learnable temporal structure.
struct BurstSpec {
    dist::ZinbParams quiet{0.999, 1.0, 0.5};
    dist::ZinbParams burst{0.55, 8.0, 0.5};
    double p_enter = 0.02;   // quiet -> burst per day
    double p_exit = 0.10;    // burst -> quiet per day
};

RiskTensor generate_bursty_series(const graph::RoadGraph& g, std::size_t n_days,
                                  const BurstSpec& spec, std::uint64_t seed, cal::Day start_day);

/// Single NB(n, p) draw by CDF inversion of u; exact and portable.
long long nb_sample_inverse(double n, double p, double u);

/// Accident file: header `date,road_id,x,y,severity`; road_id empty when
/// coordinates are used. Throws with line numbers on malformed rows.
std::vector<AccidentRecord> load_accidents_csv(const std::string& path);

/// Risk tensor file: first column road_id, remaining columns ISO dates.
void save_risk_csv(const RiskTensor& risk, const graph::RoadGraph& g, const std::string& path);
RiskTensor load_risk_csv(const std::string& path, const graph::RoadGraph& g);

/// Synthetic params file: header `road_id,pi,n,p`.
void save_params_csv(std::span<const dist::ZinbParams> params, const graph::RoadGraph& g,
                     const std::string& path);
std::vector<dist::ZinbParams> load_params_csv(const std::string& path, const graph::RoadGraph& g);

}  // namespace riskgraph::ingest
