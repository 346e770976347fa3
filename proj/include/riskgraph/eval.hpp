#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskgraph/ingest.hpp"
#include "riskgraph/model.hpp"

namespace riskgraph::eval {

struct MetricsReport {
    std::string model_name;
    std::string window_label;
    double mae = 0.0;
    double mape = 0.0;
    double rmse = 0.0;
    double kld = 0.0;
    double zr = 0.0;
    std::optional<double> hr20;  // empty when the entropy filter keeps nothing
    std::size_t n_entries = 0;
};

double mae(const nn::Tensor& pred, const nn::Tensor& truth);
double rmse(const nn::Tensor& pred, const nn::Tensor& truth);
/// Masked to truth > 0 entries; throws if every truth is zero.
double mape(const nn::Tensor& pred, const nn::Tensor& truth);

/// Integer-bin histograms of truth and rounded predictions over bins
/// 0..max(both), smoothed KL(truth || pred). Negative rounded predictions
/// land in bin 0.
double kld_metric(const nn::Tensor& pred, const nn::Tensor& truth, double epsilon = 1e-6);

/// "Predicted zero" means P(X=0) >= 0.5. Throws if truth has no zeros.
double true_zero_rate(const nn::Tensor& p_zero, const nn::Tensor& truth);

/// Core HR@top_frac on per-road aggregates: rank by risk (ties to lower
/// index), take ceil(top_frac * |V|), keep roads with entropy strictly below
/// the all-roads mean, return fraction of kept roads that are hits.
/// Empty kept set -> nullopt. Throws when |V| < 5.
std::optional<double> hit_rate_core(std::span<const double> road_risk,
                                    std::span<const double> road_entropy,
                                    std::span<const std::uint8_t> road_hit, double top_frac);

/// Single-window adapter over a ForecastDistribution.
std::optional<double> hit_rate(const model::ForecastDistribution& fd, const nn::Tensor& truth,
                               double top_frac = 0.2);

/// Per-road training-period mean (the point forecast, constant over the
/// horizon) plus the empirical histogram summaries standing in for a
/// predictive distribution.
struct HaBaseline {
    std::size_t horizon = 0;
    std::vector<double> road_mean;
    std::vector<double> road_p_zero;
    std::vector<double> road_entropy;  // histogram entropy, nats

    nn::Tensor point() const;  // |V| x k
};

HaBaseline historical_average(const ingest::RiskTensor& train_risk, int horizon);

/// Uniform view of one evaluation run: per test window, |V| x k planes of
/// point mean, P(X=0), and entropy.
struct PredictionSet {
    std::string model_name;
    std::size_t num_nodes = 0;
    std::size_t horizon = 0;
    std::vector<nn::Tensor> mean, p_zero, entropy;  // one plane per window
};

PredictionSet predictions_from_model(const model::Model& m, std::string name,
                                     std::span<const ingest::WindowSample> test,
                                     const graph::AdjacencyMatrix& A);
PredictionSet predictions_from_ha(const HaBaseline& ha, std::string name,
                                  std::size_t n_windows);

/// Concatenates every window's entries and computes all six metrics.
MetricsReport evaluate_model(const PredictionSet& preds,
                             std::span<const ingest::WindowSample> test,
                             const std::string& window_label, double top_frac = 0.2,
                             double kld_epsilon = 1e-6);

/// Fields exactly: model, window, mae, mape, rmse, kld, zr, hr20,
/// hr20_missing, n_entries.
void write_report_json(const MetricsReport& r, const std::string& path);

/// Rows = metrics, columns = models, best value per row marked with '*'
/// (lower is better except zr/hr20).
void write_comparison_csv(std::span<const MetricsReport> reports, const std::string& path);

}  // namespace riskgraph::eval
