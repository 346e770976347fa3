#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "riskgraph/dist.hpp"
#include "riskgraph/graph.hpp"
#include "riskgraph/layers.hpp"

namespace riskgraph::model {

enum class Head { zinb, nb, gauss };

Head parse_head(const std::string& s);
const char* head_name(Head h);

struct ModelConfig {
    Head head = Head::zinb;
    int T = 14;
    int k = 14;
    int gru_hidden = 32;
    int gat_hidden = 32;
    int gat_heads = 2;
    int gat_layers = 1;
    bool scale_inputs = false;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

/// Predicted parameter planes, each |V| x k. Which planes are populated
/// depends on the head: zinb fills pi/n/p, nb fills n/p, gauss fills
/// mu/sigma.
struct ForecastDistribution {
    Head head = Head::zinb;
    std::size_t num_nodes = 0;
    std::size_t horizon = 0;
    nn::Tensor pi, n, p, mu, sigma;

    dist::ZinbParams zinb_at(std::size_t v, std::size_t j) const {
        return {pi.at(v, j), n.at(v, j), p.at(v, j)};
    }
    dist::NbParams nb_at(std::size_t v, std::size_t j) const {
        return {n.at(v, j), p.at(v, j)};
    }
    dist::GaussParams gauss_at(std::size_t v, std::size_t j) const {
        return {mu.at(v, j), sigma.at(v, j)};
    }
};

/// Head-channel Vars of one taped forward pass; which are set mirrors
/// ForecastDistribution. Backward through any loss built on these reaches
/// every parameter leaf held by `tape`.
struct TapedForecast {
    nn::Tape tape;
    nn::Var pi, n, p, mu, sigma;
};

/// GRU-over-time then GAT-over-graph then a dense head emitting per-node,
/// per-step distribution parameters.
class Model {
public:
    /// Seeded parameter initialization; registration order is fixed.
    static Model init(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    std::size_t count_parameters() const { return params_.total_size(); }

    /// X: |V| x T risk counts, F: |V| x T x 8, A: self-loop adjacency.
    ForecastDistribution forward(const nn::Tensor& X, const nn::Tensor& F,
                                 const graph::AdjacencyMatrix& A) const;
    TapedForecast forward_tape(const nn::Tensor& X, const nn::Tensor& F,
                               const graph::AdjacencyMatrix& A) const;

private:
    explicit Model(ModelConfig cfg) : cfg_(cfg) {}

    ModelConfig cfg_;
    nn::ParamStore params_;
};

nn::Tensor predict_point(const ForecastDistribution& fd);
std::pair<nn::Tensor, nn::Tensor> predict_interval(const ForecastDistribution& fd, double level);

// Per-cell distribution summaries used by evaluation and prediction output.
double cell_mean(const ForecastDistribution& fd, std::size_t v, std::size_t j);
double cell_p_zero(const ForecastDistribution& fd, std::size_t v, std::size_t j);
double cell_entropy(const ForecastDistribution& fd, std::size_t v, std::size_t j);
double cell_nll(const ForecastDistribution& fd, std::size_t v, std::size_t j, long long y,
                dist::Y0Form form);

}  // namespace riskgraph::model
