#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "riskgraph/autodiff.hpp"
#include "riskgraph/rng.hpp"
#include "riskgraph/tensor.hpp"

namespace riskgraph::nn {

/// Named parameters with matching gradient buffers. Registration order is
/// fixed and drives optimizer state layout, gradient flushing, and the
/// checkpoint parameter sequence, so it must be deterministic.
class ParamStore {
public:
    Tensor& add(const std::string& name, Tensor init);

    bool has(const std::string& name) const { return index_.count(name) != 0; }
    Tensor& value(const std::string& name);
    const Tensor& value(const std::string& name) const;
    Tensor& grad(const std::string& name);

    const std::vector<std::string>& names() const { return names_; }
    std::size_t total_size() const;
    void zero_grads();

private:
    std::size_t at(const std::string& name) const;

    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Tensor> values_;
    std::vector<Tensor> grads_;
};

/// One forward pass worth of graph. Parameter leaves are created on first
/// use and remembered so repeated references share a node; flush_grads adds
/// their accumulated gradients back into the store in registration order.
class Tape {
public:
    Var param(const ParamStore& store, const std::string& name);
    void flush_grads(ParamStore& store, double scale = 1.0) const;

private:
    std::vector<std::pair<std::string, Var>> leaves_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

/// Glorot-uniform sample: uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out,
                      std::vector<std::size_t> shape, rng::Engine& e);

// Each init_* registers the block's parameters (weights Glorot, biases
// zero); the matching layer function consumes them by prefix.
void init_dense(ParamStore& store, rng::Engine& e, const std::string& prefix, std::size_t in,
                std::size_t out);
Var dense(Tape& tape, const ParamStore& store, const std::string& prefix, const Var& x);

void init_gru(ParamStore& store, rng::Engine& e, const std::string& prefix, std::size_t in,
              std::size_t hid);
Var gru_cell(Tape& tape, const ParamStore& store, const std::string& prefix, const Var& x,
             const Var& h);
/// Folds gru_cell over xs left to right; throws on empty input.
Var gru_encode(Tape& tape, const ParamStore& store, const std::string& prefix,
               const std::vector<Var>& xs, const Var& h0);

/// out_total must divide evenly across heads.
void init_gat(ParamStore& store, rng::Engine& e, const std::string& prefix, std::size_t in,
              std::size_t out_total, std::size_t heads);
/// mask is the self-loop adjacency; `final` selects identity over ELU.
Var gat_layer(Tape& tape, const ParamStore& store, const std::string& prefix, const Var& h,
              const Tensor& mask, std::size_t heads, bool final_layer);

}  // namespace riskgraph::nn
