#include "riskgraph/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace riskgraph::nn {

Tensor& ParamStore::add(const std::string& name, Tensor init) {
    if (has(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
    index_[name] = names_.size();
    names_.push_back(name);
    grads_.emplace_back(Tensor::zeros_like(init));
    values_.push_back(std::move(init));
    return values_.back();
}

std::size_t ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("unknown parameter '" + name + "'");
    return it->second;
}

Tensor& ParamStore::value(const std::string& name) { return values_[at(name)]; }
const Tensor& ParamStore::value(const std::string& name) const { return values_[at(name)]; }
Tensor& ParamStore::grad(const std::string& name) { return grads_[at(name)]; }

std::size_t ParamStore::total_size() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
}

void ParamStore::zero_grads() {
    for (auto& g : grads_)
        for (auto& x : g.raw()) x = 0.0;
}

Var Tape::param(const ParamStore& store, const std::string& name) {
    auto it = lookup_.find(name);
    if (it != lookup_.end()) return leaves_[it->second].second;
    Var v = constant(store.value(name));
    lookup_[name] = leaves_.size();
    leaves_.emplace_back(name, v);
    return v;
}

void Tape::flush_grads(ParamStore& store, double scale) const {
    for (const auto& [name, var] : leaves_) {
        if (!var->grad_set) continue;
        Tensor& g = store.grad(name);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * var->grad[i];
    }
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::vector<std::size_t> shape,
                      rng::Engine& e) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t(std::move(shape));
    for (auto& x : t.raw()) x = e.uniform(-s, s);
    return t;
}

void init_dense(ParamStore& store, rng::Engine& e, const std::string& prefix, std::size_t in,
                std::size_t out) {
    store.add(prefix + ".W", glorot_uniform(in, out, {in, out}, e));
    store.add(prefix + ".b", Tensor({1, out}));
}

Var dense(Tape& tape, const ParamStore& store, const std::string& prefix, const Var& x) {
    return add_rowvec(matmul_op(x, tape.param(store, prefix + ".W")),
                      tape.param(store, prefix + ".b"));
}

void init_gru(ParamStore& store, rng::Engine& e, const std::string& prefix, std::size_t in,
              std::size_t hid) {
    for (const char* gate : {"z", "r", "h"}) {
        store.add(prefix + ".W" + gate, glorot_uniform(in, hid, {in, hid}, e));
        store.add(prefix + ".U" + gate, glorot_uniform(hid, hid, {hid, hid}, e));
        store.add(prefix + ".b" + gate, Tensor({1, hid}));
    }
}

Var gru_cell(Tape& tape, const ParamStore& store, const std::string& prefix, const Var& x,
             const Var& h) {
    auto gate = [&](const char* g, const Var& hin) {
        return add_rowvec(add(matmul_op(x, tape.param(store, prefix + ".W" + g)),
                              matmul_op(hin, tape.param(store, prefix + ".U" + g))),
                          tape.param(store, prefix + ".b" + g));
    };
    const Var z = sigmoid_op(gate("z", h));
    const Var r = sigmoid_op(gate("r", h));
    const Var hh = tanh_op(gate("h", mul(r, h)));
    // h' = (1-z) o h + z o hh
    return add(sub(h, mul(z, h)), mul(z, hh));
}

Var gru_encode(Tape& tape, const ParamStore& store, const std::string& prefix,
               const std::vector<Var>& xs, const Var& h0) {
    if (xs.empty()) throw std::invalid_argument("gru_encode: empty sequence");
    Var h = h0;
    for (const Var& x : xs) h = gru_cell(tape, store, prefix, x, h);
    return h;
}

void init_gat(ParamStore& store, rng::Engine& e, const std::string& prefix, std::size_t in,
              std::size_t out_total, std::size_t heads) {
    if (heads == 0 || out_total % heads != 0)
        throw std::invalid_argument("init_gat: head count must divide output width");
    const std::size_t per_head = out_total / heads;
    for (std::size_t head = 0; head < heads; ++head) {
        const std::string hp = prefix + ".h" + std::to_string(head);
        store.add(hp + ".W", glorot_uniform(in, per_head, {in, per_head}, e));
        store.add(hp + ".a_src", glorot_uniform(per_head, 1, {per_head, 1}, e));
        store.add(hp + ".a_dst", glorot_uniform(per_head, 1, {per_head, 1}, e));
    }
}

Var gat_layer(Tape& tape, const ParamStore& store, const std::string& prefix, const Var& h,
              const Tensor& mask, std::size_t heads, bool final_layer) {
    const std::size_t n = h->value.rows();
    for (std::size_t i = 0; i < n; ++i)
        if (mask.at(i, i) == 0.0)
            throw std::invalid_argument("gat_layer: adjacency lacks self-loops");

    Var out;
    for (std::size_t head = 0; head < heads; ++head) {
        const std::string hp = prefix + ".h" + std::to_string(head);
        const Var wh = matmul_op(h, tape.param(store, hp + ".W"));
        const Var f = matmul_op(wh, tape.param(store, hp + ".a_src"));
        const Var g = matmul_op(wh, tape.param(store, hp + ".a_dst"));
        const Var logits = leaky_relu_op(outer_add(f, g), 0.2);
        const Var att = masked_softmax_rows(logits, mask);
        const Var mixed = matmul_op(att, wh);
        out = head == 0 ? mixed : concat_cols(out, mixed);
    }
    return final_layer ? out : elu_op(out);
}

}  // namespace riskgraph::nn
