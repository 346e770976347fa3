#include "riskgraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskgraph::model {

namespace {

std::size_t head_channels(Head h) { return h == Head::zinb ? 3 : 2; }

struct HeadVars {
    nn::Var c0, c1, c2;  // link-mapped channel planes, |V| x k
};

}  // namespace

Head parse_head(const std::string& s) {
    if (s == "zinb") return Head::zinb;
    if (s == "nb") return Head::nb;
    if (s == "gauss") return Head::gauss;
    throw std::invalid_argument("unknown model head '" + s + "'");
}

const char* head_name(Head h) {
    switch (h) {
        case Head::zinb: return "zinb";
        case Head::nb: return "nb";
        default: return "gauss";
    }
}

void ModelConfig::validate() const {
    if (T < 1 || k < 1) throw std::invalid_argument("model config: T and k must be >= 1");
    if (gru_hidden < 1 || gat_hidden < 1 || gat_heads < 1 || gat_layers < 1)
        throw std::invalid_argument("model config: sizes must be >= 1");
    if (gat_hidden % gat_heads != 0)
        throw std::invalid_argument("model config: gat_heads must divide gat_hidden");
}

Model Model::init(const ModelConfig& cfg) {
    cfg.validate();
    Model m(cfg);
    rng::Engine e(cfg.seed);
    const std::size_t in = 1 + 8;  // risk value + calendar features
    nn::init_gru(m.params_, e, "gru", in, static_cast<std::size_t>(cfg.gru_hidden));
    std::size_t width = static_cast<std::size_t>(cfg.gru_hidden);
    for (int l = 0; l < cfg.gat_layers; ++l) {
        nn::init_gat(m.params_, e, "gat" + std::to_string(l), width,
                     static_cast<std::size_t>(cfg.gat_hidden),
                     static_cast<std::size_t>(cfg.gat_heads));
        width = static_cast<std::size_t>(cfg.gat_hidden);
    }
    nn::init_dense(m.params_, e, "head", width,
                   head_channels(cfg.head) * static_cast<std::size_t>(cfg.k));
    return m;
}

namespace {

/// Shared forward graph construction; returns the link-mapped channel Vars.
HeadVars run_forward(const ModelConfig& cfg, const nn::ParamStore& store, nn::Tape& tape,
                     const nn::Tensor& X, const nn::Tensor& F, const graph::AdjacencyMatrix& A) {
    const auto T = static_cast<std::size_t>(cfg.T);
    const auto k = static_cast<std::size_t>(cfg.k);
    if (X.ndim() != 2 || X.cols() != T) throw std::invalid_argument("forward: X must be |V| x T");
    const std::size_t nv = X.rows();
    if (F.ndim() != 3 || F.shape()[0] != nv || F.shape()[1] != T || F.shape()[2] != 8)
        throw std::invalid_argument("forward: F must be |V| x T x 8");
    if (A.n != nv) throw std::invalid_argument("forward: adjacency size mismatch");
    if (!A.self_loops) throw std::invalid_argument("forward: adjacency lacks self-loops");

    std::vector<double> scale(nv, 1.0);
    if (cfg.scale_inputs) {
        for (std::size_t v = 0; v < nv; ++v) {
            double mx = 1.0;
            for (std::size_t t = 0; t < T; ++t) mx = std::max(mx, X.at(v, t));
            scale[v] = mx;
        }
    }

    std::vector<nn::Var> xs;
    xs.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        nn::Tensor step({nv, 9});
        for (std::size_t v = 0; v < nv; ++v) {
            step.at(v, 0) = X.at(v, t) / scale[v];
            for (std::size_t c = 0; c < 8; ++c) step.at(v, 1 + c) = F.at(v, t, c);
        }
        xs.push_back(nn::constant(std::move(step)));
    }

    nn::Var h = nn::constant(nn::Tensor({nv, static_cast<std::size_t>(cfg.gru_hidden)}));
    h = nn::gru_encode(tape, store, "gru", xs, h);

    nn::Tensor mask({A.n, A.n}, A.values);
    for (int l = 0; l < cfg.gat_layers; ++l)
        h = nn::gat_layer(tape, store, "gat" + std::to_string(l), h, mask,
                          static_cast<std::size_t>(cfg.gat_heads), l + 1 == cfg.gat_layers);

    const nn::Var raw = nn::dense(tape, store, "head", h);

    HeadVars out;
    if (cfg.head == Head::zinb) {
        out.c0 = nn::sadd(nn::softplus_op(nn::slice_cols(raw, 0, k)), dist::kMinN);
        out.c1 = nn::clamp_op(nn::sigmoid_op(nn::slice_cols(raw, k, 2 * k)), dist::kMinP,
                              dist::kMaxP);
        out.c2 = nn::clamp_op(nn::sigmoid_op(nn::slice_cols(raw, 2 * k, 3 * k)), 0.0,
                              dist::kMaxPi);
    } else if (cfg.head == Head::nb) {
        out.c0 = nn::sadd(nn::softplus_op(nn::slice_cols(raw, 0, k)), dist::kMinN);
        out.c1 = nn::clamp_op(nn::sigmoid_op(nn::slice_cols(raw, k, 2 * k)), dist::kMinP,
                              dist::kMaxP);
    } else {
        out.c0 = nn::slice_cols(raw, 0, k);
        out.c1 = nn::sadd(nn::softplus_op(nn::slice_cols(raw, k, 2 * k)), 1e-4);
    }
    return out;
}

}  // namespace

ForecastDistribution Model::forward(const nn::Tensor& X, const nn::Tensor& F,
                                    const graph::AdjacencyMatrix& A) const {
    nn::Tape tape;
    const HeadVars hv = run_forward(cfg_, params_, tape, X, F, A);
    ForecastDistribution fd;
    fd.head = cfg_.head;
    fd.num_nodes = X.rows();
    fd.horizon = static_cast<std::size_t>(cfg_.k);
    if (cfg_.head == Head::zinb) {
        fd.n = hv.c0->value;
        fd.p = hv.c1->value;
        fd.pi = hv.c2->value;
    } else if (cfg_.head == Head::nb) {
        fd.n = hv.c0->value;
        fd.p = hv.c1->value;
    } else {
        fd.mu = hv.c0->value;
        fd.sigma = hv.c1->value;
    }
    return fd;
}

TapedForecast Model::forward_tape(const nn::Tensor& X, const nn::Tensor& F,
                                  const graph::AdjacencyMatrix& A) const {
    TapedForecast tf;
    const HeadVars hv = run_forward(cfg_, params_, tf.tape, X, F, A);
    if (cfg_.head == Head::zinb) {
        tf.n = hv.c0;
        tf.p = hv.c1;
        tf.pi = hv.c2;
    } else if (cfg_.head == Head::nb) {
        tf.n = hv.c0;
        tf.p = hv.c1;
    } else {
        tf.mu = hv.c0;
        tf.sigma = hv.c1;
    }
    return tf;
}

double cell_mean(const ForecastDistribution& fd, std::size_t v, std::size_t j) {
    switch (fd.head) {
        case Head::zinb: return dist::zinb_mean(fd.zinb_at(v, j));
        case Head::nb: return dist::nb_mean(fd.nb_at(v, j));
        default: return fd.mu.at(v, j);
    }
}

double cell_p_zero(const ForecastDistribution& fd, std::size_t v, std::size_t j) {
    switch (fd.head) {
        case Head::zinb: return dist::zinb_p_zero(fd.zinb_at(v, j));
        case Head::nb: return dist::zinb_p_zero({0.0, fd.n.at(v, j), fd.p.at(v, j)});
        default: return dist::gauss_p_zero(fd.gauss_at(v, j));
    }
}

double cell_entropy(const ForecastDistribution& fd, std::size_t v, std::size_t j) {
    switch (fd.head) {
        case Head::zinb: return dist::zinb_entropy(fd.zinb_at(v, j));
        case Head::nb: return dist::zinb_entropy({0.0, fd.n.at(v, j), fd.p.at(v, j)});
        default: return dist::gauss_entropy_discrete(fd.gauss_at(v, j));
    }
}

double cell_nll(const ForecastDistribution& fd, std::size_t v, std::size_t j, long long y,
                dist::Y0Form form) {
    switch (fd.head) {
        case Head::zinb: return dist::zinb_nll(fd.zinb_at(v, j), y, form);
        case Head::nb: return -dist::nb_loglik(fd.nb_at(v, j), y);
        default: return -dist::gauss_loglik(fd.gauss_at(v, j), static_cast<double>(y));
    }
}

nn::Tensor predict_point(const ForecastDistribution& fd) {
    nn::Tensor out({fd.num_nodes, fd.horizon});
    for (std::size_t v = 0; v < fd.num_nodes; ++v)
        for (std::size_t j = 0; j < fd.horizon; ++j) out.at(v, j) = cell_mean(fd, v, j);
    return out;
}

std::pair<nn::Tensor, nn::Tensor> predict_interval(const ForecastDistribution& fd, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("predict_interval: level must be in (0,1)");
    nn::Tensor lo({fd.num_nodes, fd.horizon});
    nn::Tensor hi({fd.num_nodes, fd.horizon});
    for (std::size_t v = 0; v < fd.num_nodes; ++v) {
        for (std::size_t j = 0; j < fd.horizon; ++j) {
            if (fd.head == Head::gauss) {
                const auto q = fd.gauss_at(v, j);
                const double z = dist::normal_quantile(0.5 + level / 2.0);
                lo.at(v, j) = q.mu - z * q.sigma;
                hi.at(v, j) = q.mu + z * q.sigma;
            } else {
                const dist::ZinbParams q = fd.head == Head::zinb
                                               ? fd.zinb_at(v, j)
                                               : dist::ZinbParams{0.0, fd.n.at(v, j), fd.p.at(v, j)};
                const auto [a, b] = dist::confidence_interval(q, level);
                lo.at(v, j) = static_cast<double>(a);
                hi.at(v, j) = static_cast<double>(b);
            }
        }
    }
    return {std::move(lo), std::move(hi)};
}

}  // namespace riskgraph::model
