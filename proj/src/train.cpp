#include "riskgraph/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "riskgraph/csv.hpp"
#include "riskgraph/runtime.hpp"
#include "riskgraph/rng.hpp"

namespace riskgraph::train {

namespace {

using json = nlohmann::json;

nn::Var head_loss(const model::TapedForecast& tf, model::Head head, const nn::Tensor& y,
                  dist::Y0Form form) {
    switch (head) {
        case model::Head::zinb: return nn::zinb_nll_mean(tf.pi, tf.n, tf.p, y, form);
        case model::Head::nb: return nn::nb_nll_mean(tf.n, tf.p, y);
        default: return nn::gauss_nll_mean(tf.mu, tf.sigma, y);
    }
}

std::vector<nn::Tensor> snapshot_params(const nn::ParamStore& params) {
    std::vector<nn::Tensor> copy;
    copy.reserve(params.names().size());
    for (const auto& name : params.names()) copy.push_back(params.value(name));
    return copy;
}

void restore_params(nn::ParamStore& params, const std::vector<nn::Tensor>& snap) {
    std::size_t i = 0;
    for (const auto& name : params.names()) params.value(name) = snap[i++];
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json config_to_json(const model::ModelConfig& cfg) {
    return json{{"head", model::head_name(cfg.head)},
                {"t", cfg.T},
                {"k", cfg.k},
                {"gru_hidden", cfg.gru_hidden},
                {"gat_hidden", cfg.gat_hidden},
                {"gat_heads", cfg.gat_heads},
                {"gat_layers", cfg.gat_layers},
                {"scale_inputs", cfg.scale_inputs},
                {"seed", cfg.seed}};
}

model::ModelConfig config_from_json(const json& j) {
    model::ModelConfig cfg;
    cfg.head = model::parse_head(j.at("head").get<std::string>());
    cfg.T = j.at("t").get<int>();
    cfg.k = j.at("k").get<int>();
    cfg.gru_hidden = j.at("gru_hidden").get<int>();
    cfg.gat_hidden = j.at("gat_hidden").get<int>();
    cfg.gat_heads = j.at("gat_heads").get<int>();
    cfg.gat_layers = j.at("gat_layers").get<int>();
    cfg.scale_inputs = j.at("scale_inputs").get<bool>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("train config: lr must be > 0");
    if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (patience < 0) throw std::invalid_argument("train config: patience must be >= 0");
    if (!(clip_norm > 0.0)) throw std::invalid_argument("train config: clip_norm must be > 0");
}

double batch_nll(const model::ForecastDistribution& fd, const nn::Tensor& y, dist::Y0Form form) {
    if (y.ndim() != 2 || y.rows() != fd.num_nodes || y.cols() != fd.horizon)
        throw std::invalid_argument("batch_nll: target shape mismatch");
    double total = 0.0;
    for (std::size_t v = 0; v < fd.num_nodes; ++v)
        for (std::size_t j = 0; j < fd.horizon; ++j)
            total += model::cell_nll(fd, v, j, static_cast<long long>(y.at(v, j)), form);
    return total / static_cast<double>(fd.num_nodes * fd.horizon);
}

AdamState AdamState::init(const nn::ParamStore& params) {
    AdamState s;
    s.m.reserve(params.names().size());
    s.v.reserve(params.names().size());
    for (const auto& name : params.names()) {
        s.m.push_back(nn::Tensor::zeros_like(params.value(name)));
        s.v.push_back(nn::Tensor::zeros_like(params.value(name)));
    }
    return s;
}

void adam_step(nn::ParamStore& params, AdamState& state, double lr) {
    ++state.t;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    std::size_t pi = 0;
    for (const auto& name : params.names()) {
        nn::Tensor& w = params.value(name);
        const nn::Tensor& g = params.grad(name);
        nn::Tensor& m = state.m[pi];
        nn::Tensor& v = state.v[pi];
        ++pi;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!std::isfinite(g[i]))
                throw NumericError("non-finite gradient in parameter '" + name + "'");
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

double clip_gradients(nn::ParamStore& params, double max_norm) {
    double sq = 0.0;
    for (const auto& name : params.names()) {
        const nn::Tensor& g = params.grad(name);
        for (std::size_t i = 0; i < g.size(); ++i) sq += g[i] * g[i];
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for (const auto& name : params.names()) {
            nn::Tensor& g = params.grad(name);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= scale;
        }
    }
    return norm;
}

TrainHistory train_model(model::Model& m, const std::vector<ingest::WindowSample>& train_set,
                         const std::vector<ingest::WindowSample>& val_set,
                         const graph::AdjacencyMatrix& A, const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty() || val_set.empty())
        throw std::invalid_argument("train_model: training and validation sets must be nonempty");

    const model::Head head = m.config().head;
    auto eval_mean_nll = [&](const std::vector<ingest::WindowSample>& set) {
        std::vector<double> nll(set.size());
        runtime::parallel_for(set.size(), [&](std::size_t i) {
            const auto& s = set[i];
            const auto fd = m.forward(s.input_risk, s.input_features, A);
            nll[i] = batch_nll(fd, s.target_risk, cfg.y0_form);
        });
        double total = 0.0;
        for (double v : nll) total += v;
        return total / static_cast<double>(set.size());
    };

    TrainHistory hist;
    hist.best_val_nll = eval_mean_nll(val_set);
    hist.best_epoch = 0;
    std::vector<nn::Tensor> best = snapshot_params(m.params());

    AdamState adam = AdamState::init(m.params());
    const std::size_t n = train_set.size();
    int since_improve = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        rng::Engine shuffler(rng::mix(cfg.seed, static_cast<std::uint64_t>(epoch)));
        rng::shuffle(order, shuffler);

        double train_sum = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            const std::size_t bs = stop - start;
            m.params().zero_grads();

            // Forward/backward per sample can run concurrently; each tape is
            // private. Gradients are folded into the store sequentially, in
            // sample order, so the accumulated sums are bit-identical
            // regardless of thread count.
            std::vector<model::TapedForecast> tf(bs);
            std::vector<double> loss(bs);
            runtime::parallel_for(bs, [&](std::size_t bi) {
                const auto& s = train_set[order[start + bi]];
                tf[bi] = m.forward_tape(s.input_risk, s.input_features, A);
                const nn::Var l = head_loss(tf[bi], head, s.target_risk, cfg.y0_form);
                loss[bi] = l->value[0];
                if (std::isfinite(loss[bi])) nn::backward(l);
            });
            for (std::size_t bi = 0; bi < bs; ++bi) {
                if (!std::isfinite(loss[bi]))
                    throw NumericError("non-finite training loss at epoch " +
                                       std::to_string(epoch) + ", batch starting at sample " +
                                       std::to_string(start));
                tf[bi].tape.flush_grads(m.params(), 1.0 / static_cast<double>(bs));
                train_sum += loss[bi];
            }
            clip_gradients(m.params(), cfg.clip_norm);
            adam_step(m.params(), adam, cfg.lr);
        }

        const double train_nll = train_sum / static_cast<double>(n);
        const double val_nll = eval_mean_nll(val_set);
        if (!std::isfinite(val_nll))
            throw NumericError("non-finite validation NLL at epoch " + std::to_string(epoch));
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        hist.epochs.push_back({epoch, train_nll, val_nll, seconds});

        if (val_nll < hist.best_val_nll) {
            hist.best_val_nll = val_nll;
            hist.best_epoch = epoch;
            best = snapshot_params(m.params());
            since_improve = 0;
        } else {
            ++since_improve;
        }
        if (cfg.verbose)
            std::fprintf(stderr, "epoch %d train_nll %.6f val_nll %.6f (best %.6f @ %d) %.2fs\n",
                         epoch, train_nll, val_nll, hist.best_val_nll, hist.best_epoch, seconds);
        if (since_improve > cfg.patience) break;
    }

    restore_params(m.params(), best);
    return hist;
}

void write_history_csv(const TrainHistory& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "epoch,train_nll,val_nll,seconds\n";
    for (const auto& e : h.epochs)
        out << e.epoch << ',' << csv::format_double(e.train_nll) << ','
            << csv::format_double(e.val_nll) << ",0\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

void save_checkpoint(const model::Model& m, std::uint64_t graph_hash, std::uint64_t train_seed,
                     const std::string& path) {
    json j;
    j["format"] = "riskgraph-checkpoint-v1";
    j["config"] = config_to_json(m.config());
    j["graph_hash"] = hash_hex(graph_hash);
    j["train_seed"] = train_seed;
    json params = json::array();
    for (const auto& name : m.params().names()) {
        const nn::Tensor& t = m.params().value(name);
        json entry;
        entry["name"] = name;
        entry["shape"] = t.shape();
        entry["values"] = t.raw();
        params.push_back(std::move(entry));
    }
    j["params"] = std::move(params);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path,
                                 std::optional<std::uint64_t> expected_graph_hash) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw std::invalid_argument("corrupt checkpoint " + path + ": " + ex.what());
    }

    try {
        if (j.at("format").get<std::string>() != "riskgraph-checkpoint-v1")
            throw std::invalid_argument("unrecognized checkpoint format");

        const std::uint64_t hash = std::stoull(j.at("graph_hash").get<std::string>(), nullptr, 16);
        if (expected_graph_hash && hash != *expected_graph_hash)
            throw std::invalid_argument("checkpoint was trained on a different graph (node-order hash " +
                                     j.at("graph_hash").get<std::string>() + ")");

        LoadedCheckpoint out{model::Model::init(config_from_json(j.at("config"))), hash,
                             j.at("train_seed").get<std::uint64_t>()};

        std::size_t loaded = 0;
        for (const auto& entry : j.at("params")) {
            const auto name = entry.at("name").get<std::string>();
            if (!out.m.params().has(name))
                throw std::invalid_argument("checkpoint parameter '" + name + "' not in model");
            nn::Tensor& t = out.m.params().value(name);
            const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
            const auto values = entry.at("values").get<std::vector<double>>();
            if (shape != t.shape() || values.size() != t.size())
                throw std::invalid_argument("checkpoint parameter '" + name + "' has wrong shape");
            t = nn::Tensor(shape, values);
            ++loaded;
        }
        if (loaded != out.m.params().names().size())
            throw std::invalid_argument("checkpoint is missing parameters (" + std::to_string(loaded) +
                                     " of " + std::to_string(out.m.params().names().size()) + ")");
        return out;
    } catch (const json::exception& ex) {
        throw std::invalid_argument("malformed checkpoint " + path + ": " + ex.what());
    }
}

}  // namespace riskgraph::train
