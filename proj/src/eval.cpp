#include "riskgraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "riskgraph/csv.hpp"
#include "riskgraph/dist.hpp"

namespace riskgraph::eval {

namespace {

void require_same_shape(const nn::Tensor& a, const nn::Tensor& b, const char* what) {
    if (!a.same_shape(b) || a.size() == 0)
        throw std::invalid_argument(std::string(what) + ": shapes must match and be nonempty");
}

long long bin_of(double pred) {
    const long long r = std::llround(pred);
    return r < 0 ? 0 : r;
}

}  // namespace

double mae(const nn::Tensor& pred, const nn::Tensor& truth) {
    require_same_shape(pred, truth, "mae");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

double rmse(const nn::Tensor& pred, const nn::Tensor& truth) {
    require_same_shape(pred, truth, "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

double mape(const nn::Tensor& pred, const nn::Tensor& truth) {
    require_same_shape(pred, truth, "mape");
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] > 0.0) {
            s += std::abs(pred[i] - truth[i]) / truth[i];
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("mape: every truth entry is zero");
    return s / static_cast<double>(n);
}

double kld_metric(const nn::Tensor& pred, const nn::Tensor& truth, double epsilon) {
    require_same_shape(pred, truth, "kld_metric");
    long long max_bin = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        max_bin = std::max(max_bin, static_cast<long long>(truth[i]));
        max_bin = std::max(max_bin, bin_of(pred[i]));
    }
    std::vector<double> truth_hist(static_cast<std::size_t>(max_bin) + 1, 0.0);
    std::vector<double> pred_hist(truth_hist.size(), 0.0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth_hist[static_cast<std::size_t>(truth[i])] += 1.0;
        pred_hist[static_cast<std::size_t>(bin_of(pred[i]))] += 1.0;
    }
    return dist::kl_histogram(truth_hist, pred_hist, epsilon);
}

double true_zero_rate(const nn::Tensor& p_zero, const nn::Tensor& truth) {
    require_same_shape(p_zero, truth, "true_zero_rate");
    std::size_t zeros = 0, predicted = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0.0) {
            ++zeros;
            if (p_zero[i] >= 0.5) ++predicted;
        }
    }
    if (zeros == 0) throw std::invalid_argument("true_zero_rate: truth has no zeros");
    return static_cast<double>(predicted) / static_cast<double>(zeros);
}

std::optional<double> hit_rate_core(std::span<const double> road_risk,
                                    std::span<const double> road_entropy,
                                    std::span<const std::uint8_t> road_hit, double top_frac) {
    const std::size_t nv = road_risk.size();
    if (nv < 5) throw std::invalid_argument("hit_rate: need at least 5 roads");
    if (road_entropy.size() != nv || road_hit.size() != nv)
        throw std::invalid_argument("hit_rate: per-road array lengths differ");

    const auto top =
        static_cast<std::size_t>(std::ceil(top_frac * static_cast<double>(nv)));
    std::vector<std::size_t> idx(nv);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (road_risk[a] != road_risk[b]) return road_risk[a] > road_risk[b];
        return a < b;
    });

    const double mean_entropy =
        std::accumulate(road_entropy.begin(), road_entropy.end(), 0.0) /
        static_cast<double>(nv);

    std::size_t kept = 0, hits = 0;
    for (std::size_t r = 0; r < top; ++r) {
        const std::size_t v = idx[r];
        if (road_entropy[v] < mean_entropy) {
            ++kept;
            if (road_hit[v]) ++hits;
        }
    }
    if (kept == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(kept);
}

std::optional<double> hit_rate(const model::ForecastDistribution& fd, const nn::Tensor& truth,
                               double top_frac) {
    const std::size_t nv = fd.num_nodes, k = fd.horizon;
    if (truth.ndim() != 2 || truth.rows() != nv || truth.cols() != k)
        throw std::invalid_argument("hit_rate: truth shape mismatch");
    std::vector<double> risk(nv, 0.0), entropy(nv, 0.0);
    std::vector<std::uint8_t> hit(nv, 0);
    for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t j = 0; j < k; ++j) {
            risk[v] += model::cell_mean(fd, v, j);
            entropy[v] += model::cell_entropy(fd, v, j);
            if (truth.at(v, j) > 0.0) hit[v] = 1;
        }
        risk[v] /= static_cast<double>(k);
        entropy[v] /= static_cast<double>(k);
    }
    return hit_rate_core(risk, entropy, hit, top_frac);
}

nn::Tensor HaBaseline::point() const {
    nn::Tensor out({road_mean.size(), horizon});
    for (std::size_t v = 0; v < road_mean.size(); ++v)
        for (std::size_t j = 0; j < horizon; ++j) out.at(v, j) = road_mean[v];
    return out;
}

HaBaseline historical_average(const ingest::RiskTensor& train_risk, int horizon) {
    if (train_risk.num_days() == 0 || train_risk.num_nodes == 0 || horizon < 1)
        throw std::invalid_argument("historical_average: empty training period");
    const std::size_t nv = train_risk.num_nodes, nd = train_risk.num_days();
    HaBaseline ha;
    ha.horizon = static_cast<std::size_t>(horizon);
    ha.road_mean.resize(nv);
    ha.road_p_zero.resize(nv);
    ha.road_entropy.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        long long total = 0, max_val = 0, zeros = 0;
        for (std::size_t d = 0; d < nd; ++d) {
            const long long x = train_risk.at(v, d);
            total += x;
            max_val = std::max(max_val, x);
            zeros += (x == 0);
        }
        ha.road_mean[v] = static_cast<double>(total) / static_cast<double>(nd);
        ha.road_p_zero[v] = static_cast<double>(zeros) / static_cast<double>(nd);

        std::vector<double> counts(static_cast<std::size_t>(max_val) + 1, 0.0);
        for (std::size_t d = 0; d < nd; ++d)
            counts[static_cast<std::size_t>(train_risk.at(v, d))] += 1.0;
        double h = 0.0;
        for (double c : counts) {
            if (c > 0.0) {
                const double p = c / static_cast<double>(nd);
                h -= p * std::log(p);
            }
        }
        ha.road_entropy[v] = h;
    }
    return ha;
}

PredictionSet predictions_from_model(const model::Model& m, std::string name,
                                     std::span<const ingest::WindowSample> test,
                                     const graph::AdjacencyMatrix& A) {
    PredictionSet ps;
    ps.model_name = std::move(name);
    ps.horizon = static_cast<std::size_t>(m.config().k);
    for (const auto& s : test) {
        const auto fd = m.forward(s.input_risk, s.input_features, A);
        ps.num_nodes = fd.num_nodes;
        nn::Tensor mean({fd.num_nodes, fd.horizon});
        nn::Tensor pz({fd.num_nodes, fd.horizon});
        nn::Tensor ent({fd.num_nodes, fd.horizon});
        for (std::size_t v = 0; v < fd.num_nodes; ++v) {
            for (std::size_t j = 0; j < fd.horizon; ++j) {
                mean.at(v, j) = model::cell_mean(fd, v, j);
                pz.at(v, j) = model::cell_p_zero(fd, v, j);
                ent.at(v, j) = model::cell_entropy(fd, v, j);
            }
        }
        ps.mean.push_back(std::move(mean));
        ps.p_zero.push_back(std::move(pz));
        ps.entropy.push_back(std::move(ent));
    }
    return ps;
}

PredictionSet predictions_from_ha(const HaBaseline& ha, std::string name, std::size_t n_windows) {
    PredictionSet ps;
    ps.model_name = std::move(name);
    ps.num_nodes = ha.road_mean.size();
    ps.horizon = ha.horizon;
    nn::Tensor mean = ha.point();
    nn::Tensor pz({ps.num_nodes, ps.horizon});
    nn::Tensor ent({ps.num_nodes, ps.horizon});
    for (std::size_t v = 0; v < ps.num_nodes; ++v) {
        for (std::size_t j = 0; j < ps.horizon; ++j) {
            pz.at(v, j) = ha.road_p_zero[v];
            ent.at(v, j) = ha.road_entropy[v];
        }
    }
    for (std::size_t w = 0; w < n_windows; ++w) {
        ps.mean.push_back(mean);
        ps.p_zero.push_back(pz);
        ps.entropy.push_back(ent);
    }
    return ps;
}

MetricsReport evaluate_model(const PredictionSet& preds,
                             std::span<const ingest::WindowSample> test,
                             const std::string& window_label, double top_frac,
                             double kld_epsilon) {
    if (test.empty()) throw std::invalid_argument("evaluate_model: empty test set");
    if (preds.mean.size() != test.size())
        throw std::invalid_argument("evaluate_model: prediction/test window count mismatch");

    const std::size_t nv = preds.num_nodes, k = preds.horizon, nw = test.size();
    const std::size_t total = nw * nv * k;

    // Concatenated entry vectors.
    nn::Tensor flat_mean({total}), flat_pz({total}), flat_truth({total});
    std::vector<double> road_risk(nv, 0.0), road_entropy(nv, 0.0);
    std::vector<std::uint8_t> road_hit(nv, 0);

    std::size_t pos = 0;
    for (std::size_t w = 0; w < nw; ++w) {
        const auto& truth = test[w].target_risk;
        if (truth.rows() != nv || truth.cols() != k)
            throw std::invalid_argument("evaluate_model: target shape mismatch");
        for (std::size_t v = 0; v < nv; ++v) {
            for (std::size_t j = 0; j < k; ++j, ++pos) {
                flat_mean[pos] = preds.mean[w].at(v, j);
                flat_pz[pos] = preds.p_zero[w].at(v, j);
                flat_truth[pos] = truth.at(v, j);
                road_risk[v] += preds.mean[w].at(v, j);
                road_entropy[v] += preds.entropy[w].at(v, j);
                if (truth.at(v, j) > 0.0) road_hit[v] = 1;
            }
        }
    }
    const double per_road = static_cast<double>(nw * k);
    for (std::size_t v = 0; v < nv; ++v) {
        road_risk[v] /= per_road;
        road_entropy[v] /= per_road;
    }

    MetricsReport r;
    r.model_name = preds.model_name;
    r.window_label = window_label;
    r.n_entries = total;
    r.mae = mae(flat_mean, flat_truth);
    r.mape = mape(flat_mean, flat_truth);
    r.rmse = rmse(flat_mean, flat_truth);
    r.kld = kld_metric(flat_mean, flat_truth, kld_epsilon);
    r.zr = true_zero_rate(flat_pz, flat_truth);
    r.hr20 = hit_rate_core(road_risk, road_entropy, road_hit, top_frac);
    return r;
}

void write_report_json(const MetricsReport& r, const std::string& path) {
    nlohmann::ordered_json j;
    j["model"] = r.model_name;
    j["window"] = r.window_label;
    j["mae"] = r.mae;
    j["mape"] = r.mape;
    j["rmse"] = r.rmse;
    j["kld"] = r.kld;
    j["zr"] = r.zr;
    if (r.hr20)
        j["hr20"] = *r.hr20;
    else
        j["hr20"] = nullptr;
    j["hr20_missing"] = !r.hr20.has_value();
    j["n_entries"] = r.n_entries;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_comparison_csv(std::span<const MetricsReport> reports, const std::string& path) {
    if (reports.empty()) throw std::invalid_argument("write_comparison_csv: no reports");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");

    out << "metric";
    for (const auto& r : reports) out << ',' << r.model_name;
    out << '\n';

    struct RowSpec {
        const char* name;
        bool higher_better;
    };
    const RowSpec rows[] = {{"mae", false}, {"mape", false}, {"rmse", false},
                            {"kld", false}, {"zr", true},    {"hr20", true}};
    for (const auto& row : rows) {
        auto value_of = [&](const MetricsReport& r) -> std::optional<double> {
            if (std::string(row.name) == "mae") return r.mae;
            if (std::string(row.name) == "mape") return r.mape;
            if (std::string(row.name) == "rmse") return r.rmse;
            if (std::string(row.name) == "kld") return r.kld;
            if (std::string(row.name) == "zr") return r.zr;
            return r.hr20;
        };
        std::optional<double> best;
        for (const auto& r : reports) {
            const auto v = value_of(r);
            if (!v) continue;
            if (!best || (row.higher_better ? *v > *best : *v < *best)) best = *v;
        }
        out << row.name;
        for (const auto& r : reports) {
            const auto v = value_of(r);
            out << ',';
            if (v) {
                out << csv::format_double(*v);
                if (best && *v == *best) out << '*';
            }
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace riskgraph::eval
