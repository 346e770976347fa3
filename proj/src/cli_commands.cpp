#include "riskgraph/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "riskgraph/calendar.hpp"
#include "riskgraph/csv.hpp"
#include "riskgraph/eval.hpp"
#include "riskgraph/rng.hpp"

namespace riskgraph::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

void require_path(const std::string& value, const char* key) {
    if (value.empty()) bad(std::string("config: ") + key + " is required for this command");
}

std::string out_file(const RunConfig& c, const std::string& name) {
    return (fs::path(c.paths.out_dir) / name).string();
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

void finish_outputs(const RunConfig& c) {
    write_resolved_config(c, out_file(c, "resolved_config.json"));
}

std::vector<cal::Day> day_range(cal::Day first, cal::Day last) {
    std::vector<cal::Day> days;
    days.reserve(static_cast<std::size_t>(last - first + 1));
    for (cal::Day d = first; d <= last; ++d) days.push_back(d);
    return days;
}

const char* table_name(model::Head h) {
    switch (h) {
        case model::Head::zinb: return "STZINB";
        case model::Head::nb: return "STNB";
        default: return "STG";
    }
}

struct Dataset {
    graph::RoadGraph g;
    ingest::RiskTensor risk;
    ingest::SplitResult split;
    graph::AdjacencyMatrix A;
};

/// Shared train/evaluate input path: graph + risk tensor + windowed split.
Dataset load_dataset(const RunConfig& c) {
    require_path(c.paths.nodes, "paths.nodes");
    require_path(c.paths.edges, "paths.edges");
    require_path(c.paths.risk, "paths.risk");

    Dataset d;
    d.g = graph::load_graph(c.paths.nodes, c.paths.edges);
    d.risk = ingest::load_risk_csv(c.paths.risk, d.g);
    const auto features = ingest::build_features(d.g.num_nodes(), d.risk.day_index);
    auto samples =
        ingest::make_windows(d.risk, features, c.window.t, c.window.k, c.window.stride);
    d.split = ingest::chronological_split(std::move(samples), c.split.train_frac,
                                          c.split.val_frac);
    d.A = graph::adjacency(d.g, true);
    return d;
}

}  // namespace

void cmd_ingest(const RunConfig& c) {
    require_path(c.paths.nodes, "paths.nodes");
    require_path(c.paths.edges, "paths.edges");
    require_path(c.paths.accidents, "paths.accidents");
    require_path(c.paths.out_dir, "paths.out_dir");
    if (c.period_start.empty() || c.period_end.empty())
        bad("config: study_period.start and study_period.end are required for ingest");
    const cal::Day first = cal::parse_iso_date(c.period_start);
    const cal::Day last = cal::parse_iso_date(c.period_end);
    if (first > last) bad("config: study_period.start is after study_period.end");

    const auto g = graph::load_graph(c.paths.nodes, c.paths.edges);
    const auto records = ingest::load_accidents_csv(c.paths.accidents);
    auto days = day_range(first, last);
    const auto base = ingest::assign_accidents(records, g, c.severity_weights, days);
    const auto risk =
        ingest::apply_spillover(base, g, c.spillover.alpha1, c.spillover.alpha2, std::move(days));

    fs::create_directories(c.paths.out_dir);
    ingest::save_risk_csv(risk, g, out_file(c, "risk.csv"));
    json summary;
    summary["num_nodes"] = g.num_nodes();
    summary["num_days"] = risk.num_days();
    summary["num_accidents"] = records.size();
    summary["zero_rate"] = risk.zero_fraction();
    write_json_file(summary, out_file(c, "summary.json"));
    finish_outputs(c);

    std::printf("ingest: %zu roads, %zu days, %zu accidents, zero rate %s\n", g.num_nodes(),
                risk.num_days(), records.size(),
                csv::format_double(risk.zero_fraction()).c_str());
}

void cmd_synth(const RunConfig& c) {
    require_path(c.paths.out_dir, "paths.out_dir");
    if (c.synth.n_nodes < 1) bad("config: synth.n_nodes must be >= 1");
    if (c.synth.n_days < 1) bad("config: synth.n_days must be >= 1");
    const cal::Day start = cal::parse_iso_date(c.synth.start_date);

    const auto gm = c.synth.graph_model == "grid" ? ingest::GraphModel::grid
                                                  : ingest::GraphModel::random_geometric;
    const auto g =
        ingest::generate_synthetic_graph(c.synth.n_nodes, gm, rng::mix(c.seeds.data_seed, 1));

    std::vector<dist::ZinbParams> params;
    ingest::RiskTensor risk;
    if (c.synth.series == "zinb") {
        rng::Engine eng(c.seeds.data_seed);
        params.reserve(g.num_nodes());
        for (std::size_t v = 0; v < g.num_nodes(); ++v) {
            dist::ZinbParams q;
            q.pi = eng.uniform(c.synth.pi_lo, c.synth.pi_hi);
            q.n = eng.uniform(c.synth.n_lo, c.synth.n_hi);
            q.p = eng.uniform(c.synth.p_lo, c.synth.p_hi);
            dist::validate(q);
            params.push_back(q);
        }
        risk = ingest::generate_zinb_series(g, c.synth.n_days, params,
                                            rng::mix(c.seeds.data_seed, 2), start);
    } else {
        risk = ingest::generate_bursty_series(g, c.synth.n_days, c.synth.burst,
                                              rng::mix(c.seeds.data_seed, 2), start);
    }

    fs::create_directories(c.paths.out_dir);
    graph::save_graph(g, out_file(c, "nodes.csv"), out_file(c, "edges.csv"));
    ingest::save_risk_csv(risk, g, out_file(c, "risk.csv"));
    if (!params.empty()) ingest::save_params_csv(params, g, out_file(c, "params.csv"));
    json summary;
    summary["num_nodes"] = g.num_nodes();
    summary["num_edges"] = g.num_edges();
    summary["num_days"] = risk.num_days();
    summary["graph_model"] = c.synth.graph_model;
    summary["series"] = c.synth.series;
    summary["zero_rate"] = risk.zero_fraction();
    write_json_file(summary, out_file(c, "summary.json"));
    finish_outputs(c);

    std::printf("synth: %zu roads, %zu days (%s/%s), zero rate %s\n", g.num_nodes(),
                risk.num_days(), c.synth.graph_model.c_str(), c.synth.series.c_str(),
                csv::format_double(risk.zero_fraction()).c_str());
}

void cmd_train(const RunConfig& c) {
    require_path(c.paths.out_dir, "paths.out_dir");
    const auto mcfg = model_config(c);
    mcfg.validate();
    const auto tcfg = train_config(c);
    tcfg.validate();
    const auto data = load_dataset(c);

    auto m = model::Model::init(mcfg);
    const auto hist = train::train_model(m, data.split.train, data.split.val, data.A, tcfg);

    fs::create_directories(c.paths.out_dir);
    const std::string head = model::head_name(mcfg.head);
    train::save_checkpoint(m, data.g.node_order_hash(), c.seeds.train_seed,
                           out_file(c, "checkpoint_" + head + ".json"));
    train::write_history_csv(hist, out_file(c, "history_" + head + ".csv"));
    finish_outputs(c);

    std::printf("train: %s head, %zu/%zu/%zu windows, best val nll %s at epoch %d\n",
                head.c_str(), data.split.train.size(), data.split.val.size(),
                data.split.test.size(), csv::format_double(hist.best_val_nll).c_str(),
                hist.best_epoch);
}

void cmd_evaluate(const RunConfig& c) {
    require_path(c.paths.out_dir, "paths.out_dir");
    if (c.eval.checkpoints.empty() && !c.eval.include_ha)
        bad("config: eval has no checkpoints and include_ha is false; nothing to evaluate");
    const auto data = load_dataset(c);
    const auto& test = data.split.test;
    const std::string label = c.window.display();

    std::vector<eval::MetricsReport> reports;
    std::set<std::string> seen;
    for (const auto& path : c.eval.checkpoints) {
        auto lc = train::load_checkpoint(path, data.g.node_order_hash());
        const auto& mc = lc.m.config();
        if (mc.T != c.window.t || mc.k != c.window.k)
            bad("checkpoint " + path + " was trained with T=" + std::to_string(mc.T) +
                ", k=" + std::to_string(mc.k) + " but the window is " + label);
        const std::string name = table_name(mc.head);
        if (!seen.insert(name).second)
            bad("checkpoint " + path + " duplicates model " + name);
        const auto preds = eval::predictions_from_model(lc.m, name, test, data.A);
        reports.push_back(
            eval::evaluate_model(preds, test, label, c.eval.top_frac, c.eval.kld_epsilon));
    }
    if (c.eval.include_ha) {
        const auto ha_train =
            ingest::slice_days(data.risk, 0, test.front().start_day + static_cast<std::size_t>(c.window.t));
        const auto ha = eval::historical_average(ha_train, c.window.k);
        const auto preds = eval::predictions_from_ha(ha, "HA", test.size());
        reports.push_back(
            eval::evaluate_model(preds, test, label, c.eval.top_frac, c.eval.kld_epsilon));
    }

    fs::create_directories(c.paths.out_dir);
    for (const auto& r : reports)
        eval::write_report_json(r, out_file(c, "report_" + r.model_name + ".json"));
    eval::write_comparison_csv(reports, out_file(c, "comparison.csv"));
    finish_outputs(c);

    for (const auto& r : reports)
        std::printf("evaluate: %s %s mae %s rmse %s zr %s\n", r.model_name.c_str(),
                    label.c_str(), csv::format_double(r.mae).c_str(),
                    csv::format_double(r.rmse).c_str(), csv::format_double(r.zr).c_str());
}

void cmd_predict(const RunConfig& c) {
    require_path(c.paths.nodes, "paths.nodes");
    require_path(c.paths.edges, "paths.edges");
    require_path(c.paths.risk, "paths.risk");
    require_path(c.paths.out_dir, "paths.out_dir");
    require_path(c.predict.checkpoint, "predict.checkpoint");

    const auto g = graph::load_graph(c.paths.nodes, c.paths.edges);
    const auto risk = ingest::load_risk_csv(c.paths.risk, g);
    auto lc = train::load_checkpoint(c.predict.checkpoint, g.node_order_hash());
    const std::size_t T = static_cast<std::size_t>(lc.m.config().T);
    const std::size_t k = static_cast<std::size_t>(lc.m.config().k);

    std::size_t as_of = risk.num_days() - 1;
    if (!c.predict.as_of_date.empty()) {
        const cal::Day want = cal::parse_iso_date(c.predict.as_of_date);
        if (want < risk.day_index.front() || want > risk.day_index.back())
            bad("predict.as_of_date " + c.predict.as_of_date + " is outside the risk tensor");
        as_of = static_cast<std::size_t>(want - risk.day_index.front());
    }
    if (as_of + 1 < T)
        bad("insufficient history: need " + std::to_string(T) + " days ending " +
            cal::format_iso_date(risk.day_index[as_of]) + ", have " + std::to_string(as_of + 1));

    const auto features = ingest::build_features(g.num_nodes(), risk.day_index);
    const std::size_t d0 = as_of + 1 - T;
    nn::Tensor X({g.num_nodes(), T});
    nn::Tensor F({g.num_nodes(), T, ingest::FeatureTensor::kDim});
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
        for (std::size_t t = 0; t < T; ++t) {
            X.at(v, t) = static_cast<double>(risk.at(v, d0 + t));
            const auto row = features.day_row(d0 + t);
            for (std::size_t f = 0; f < ingest::FeatureTensor::kDim; ++f)
                F.at(v, t, f) = row[f];
        }

    const auto fd = lc.m.forward(X, F, graph::adjacency(g, true));
    const auto [lo, hi] = model::predict_interval(fd, c.predict.level);

    fs::create_directories(c.paths.out_dir);
    const std::string path = out_file(c, "predictions.csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "road_id,day_offset,mean,lo90,hi90,p_zero,entropy\n";
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
        for (std::size_t j = 0; j < k; ++j)
            out << g.node_id(v) << ',' << (j + 1) << ','
                << csv::format_double(model::cell_mean(fd, v, j)) << ','
                << csv::format_double(lo.at(v, j)) << ',' << csv::format_double(hi.at(v, j))
                << ',' << csv::format_double(model::cell_p_zero(fd, v, j)) << ','
                << csv::format_double(model::cell_entropy(fd, v, j)) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
    out.close();
    finish_outputs(c);

    std::printf("predict: %zu roads x %zu days from %s\n", g.num_nodes(), k,
                cal::format_iso_date(risk.day_index[as_of]).c_str());
}

int run_command(const std::string& name, const std::string& config_path,
                const std::optional<std::string>& out_override) {
    try {
        RunConfig c = load_config(config_path);
        if (out_override) c.paths.out_dir = *out_override;
        if (name == "ingest")
            cmd_ingest(c);
        else if (name == "synth")
            cmd_synth(c);
        else if (name == "train")
            cmd_train(c);
        else if (name == "evaluate")
            cmd_evaluate(c);
        else if (name == "predict")
            cmd_predict(c);
        else
            bad("unknown command '" + name + "'");
        return 0;
    } catch (const train::NumericError& ex) {
        std::fprintf(stderr, "riskgraph %s: numeric failure: %s\n", name.c_str(), ex.what());
        return 3;
    } catch (const std::logic_error& ex) {
        std::fprintf(stderr, "riskgraph %s: %s\n", name.c_str(), ex.what());
        return 2;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "riskgraph %s: %s\n", name.c_str(), ex.what());
        return 4;
    }
}

}  // namespace riskgraph::cli
