#include "riskgraph/cli.hpp"

#include <fstream>
#include <concepts>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "riskgraph/calendar.hpp"

namespace riskgraph::cli {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("config: " + what); }

const json* child(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad(section + " must be a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!ok.count(key)) bad("unknown key '" + section + "." + key + "'");
}

void read(const json& obj, const std::string& section, const char* key, double& out) {
    if (const json* v = child(obj, key)) {
        if (!v->is_number()) bad(section + "." + key + " must be a number");
        out = v->get<double>();
    }
}

void read(const json& obj, const std::string& section, const char* key, int& out) {
    if (const json* v = child(obj, key)) {
        if (!v->is_number_integer()) bad(section + "." + key + " must be an integer");
        out = v->get<int>();
    }
}

template <class UInt>
    requires std::unsigned_integral<UInt>
void read(const json& obj, const std::string& section, const char* key, UInt& out) {
    if (const json* v = child(obj, key)) {
        if (!v->is_number_integer() || v->get<long long>() < 0)
            bad(section + "." + key + " must be a nonnegative integer");
        out = v->get<UInt>();
    }
}

void read(const json& obj, const std::string& section, const char* key, bool& out) {
    if (const json* v = child(obj, key)) {
        if (!v->is_boolean()) bad(section + "." + key + " must be true or false");
        out = v->get<bool>();
    }
}

void read(const json& obj, const std::string& section, const char* key, std::string& out) {
    if (const json* v = child(obj, key)) {
        if (!v->is_string()) bad(section + "." + key + " must be a string");
        out = v->get<std::string>();
    }
}

void read(const json& obj, const std::string& section, const char* key,
          std::vector<std::string>& out) {
    if (const json* v = child(obj, key)) {
        if (!v->is_array()) bad(section + "." + key + " must be an array of strings");
        out.clear();
        for (const auto& e : *v) {
            if (!e.is_string()) bad(section + "." + key + " must be an array of strings");
            out.push_back(e.get<std::string>());
        }
    }
}

void read_range(const json& obj, const std::string& section, const char* key, double& lo,
                double& hi) {
    if (const json* v = child(obj, key)) {
        if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
            bad(section + "." + key + " must be [lo, hi]");
        lo = (*v)[0].get<double>();
        hi = (*v)[1].get<double>();
        if (!(lo <= hi)) bad(section + "." + key + ": lo exceeds hi");
    }
}

void read_zinb(const json& obj, const std::string& section, dist::ZinbParams& out) {
    check_keys(obj, section, {"pi", "n", "p"});
    read(obj, section, "pi", out.pi);
    read(obj, section, "n", out.n);
    read(obj, section, "p", out.p);
}

void check_date(const std::string& section, const char* key, const std::string& value) {
    if (value.empty()) return;
    try {
        cal::parse_iso_date(value);
    } catch (const std::exception& ex) {
        bad(section + "." + key + ": " + ex.what());
    }
}

void parse_window(const json& obj, WindowConfig& w) {
    check_keys(obj, "window", {"label", "t", "k", "stride"});
    read(obj, "window", "label", w.label);

    int t = 0, k = 0;
    const bool has_t = child(obj, "t") != nullptr;
    const bool has_k = child(obj, "k") != nullptr;
    read(obj, "window", "t", t);
    read(obj, "window", "k", k);
    read(obj, "window", "stride", w.stride);

    if (w.label == "long") {
        w.t = 14;
        w.k = 14;
    } else if (w.label == "short") {
        w.t = 7;
        w.k = 7;
    } else if (w.label == "custom") {
        if (!has_t || !has_k) bad("window: custom label requires explicit t and k");
        w.t = t;
        w.k = k;
    } else {
        bad("window.label must be long, short or custom");
    }
    if (w.label != "custom") {
        if (has_t && t != w.t)
            bad("window.t = " + std::to_string(t) + " contradicts label '" + w.label + "'");
        if (has_k && k != w.k)
            bad("window.k = " + std::to_string(k) + " contradicts label '" + w.label + "'");
    }
    if (w.t < 1 || w.k < 1 || w.stride < 1) bad("window: t, k and stride must be >= 1");
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    check_keys(j, "config",
               {"paths", "study_period", "window", "split", "model", "train", "eval",
                "severity_weights", "spillover", "synth", "predict", "seeds"});

    if (const json* o = child(j, "paths")) {
        check_keys(*o, "paths", {"nodes", "edges", "accidents", "risk", "out_dir"});
        read(*o, "paths", "nodes", c.paths.nodes);
        read(*o, "paths", "edges", c.paths.edges);
        read(*o, "paths", "accidents", c.paths.accidents);
        read(*o, "paths", "risk", c.paths.risk);
        read(*o, "paths", "out_dir", c.paths.out_dir);
    }
    if (const json* o = child(j, "study_period")) {
        check_keys(*o, "study_period", {"start", "end"});
        read(*o, "study_period", "start", c.period_start);
        read(*o, "study_period", "end", c.period_end);
        check_date("study_period", "start", c.period_start);
        check_date("study_period", "end", c.period_end);
    }
    if (const json* o = child(j, "window")) parse_window(*o, c.window);
    if (const json* o = child(j, "split")) {
        check_keys(*o, "split", {"train_frac", "val_frac"});
        read(*o, "split", "train_frac", c.split.train_frac);
        read(*o, "split", "val_frac", c.split.val_frac);
    }
    if (const json* o = child(j, "model")) {
        check_keys(*o, "model",
                   {"head", "gru_hidden", "gat_hidden", "gat_heads", "gat_layers", "scale_inputs"});
        read(*o, "model", "head", c.model.head);
        read(*o, "model", "gru_hidden", c.model.gru_hidden);
        read(*o, "model", "gat_hidden", c.model.gat_hidden);
        read(*o, "model", "gat_heads", c.model.gat_heads);
        read(*o, "model", "gat_layers", c.model.gat_layers);
        read(*o, "model", "scale_inputs", c.model.scale_inputs);
        model::parse_head(c.model.head);  // rejects unknown heads early
    }
    if (const json* o = child(j, "train")) {
        check_keys(*o, "train",
                   {"lr", "epochs", "batch_size", "patience", "y0_form", "clip_norm", "verbose"});
        read(*o, "train", "lr", c.train.lr);
        read(*o, "train", "epochs", c.train.epochs);
        read(*o, "train", "batch_size", c.train.batch_size);
        read(*o, "train", "patience", c.train.patience);
        read(*o, "train", "y0_form", c.train.y0_form);
        read(*o, "train", "clip_norm", c.train.clip_norm);
        read(*o, "train", "verbose", c.train.verbose);
        if (c.train.y0_form != "exact" && c.train.y0_form != "paper_literal")
            bad("train.y0_form must be exact or paper_literal");
    }
    if (const json* o = child(j, "eval")) {
        check_keys(*o, "eval", {"top_frac", "kld_epsilon", "checkpoints", "include_ha"});
        read(*o, "eval", "top_frac", c.eval.top_frac);
        read(*o, "eval", "kld_epsilon", c.eval.kld_epsilon);
        read(*o, "eval", "checkpoints", c.eval.checkpoints);
        read(*o, "eval", "include_ha", c.eval.include_ha);
        if (!(c.eval.top_frac > 0.0 && c.eval.top_frac <= 1.0))
            bad("eval.top_frac must be in (0, 1]");
        if (!(c.eval.kld_epsilon > 0.0)) bad("eval.kld_epsilon must be > 0");
    }
    if (const json* o = child(j, "severity_weights")) {
        check_keys(*o, "severity_weights", {"slight", "serious", "fatal"});
        read(*o, "severity_weights", "slight", c.severity_weights.slight);
        read(*o, "severity_weights", "serious", c.severity_weights.serious);
        read(*o, "severity_weights", "fatal", c.severity_weights.fatal);
    }
    if (const json* o = child(j, "spillover")) {
        check_keys(*o, "spillover", {"alpha1", "alpha2"});
        read(*o, "spillover", "alpha1", c.spillover.alpha1);
        read(*o, "spillover", "alpha2", c.spillover.alpha2);
    }
    if (const json* o = child(j, "synth")) {
        check_keys(*o, "synth",
                   {"n_nodes", "n_days", "graph_model", "series", "pi_range", "n_range", "p_range",
                    "burst", "start_date"});
        read(*o, "synth", "n_nodes", c.synth.n_nodes);
        read(*o, "synth", "n_days", c.synth.n_days);
        read(*o, "synth", "graph_model", c.synth.graph_model);
        read(*o, "synth", "series", c.synth.series);
        read_range(*o, "synth", "pi_range", c.synth.pi_lo, c.synth.pi_hi);
        read_range(*o, "synth", "n_range", c.synth.n_lo, c.synth.n_hi);
        read_range(*o, "synth", "p_range", c.synth.p_lo, c.synth.p_hi);
        if (const json* b = child(*o, "burst")) {
            check_keys(*b, "synth.burst", {"quiet", "burst", "p_enter", "p_exit"});
            if (const json* q = child(*b, "quiet")) read_zinb(*q, "synth.burst.quiet", c.synth.burst.quiet);
            if (const json* q = child(*b, "burst")) read_zinb(*q, "synth.burst.burst", c.synth.burst.burst);
            read(*b, "synth.burst", "p_enter", c.synth.burst.p_enter);
            read(*b, "synth.burst", "p_exit", c.synth.burst.p_exit);
        }
        read(*o, "synth", "start_date", c.synth.start_date);
        if (c.synth.graph_model != "grid" && c.synth.graph_model != "random_geometric")
            bad("synth.graph_model must be grid or random_geometric");
        if (c.synth.series != "zinb" && c.synth.series != "bursty")
            bad("synth.series must be zinb or bursty");
        check_date("synth", "start_date", c.synth.start_date);
    }
    if (const json* o = child(j, "predict")) {
        check_keys(*o, "predict", {"checkpoint", "as_of_date", "level"});
        read(*o, "predict", "checkpoint", c.predict.checkpoint);
        read(*o, "predict", "as_of_date", c.predict.as_of_date);
        read(*o, "predict", "level", c.predict.level);
        check_date("predict", "as_of_date", c.predict.as_of_date);
        if (!(c.predict.level > 0.0 && c.predict.level < 1.0))
            bad("predict.level must be in (0, 1)");
    }
    if (const json* o = child(j, "seeds")) {
        check_keys(*o, "seeds", {"data_seed", "train_seed"});
        read(*o, "seeds", "data_seed", c.seeds.data_seed);
        read(*o, "seeds", "train_seed", c.seeds.train_seed);
    }
    return c;
}

}  // namespace

std::string WindowConfig::display() const {
    std::string name = label == "long" ? "Long" : label == "short" ? "Short" : "Custom";
    return name + "(" + std::to_string(t) + "-" + std::to_string(k) + ")";
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw std::invalid_argument("config " + path + ": " + ex.what());
    }
    try {
        return parse_config(j);
    } catch (const json::exception& ex) {
        throw std::invalid_argument("config " + path + ": " + ex.what());
    }
}

void write_resolved_config(const RunConfig& c, const std::string& path) {
    json j;
    j["paths"] = {{"nodes", c.paths.nodes},
                  {"edges", c.paths.edges},
                  {"accidents", c.paths.accidents},
                  {"risk", c.paths.risk},
                  {"out_dir", c.paths.out_dir}};
    j["study_period"] = {{"start", c.period_start}, {"end", c.period_end}};
    j["window"] = {{"label", c.window.label},
                   {"t", c.window.t},
                   {"k", c.window.k},
                   {"stride", c.window.stride}};
    j["split"] = {{"train_frac", c.split.train_frac}, {"val_frac", c.split.val_frac}};
    j["model"] = {{"head", c.model.head},
                  {"gru_hidden", c.model.gru_hidden},
                  {"gat_hidden", c.model.gat_hidden},
                  {"gat_heads", c.model.gat_heads},
                  {"gat_layers", c.model.gat_layers},
                  {"scale_inputs", c.model.scale_inputs}};
    j["train"] = {{"lr", c.train.lr},          {"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size}, {"patience", c.train.patience},
                  {"y0_form", c.train.y0_form}, {"clip_norm", c.train.clip_norm},
                  {"verbose", c.train.verbose}};
    j["eval"] = {{"top_frac", c.eval.top_frac},
                 {"kld_epsilon", c.eval.kld_epsilon},
                 {"checkpoints", c.eval.checkpoints},
                 {"include_ha", c.eval.include_ha}};
    j["severity_weights"] = {{"slight", c.severity_weights.slight},
                             {"serious", c.severity_weights.serious},
                             {"fatal", c.severity_weights.fatal}};
    j["spillover"] = {{"alpha1", c.spillover.alpha1}, {"alpha2", c.spillover.alpha2}};
    j["synth"] = {{"n_nodes", c.synth.n_nodes},
                  {"n_days", c.synth.n_days},
                  {"graph_model", c.synth.graph_model},
                  {"series", c.synth.series},
                  {"pi_range", {c.synth.pi_lo, c.synth.pi_hi}},
                  {"n_range", {c.synth.n_lo, c.synth.n_hi}},
                  {"p_range", {c.synth.p_lo, c.synth.p_hi}},
                  {"burst",
                   {{"quiet",
                     {{"pi", c.synth.burst.quiet.pi},
                      {"n", c.synth.burst.quiet.n},
                      {"p", c.synth.burst.quiet.p}}},
                    {"burst",
                     {{"pi", c.synth.burst.burst.pi},
                      {"n", c.synth.burst.burst.n},
                      {"p", c.synth.burst.burst.p}}},
                    {"p_enter", c.synth.burst.p_enter},
                    {"p_exit", c.synth.burst.p_exit}}},
                  {"start_date", c.synth.start_date}};
    j["predict"] = {{"checkpoint", c.predict.checkpoint},
                    {"as_of_date", c.predict.as_of_date},
                    {"level", c.predict.level}};
    j["seeds"] = {{"data_seed", c.seeds.data_seed}, {"train_seed", c.seeds.train_seed}};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

model::ModelConfig model_config(const RunConfig& c) {
    model::ModelConfig m;
    m.head = model::parse_head(c.model.head);
    m.T = c.window.t;
    m.k = c.window.k;
    m.gru_hidden = c.model.gru_hidden;
    m.gat_hidden = c.model.gat_hidden;
    m.gat_heads = c.model.gat_heads;
    m.gat_layers = c.model.gat_layers;
    m.scale_inputs = c.model.scale_inputs;
    m.seed = c.seeds.train_seed;
    return m;
}

train::TrainConfig train_config(const RunConfig& c) {
    train::TrainConfig t;
    t.lr = c.train.lr;
    t.epochs = c.train.epochs;
    t.batch_size = c.train.batch_size;
    t.patience = c.train.patience;
    t.seed = c.seeds.train_seed;
    t.y0_form = c.train.y0_form == "exact" ? dist::Y0Form::exact : dist::Y0Form::paper_literal;
    t.clip_norm = c.train.clip_norm;
    t.verbose = c.train.verbose;
    return t;
}

}  // namespace riskgraph::cli
