#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "riskgraph/cli.hpp"
#include "tmpdir.hpp"

using namespace riskgraph;
using riskgraph::testing::TempDir;
using riskgraph::testing::read_file;
using riskgraph::testing::write_file;
namespace fs = std::filesystem;

namespace {

cli::RunConfig parse_text(const TempDir& dir, const std::string& body) {
    const auto path = dir.file("cfg.json");
    write_file(path, body);
    return cli::load_config(path);
}

// Expects load_config to reject `body` and checks the message mentions `needle`.
void check_rejects(const TempDir& dir, const std::string& body, const std::string& needle) {
    const auto path = dir.file("bad.json");
    write_file(path, body);
    std::string msg = "(no exception)";
    try {
        cli::load_config(path);
    } catch (const std::invalid_argument& ex) {
        msg = ex.what();
    }
    CAPTURE(body);
    CAPTURE(msg);
    CHECK(msg.find(needle) != std::string::npos);
}

int lines_in(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("empty config materializes the documented defaults") {
    TempDir dir;
    const auto c = parse_text(dir, "{}");

    CHECK(c.paths.nodes.empty());
    CHECK(c.paths.out_dir.empty());
    CHECK(c.period_start.empty());
    CHECK(c.window.label == "long");
    CHECK(c.window.t == 14);
    CHECK(c.window.k == 14);
    CHECK(c.window.stride == 1);
    CHECK(c.split.train_frac == 0.6);
    CHECK(c.split.val_frac == 0.2);
    CHECK(c.model.head == "zinb");
    CHECK(c.model.gru_hidden == 32);
    CHECK(c.model.gat_hidden == 32);
    CHECK(c.model.gat_heads == 2);
    CHECK(c.model.gat_layers == 1);
    CHECK_FALSE(c.model.scale_inputs);
    CHECK(c.train.lr == 1e-3);
    CHECK(c.train.epochs == 200);
    CHECK(c.train.batch_size == 8);
    CHECK(c.train.patience == 20);
    CHECK(c.train.y0_form == "exact");
    CHECK(c.train.clip_norm == 5.0);
    CHECK_FALSE(c.train.verbose);
    CHECK(c.eval.top_frac == 0.2);
    CHECK(c.eval.kld_epsilon == 1e-6);
    CHECK(c.eval.checkpoints.empty());
    CHECK(c.eval.include_ha);
    CHECK(c.severity_weights.slight == 1.0);
    CHECK(c.severity_weights.serious == 2.0);
    CHECK(c.severity_weights.fatal == 3.0);
    CHECK(c.spillover.alpha1 == 0.5);
    CHECK(c.spillover.alpha2 == 0.25);
    CHECK(c.synth.n_nodes == 100);
    CHECK(c.synth.n_days == 365);
    CHECK(c.synth.graph_model == "grid");
    CHECK(c.synth.series == "zinb");
    CHECK(c.synth.pi_lo == 0.9);
    CHECK(c.synth.pi_hi == 0.99);
    CHECK(c.synth.start_date == "2019-01-01");
    CHECK(c.predict.checkpoint.empty());
    CHECK(c.predict.as_of_date.empty());
    CHECK(c.predict.level == 0.9);
    CHECK(c.seeds.data_seed == 1);
    CHECK(c.seeds.train_seed == 2);
}

TEST_CASE("strict parse rejects unknown keys and wrong types") {
    TempDir dir;
    check_rejects(dir, R"({"windw": {}})", "unknown key 'config.windw'");
    check_rejects(dir, R"({"model": {"head": "zinb", "depth": 3}})", "unknown key 'model.depth'");
    check_rejects(dir, R"({"train": {"lr": "fast"}})", "train.lr must be a number");
    check_rejects(dir, R"({"train": {"epochs": 2.5}})", "train.epochs must be an integer");
    check_rejects(dir, R"({"model": {"scale_inputs": 1}})",
                  "model.scale_inputs must be true or false");
    check_rejects(dir, R"({"paths": {"nodes": 7}})", "paths.nodes must be a string");
    check_rejects(dir, R"({"eval": {"checkpoints": "one.json"}})",
                  "eval.checkpoints must be an array of strings");
    check_rejects(dir, R"({"eval": {"checkpoints": [3]}})",
                  "eval.checkpoints must be an array of strings");
    check_rejects(dir, R"({"seeds": {"data_seed": -1}})",
                  "seeds.data_seed must be a nonnegative integer");
    check_rejects(dir, R"([1, 2])", "config must be a JSON object");
    check_rejects(dir, R"({"window": 7})", "window must be a JSON object");
}

TEST_CASE("window labels pin the protocol sizes") {
    TempDir dir;

    CHECK(parse_text(dir, R"({"window": {"label": "long"}})").window.t == 14);
    const auto s = parse_text(dir, R"({"window": {"label": "short"}})").window;
    CHECK(s.t == 7);
    CHECK(s.k == 7);

    // Explicit t/k matching the label are allowed; contradictions are not.
    CHECK(parse_text(dir, R"({"window": {"label": "long", "t": 14, "k": 14}})").window.k == 14);
    check_rejects(dir, R"({"window": {"label": "long", "t": 10}})",
                  "window.t = 10 contradicts label 'long'");
    check_rejects(dir, R"({"window": {"label": "short", "k": 14}})",
                  "window.k = 14 contradicts label 'short'");

    const auto w = parse_text(
        dir, R"({"window": {"label": "custom", "t": 5, "k": 3, "stride": 2}})").window;
    CHECK(w.t == 5);
    CHECK(w.k == 3);
    CHECK(w.stride == 2);
    check_rejects(dir, R"({"window": {"label": "custom", "t": 5}})",
                  "window: custom label requires explicit t and k");
    check_rejects(dir, R"({"window": {"label": "weekly"}})",
                  "window.label must be long, short or custom");
    check_rejects(dir, R"({"window": {"label": "custom", "t": 0, "k": 3}})",
                  "window: t, k and stride must be >= 1");
    check_rejects(dir, R"({"window": {"label": "long", "stride": 0}})",
                  "window: t, k and stride must be >= 1");

    CHECK(cli::WindowConfig{}.display() == "Long(14-14)");
    CHECK(s.display() == "Short(7-7)");
    CHECK(w.display() == "Custom(5-3)");
}

TEST_CASE("section-level validation catches bad dates, heads and ranges") {
    TempDir dir;
    check_rejects(dir, R"({"study_period": {"start": "2019-13-01"}})", "study_period.start");
    check_rejects(dir, R"({"model": {"head": "poisson"}})", "unknown model head 'poisson'");
    check_rejects(dir, R"({"train": {"y0_form": "both"}})",
                  "train.y0_form must be exact or paper_literal");
    check_rejects(dir, R"({"eval": {"top_frac": 0}})", "eval.top_frac must be in (0, 1]");
    check_rejects(dir, R"({"eval": {"top_frac": 1.5}})", "eval.top_frac must be in (0, 1]");
    check_rejects(dir, R"({"eval": {"kld_epsilon": 0}})", "eval.kld_epsilon must be > 0");
    check_rejects(dir, R"({"predict": {"level": 1.0}})", "predict.level must be in (0, 1)");
    check_rejects(dir, R"({"synth": {"graph_model": "tree"}})",
                  "synth.graph_model must be grid or random_geometric");
    check_rejects(dir, R"({"synth": {"series": "poisson"}})",
                  "synth.series must be zinb or bursty");
    check_rejects(dir, R"({"synth": {"start_date": "whenever"}})", "synth.start_date");
    check_rejects(dir, R"({"synth": {"pi_range": [0.9]}})", "synth.pi_range must be [lo, hi]");
    check_rejects(dir, R"({"synth": {"pi_range": [0.9, 0.2]}})", "synth.pi_range: lo exceeds hi");
    check_rejects(dir, R"({"synth": {"burst": {"foo": 1}}})", "unknown key 'synth.burst.foo'");
    check_rejects(dir, R"({"synth": {"burst": {"quiet": {"mean": 1}}}})",
                  "unknown key 'synth.burst.quiet.mean'");
}

TEST_CASE("load_config failure modes: missing file and malformed JSON") {
    TempDir dir;
    CHECK_THROWS_AS(cli::load_config(dir.file("nope.json")), std::runtime_error);

    const auto path = dir.file("broken.json");
    write_file(path, "{ \"window\": ");
    CHECK_THROWS_AS(cli::load_config(path), std::invalid_argument);
}

TEST_CASE("resolved config round trips byte for byte") {
    TempDir dir;
    const auto c = parse_text(dir, R"({
      "paths": {"nodes": "n.csv", "edges": "e.csv", "accidents": "a.csv",
                "risk": "r.csv", "out_dir": "out"},
      "study_period": {"start": "2017-03-01", "end": "2017-06-30"},
      "window": {"label": "custom", "t": 9, "k": 4, "stride": 2},
      "split": {"train_frac": 0.5, "val_frac": 0.3},
      "model": {"head": "nb", "gru_hidden": 12, "gat_hidden": 8, "gat_heads": 4,
                "gat_layers": 2, "scale_inputs": true},
      "train": {"lr": 0.005, "epochs": 40, "batch_size": 4, "patience": 6,
                "y0_form": "paper_literal", "clip_norm": 2.5, "verbose": true},
      "eval": {"top_frac": 0.3, "kld_epsilon": 1e-5,
               "checkpoints": ["ck1.json", "ck2.json"], "include_ha": false},
      "severity_weights": {"slight": 1.5, "serious": 2.5, "fatal": 4.0},
      "spillover": {"alpha1": 0.4, "alpha2": 0.1},
      "synth": {"n_nodes": 16, "n_days": 60, "graph_model": "random_geometric",
                "series": "bursty",
                "pi_range": [0.5, 0.8], "n_range": [0.5, 2.0], "p_range": [0.2, 0.4],
                "burst": {"quiet": {"pi": 0.99, "n": 1.5, "p": 0.5},
                          "burst": {"pi": 0.5, "n": 6.0, "p": 0.45},
                          "p_enter": 0.05, "p_exit": 0.2},
                "start_date": "2018-05-01"},
      "predict": {"checkpoint": "ck1.json", "as_of_date": "2018-06-01", "level": 0.8},
      "seeds": {"data_seed": 11, "train_seed": 12}
    })");
    CHECK(c.model.head == "nb");
    CHECK(c.eval.checkpoints.size() == 2);
    CHECK(c.synth.burst.burst.n == 6.0);

    const auto p1 = dir.file("resolved1.json");
    const auto p2 = dir.file("resolved2.json");
    cli::write_resolved_config(c, p1);
    const auto c2 = cli::load_config(p1);
    cli::write_resolved_config(c2, p2);
    CHECK(read_file(p1) == read_file(p2));

    CHECK(c2.window.t == 9);
    CHECK(c2.split.val_frac == 0.3);
    CHECK(c2.train.y0_form == "paper_literal");
    CHECK(c2.eval.checkpoints == c.eval.checkpoints);
    CHECK(c2.severity_weights.fatal == 4.0);
    CHECK(c2.synth.burst.p_exit == 0.2);
    CHECK(c2.predict.as_of_date == "2018-06-01");
    CHECK(c2.seeds.train_seed == 12);

    // Defaults survive the same cycle.
    const auto d1 = dir.file("def1.json");
    const auto d2 = dir.file("def2.json");
    cli::write_resolved_config(cli::RunConfig{}, d1);
    cli::write_resolved_config(cli::load_config(d1), d2);
    CHECK(read_file(d1) == read_file(d2));
}

TEST_CASE("model_config and train_config adopt the window and seeds") {
    TempDir dir;
    const auto c = parse_text(dir, R"({
      "window": {"label": "custom", "t": 6, "k": 2},
      "model": {"head": "gauss", "gru_hidden": 5, "gat_hidden": 4, "gat_heads": 2,
                "gat_layers": 2, "scale_inputs": true},
      "train": {"lr": 0.01, "epochs": 3, "batch_size": 2, "patience": 1,
                "y0_form": "paper_literal", "clip_norm": 1.5, "verbose": true},
      "seeds": {"train_seed": 77}
    })");

    const auto m = cli::model_config(c);
    CHECK(m.head == model::Head::gauss);
    CHECK(m.T == 6);
    CHECK(m.k == 2);
    CHECK(m.gru_hidden == 5);
    CHECK(m.gat_hidden == 4);
    CHECK(m.gat_heads == 2);
    CHECK(m.gat_layers == 2);
    CHECK(m.scale_inputs);
    CHECK(m.seed == 77);

    const auto t = cli::train_config(c);
    CHECK(t.lr == 0.01);
    CHECK(t.epochs == 3);
    CHECK(t.batch_size == 2);
    CHECK(t.patience == 1);
    CHECK(t.seed == 77);
    CHECK(t.y0_form == dist::Y0Form::paper_literal);
    CHECK(t.clip_norm == 1.5);
    CHECK(t.verbose);
}

TEST_CASE("run_command drives synth, train, evaluate and predict end to end") {
    TempDir dir("cli");
    const auto data_dir = dir.file("data");
    const auto run_dir = dir.file("run");
    const auto join = [](const std::string& base, const char* name) {
        return (fs::path(base) / name).string();
    };

    nlohmann::ordered_json synth;
    synth["paths"]["out_dir"] = data_dir;
    synth["synth"] = {{"n_nodes", 9},         {"n_days", 48},
                      {"graph_model", "grid"}, {"series", "zinb"},
                      {"pi_range", {0.4, 0.7}}, {"n_range", {1.0, 3.0}},
                      {"p_range", {0.4, 0.6}},  {"start_date", "2019-01-01"}};
    synth["seeds"] = {{"data_seed", 5}};
    write_file(dir.file("synth.json"), synth.dump(2));
    REQUIRE(cli::run_command("synth", dir.file("synth.json"), std::nullopt) == 0);
    for (const char* name : {"nodes.csv", "edges.csv", "risk.csv", "params.csv",
                             "summary.json", "resolved_config.json"})
        CHECK(fs::exists(fs::path(data_dir) / name));
    const auto summary = nlohmann::json::parse(read_file(join(data_dir, "summary.json")));
    CHECK(summary.at("num_nodes").get<int>() == 9);
    CHECK(summary.at("num_days").get<int>() == 48);
    CHECK(summary.at("series").get<std::string>() == "zinb");

    nlohmann::ordered_json pipe;
    pipe["paths"] = {{"nodes", join(data_dir, "nodes.csv")},
                     {"edges", join(data_dir, "edges.csv")},
                     {"risk", join(data_dir, "risk.csv")},
                     {"out_dir", run_dir}};
    pipe["window"] = {{"label", "custom"}, {"t", 7}, {"k", 3}};
    pipe["model"] = {{"head", "zinb"}, {"gru_hidden", 4}, {"gat_hidden", 4}, {"gat_heads", 1}};
    pipe["train"] = {{"lr", 0.02}, {"epochs", 2}, {"batch_size", 8}, {"patience", 2}};
    pipe["eval"] = {{"checkpoints", {join(run_dir, "checkpoint_zinb.json")}},
                    {"include_ha", true}};
    pipe["predict"] = {{"checkpoint", join(run_dir, "checkpoint_zinb.json")}, {"level", 0.9}};
    pipe["seeds"] = {{"data_seed", 5}, {"train_seed", 9}};
    const auto pipe_path = dir.file("pipe.json");
    write_file(pipe_path, pipe.dump(2));

    REQUIRE(cli::run_command("train", pipe_path, std::nullopt) == 0);
    CHECK(fs::exists(fs::path(run_dir) / "checkpoint_zinb.json"));
    const auto history = read_file(join(run_dir, "history_zinb.csv"));
    CHECK(history.rfind("epoch,train_nll,val_nll,seconds\n", 0) == 0);
    CHECK(lines_in(history) == 3);  // header + 2 epochs

    // 48 days, T=7, k=3, stride 1 -> 39 windows; split 0.6/0.2 -> 9 test windows.
    const auto eval_dir = dir.file("eval_out");
    REQUIRE(cli::run_command("evaluate", pipe_path, eval_dir) == 0);
    for (const char* name : {"report_STZINB.json", "report_HA.json", "comparison.csv"})
        CHECK(fs::exists(fs::path(eval_dir) / name));
    const auto report = nlohmann::json::parse(read_file(join(eval_dir, "report_STZINB.json")));
    CHECK(report.at("model").get<std::string>() == "STZINB");
    CHECK(report.at("window").get<std::string>() == "Custom(7-3)");
    CHECK(report.at("n_entries").get<int>() == 9 * 3 * 9);
    const auto comparison = read_file(join(eval_dir, "comparison.csv"));
    CHECK(comparison.rfind("metric,STZINB,HA\n", 0) == 0);

    // The --out override lands in the resolved config of that run.
    const auto resolved = nlohmann::json::parse(read_file(join(eval_dir, "resolved_config.json")));
    CHECK(resolved.at("paths").at("out_dir").get<std::string>() == eval_dir);

    const auto pred_dir = dir.file("pred_out");
    REQUIRE(cli::run_command("predict", pipe_path, pred_dir) == 0);
    const auto preds = read_file(join(pred_dir, "predictions.csv"));
    CHECK(preds.rfind("road_id,day_offset,mean,lo90,hi90,p_zero,entropy\n", 0) == 0);
    CHECK(lines_in(preds) == 1 + 9 * 3);

    // Same command, same config: predictions are reproducible.
    const auto pred_dir2 = dir.file("pred_out2");
    REQUIRE(cli::run_command("predict", pipe_path, pred_dir2) == 0);
    CHECK(read_file(join(pred_dir2, "predictions.csv")) == preds);
}

TEST_CASE("run_command maps failures to the documented exit codes") {
    TempDir dir("clierr");
    const auto data_dir = dir.file("data");
    const auto join = [](const std::string& base, const char* name) {
        return (fs::path(base) / name).string();
    };

    nlohmann::ordered_json synth;
    synth["paths"]["out_dir"] = data_dir;
    synth["synth"] = {{"n_nodes", 9}, {"n_days", 48}, {"start_date", "2019-01-01"}};
    write_file(dir.file("synth.json"), synth.dump(2));
    REQUIRE(cli::run_command("synth", dir.file("synth.json"), std::nullopt) == 0);

    nlohmann::ordered_json pipe;
    pipe["paths"] = {{"nodes", join(data_dir, "nodes.csv")},
                     {"edges", join(data_dir, "edges.csv")},
                     {"risk", join(data_dir, "risk.csv")},
                     {"out_dir", dir.file("run")}};
    pipe["window"] = {{"label", "custom"}, {"t", 7}, {"k", 3}};
    pipe["model"] = {{"head", "zinb"}, {"gru_hidden", 4}, {"gat_hidden", 4}, {"gat_heads", 1}};
    pipe["train"] = {{"lr", 0.02}, {"epochs", 1}, {"batch_size", 8}, {"patience", 1}};
    const auto ckpt = join(dir.file("run"), "checkpoint_zinb.json");
    pipe["eval"] = {{"checkpoints", {ckpt}}, {"include_ha", true}};
    pipe["predict"] = {{"checkpoint", ckpt}, {"level", 0.9}};
    const auto pipe_path = dir.file("pipe.json");
    write_file(pipe_path, pipe.dump(2));
    REQUIRE(cli::run_command("train", pipe_path, std::nullopt) == 0);

    SUBCASE("unknown command and unreadable configs") {
        CHECK(cli::run_command("retrain", pipe_path, std::nullopt) == 2);
        CHECK(cli::run_command("train", dir.file("absent.json"), std::nullopt) == 4);
        const auto broken = dir.file("broken.json");
        write_file(broken, "{ half");
        CHECK(cli::run_command("train", broken, std::nullopt) == 2);
    }

    SUBCASE("config validation failures exit 2 and create no output dir") {
        auto bad = pipe;
        bad["model"]["head"] = "poisson";
        const auto bad_out = dir.file("never_made");
        write_file(dir.file("badhead.json"), bad.dump(2));
        CHECK(cli::run_command("train", dir.file("badhead.json"), bad_out) == 2);
        CHECK_FALSE(fs::exists(bad_out));
    }

    SUBCASE("missing input files exit 4") {
        auto norisk = pipe;
        norisk["paths"]["risk"] = join(data_dir, "absent.csv");
        write_file(dir.file("norisk.json"), norisk.dump(2));
        CHECK(cli::run_command("train", dir.file("norisk.json"), dir.file("x1")) == 4);
    }

    SUBCASE("dataset too short for the window exits 2") {
        auto tiny = synth;
        tiny["paths"]["out_dir"] = dir.file("tiny");
        tiny["synth"]["n_days"] = 8;  // below T + k = 10, so windowing fails
        write_file(dir.file("tiny.json"), tiny.dump(2));
        REQUIRE(cli::run_command("synth", dir.file("tiny.json"), std::nullopt) == 0);
        auto shortcfg = pipe;
        shortcfg["paths"]["risk"] = join(dir.file("tiny"), "risk.csv");
        shortcfg["paths"]["nodes"] = join(dir.file("tiny"), "nodes.csv");
        shortcfg["paths"]["edges"] = join(dir.file("tiny"), "edges.csv");
        write_file(dir.file("short.json"), shortcfg.dump(2));
        CHECK(cli::run_command("train", dir.file("short.json"), dir.file("x2")) == 2);
    }

    SUBCASE("evaluate rejects duplicate models and empty model lists") {
        auto dup = pipe;
        dup["eval"]["checkpoints"] = {ckpt, ckpt};
        write_file(dir.file("dup.json"), dup.dump(2));
        CHECK(cli::run_command("evaluate", dir.file("dup.json"), dir.file("x3")) == 2);

        auto none = pipe;
        none["eval"]["checkpoints"] = nlohmann::ordered_json::array();
        none["eval"]["include_ha"] = false;
        write_file(dir.file("none.json"), none.dump(2));
        CHECK(cli::run_command("evaluate", dir.file("none.json"), dir.file("x4")) == 2);
    }

    SUBCASE("evaluate rejects a checkpoint trained on a different window") {
        auto wrong = pipe;
        wrong["window"] = {{"label", "long"}};
        write_file(dir.file("wrong.json"), wrong.dump(2));
        CHECK(cli::run_command("evaluate", dir.file("wrong.json"), dir.file("x5")) == 2);
    }

    SUBCASE("predict window checks") {
        auto early = pipe;
        early["predict"]["as_of_date"] = "2019-01-05";  // only 5 days of history, T=7
        write_file(dir.file("early.json"), early.dump(2));
        CHECK(cli::run_command("predict", dir.file("early.json"), dir.file("x6")) == 2);

        auto outside = pipe;
        outside["predict"]["as_of_date"] = "2030-01-01";
        write_file(dir.file("outside.json"), outside.dump(2));
        CHECK(cli::run_command("predict", dir.file("outside.json"), dir.file("x7")) == 2);

        auto nockpt = pipe;
        nockpt["predict"]["checkpoint"] = dir.file("ghost.json");
        write_file(dir.file("nockpt.json"), nockpt.dump(2));
        CHECK(cli::run_command("predict", dir.file("nockpt.json"), dir.file("x8")) == 4);
    }
}

}  // TEST_SUITE("cli")
