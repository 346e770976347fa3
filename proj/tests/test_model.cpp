#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <string>
#include <vector>

#include "riskgraph/graph.hpp"
#include "riskgraph/ingest.hpp"
#include "riskgraph/model.hpp"
#include "riskgraph/rng.hpp"

using namespace riskgraph;
using nn::Tensor;

namespace {

model::ModelConfig small_config(model::Head head = model::Head::zinb) {
    model::ModelConfig cfg;
    cfg.head = head;
    cfg.T = 5;
    cfg.k = 3;
    cfg.gru_hidden = 6;
    cfg.gat_hidden = 6;
    cfg.gat_heads = 2;
    cfg.gat_layers = 1;
    cfg.seed = 17;
    return cfg;
}

struct Scene {
    graph::RoadGraph g;
    graph::AdjacencyMatrix A;
    Tensor X, F;
};

Scene make_scene(std::size_t n_nodes, int T, std::uint64_t seed) {
    std::vector<std::string> ids;
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        ids.push_back("s" + std::to_string(i));
        if (i > 0) edges.emplace_back(ids[i - 1], ids[i]);
    }
    Scene sc{graph::build_graph(ids, edges), {}, Tensor(), Tensor()};
    sc.A = graph::adjacency(sc.g, true);
    rng::Engine e(seed);
    sc.X = Tensor({n_nodes, static_cast<std::size_t>(T)});
    for (std::size_t i = 0; i < sc.X.size(); ++i) sc.X[i] = static_cast<double>(e.bounded(4));
    sc.F = Tensor({n_nodes, static_cast<std::size_t>(T), ingest::FeatureTensor::kDim});
    for (std::size_t i = 0; i < sc.F.size(); ++i) sc.F[i] = e.uniform();
    return sc;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("head names round trip") {
    for (const auto h : {model::Head::zinb, model::Head::nb, model::Head::gauss})
        CHECK(model::parse_head(model::head_name(h)) == h);
    CHECK_THROWS_AS(model::parse_head("poisson"), std::invalid_argument);
    CHECK(std::string(model::head_name(model::Head::zinb)) == "zinb");
}

TEST_CASE("config validation rejects nonsense") {
    auto ok = small_config();
    CHECK_NOTHROW(ok.validate());

    auto bad = ok;
    bad.T = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.k = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.gru_hidden = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.gat_heads = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.gat_heads = 4;  // 6 % 4 != 0
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.gat_layers = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("parameter count matches the architecture formula") {
    const auto cfg = small_config();
    const auto m = model::Model::init(cfg);
    const std::size_t in = 1 + ingest::FeatureTensor::kDim;
    const std::size_t gru = 3 * (in * 6 + 6 * 6 + 6);
    const std::size_t per_head = 6 / 2;
    const std::size_t gat = 2 * (6 * per_head + per_head + per_head);
    const std::size_t head = 6 * (3 * 3) + 3 * 3;  // dense onto 3k channels
    CHECK(m.count_parameters() == gru + gat + head);

    // two GAT layers chain hidden width to hidden width
    auto cfg2 = cfg;
    cfg2.gat_layers = 2;
    const auto m2 = model::Model::init(cfg2);
    CHECK(m2.count_parameters() == gru + 2 * gat + head);
}

TEST_CASE("init is deterministic in the seed and names are prefixed") {
    const auto a = model::Model::init(small_config());
    const auto b = model::Model::init(small_config());
    auto cfg = small_config();
    cfg.seed = 18;
    const auto c = model::Model::init(cfg);

    REQUIRE(a.params().names() == b.params().names());
    bool any_differs = false;
    for (const auto& name : a.params().names()) {
        const auto& va = a.params().value(name);
        const auto& vb = b.params().value(name);
        REQUIRE(va.size() == vb.size());
        for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i] == vb[i]);
        const auto& vc = c.params().value(name);
        for (std::size_t i = 0; i < va.size(); ++i) any_differs = any_differs || va[i] != vc[i];
    }
    CHECK(any_differs);

    CHECK(a.params().has("gru.Wz"));
    CHECK(a.params().has("gat0.h0.W"));
    CHECK(a.params().has("gat0.h1.a_dst"));
    CHECK(a.params().has("head.W"));
    CHECK(a.params().has("head.b"));
}

TEST_CASE("forward fills exactly the planes its head owns, all valid") {
    const auto sc = make_scene(6, 5, 3);

    const auto zm = model::Model::init(small_config(model::Head::zinb));
    const auto zf = zm.forward(sc.X, sc.F, sc.A);
    CHECK(zf.head == model::Head::zinb);
    CHECK(zf.num_nodes == 6);
    CHECK(zf.horizon == 3);
    REQUIRE(zf.pi.size() == 18);
    REQUIRE(zf.n.size() == 18);
    REQUIRE(zf.p.size() == 18);
    CHECK(zf.mu.size() == 0);
    for (std::size_t v = 0; v < 6; ++v)
        for (std::size_t j = 0; j < 3; ++j) CHECK_NOTHROW(dist::validate(zf.zinb_at(v, j)));

    const auto nm = model::Model::init(small_config(model::Head::nb));
    const auto nf = nm.forward(sc.X, sc.F, sc.A);
    CHECK(nf.pi.size() == 0);
    REQUIRE(nf.n.size() == 18);
    for (std::size_t v = 0; v < 6; ++v)
        for (std::size_t j = 0; j < 3; ++j) CHECK_NOTHROW(dist::validate(nf.nb_at(v, j)));

    const auto gm = model::Model::init(small_config(model::Head::gauss));
    const auto gf = gm.forward(sc.X, sc.F, sc.A);
    CHECK(gf.n.size() == 0);
    REQUIRE(gf.mu.size() == 18);
    REQUIRE(gf.sigma.size() == 18);
    for (std::size_t v = 0; v < 6; ++v)
        for (std::size_t j = 0; j < 3; ++j) CHECK_NOTHROW(dist::validate(gf.gauss_at(v, j)));
}

TEST_CASE("forward rejects mis-shaped inputs") {
    const auto sc = make_scene(6, 5, 4);
    const auto m = model::Model::init(small_config());
    CHECK_THROWS_AS(m.forward(Tensor({6, 4}), sc.F, sc.A), std::invalid_argument);
    CHECK_THROWS_AS(m.forward(sc.X, Tensor({6, 5, 7}), sc.A), std::invalid_argument);
    const auto small_A = graph::adjacency(graph::build_graph({"a", "b"}, {{"a", "b"}}), true);
    CHECK_THROWS_AS(m.forward(sc.X, sc.F, small_A), std::invalid_argument);
    const auto no_loop = graph::adjacency(sc.g, false);
    CHECK_THROWS(m.forward(sc.X, sc.F, no_loop));
}

TEST_CASE("taped forward reproduces the plain forward bitwise") {
    const auto sc = make_scene(5, 5, 5);
    for (const auto head : {model::Head::zinb, model::Head::nb, model::Head::gauss}) {
        const auto m = model::Model::init(small_config(head));
        const auto fd = m.forward(sc.X, sc.F, sc.A);
        auto tf = m.forward_tape(sc.X, sc.F, sc.A);
        switch (head) {
            case model::Head::zinb:
                for (std::size_t i = 0; i < fd.pi.size(); ++i) {
                    CHECK(tf.pi->value[i] == fd.pi[i]);
                    CHECK(tf.n->value[i] == fd.n[i]);
                    CHECK(tf.p->value[i] == fd.p[i]);
                }
                break;
            case model::Head::nb:
                for (std::size_t i = 0; i < fd.n.size(); ++i) {
                    CHECK(tf.n->value[i] == fd.n[i]);
                    CHECK(tf.p->value[i] == fd.p[i]);
                }
                break;
            case model::Head::gauss:
                for (std::size_t i = 0; i < fd.mu.size(); ++i) {
                    CHECK(tf.mu->value[i] == fd.mu[i]);
                    CHECK(tf.sigma->value[i] == fd.sigma[i]);
                }
                break;
        }
    }
}

TEST_CASE("backward through a taped forward reaches every parameter") {
    const auto sc = make_scene(5, 5, 6);
    auto m = model::Model::init(small_config());
    auto tf = m.forward_tape(sc.X, sc.F, sc.A);

    Tensor y({5, 3});
    rng::Engine e(9);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(e.bounded(3));
    nn::backward(nn::zinb_nll_mean(tf.pi, tf.n, tf.p, y));
    m.params().zero_grads();
    tf.tape.flush_grads(m.params());

    for (const auto& name : m.params().names()) {
        const Tensor& g = m.params().grad(name);
        double norm = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) norm += g[i] * g[i];
        CAPTURE(name);
        CHECK(norm > 0.0);
    }
}

TEST_CASE("scale_inputs changes the forward but not its validity") {
    auto cfg = small_config();
    const auto sc = make_scene(5, 5, 7);

    cfg.scale_inputs = false;
    const auto raw = model::Model::init(cfg).forward(sc.X, sc.F, sc.A);
    cfg.scale_inputs = true;
    const auto scaled = model::Model::init(cfg).forward(sc.X, sc.F, sc.A);

    bool differs = false;
    for (std::size_t i = 0; i < raw.n.size(); ++i) differs = differs || raw.n[i] != scaled.n[i];
    CHECK(differs);

    // all-zero history is a fixed point of scaling, so the two models agree
    const Tensor zeroX({5, 5});
    cfg.scale_inputs = false;
    const auto z_raw = model::Model::init(cfg).forward(zeroX, sc.F, sc.A);
    cfg.scale_inputs = true;
    const auto z_scaled = model::Model::init(cfg).forward(zeroX, sc.F, sc.A);
    for (std::size_t i = 0; i < z_raw.n.size(); ++i) CHECK(z_raw.n[i] == z_scaled.n[i]);
}

TEST_CASE("point prediction and summaries defer to the distributions") {
    const auto sc = make_scene(5, 5, 8);

    const auto zm = model::Model::init(small_config(model::Head::zinb));
    const auto zf = zm.forward(sc.X, sc.F, sc.A);
    const Tensor pt = model::predict_point(zf);
    REQUIRE(pt.rows() == 5);
    REQUIRE(pt.cols() == 3);
    for (std::size_t v = 0; v < 5; ++v)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(pt.at(v, j) == doctest::Approx(dist::zinb_mean(zf.zinb_at(v, j))).epsilon(1e-12));
            CHECK(model::cell_mean(zf, v, j) ==
                  doctest::Approx(dist::zinb_mean(zf.zinb_at(v, j))).epsilon(1e-12));
            CHECK(model::cell_p_zero(zf, v, j) ==
                  doctest::Approx(dist::zinb_p_zero(zf.zinb_at(v, j))).epsilon(1e-12));
            CHECK(model::cell_entropy(zf, v, j) ==
                  doctest::Approx(dist::zinb_entropy(zf.zinb_at(v, j))).epsilon(1e-10));
            CHECK(model::cell_nll(zf, v, j, 2, dist::Y0Form::exact) ==
                  doctest::Approx(dist::zinb_nll(zf.zinb_at(v, j), 2)).epsilon(1e-12));
        }

    const auto gm = model::Model::init(small_config(model::Head::gauss));
    const auto gf = gm.forward(sc.X, sc.F, sc.A);
    for (std::size_t v = 0; v < 5; ++v)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(model::cell_mean(gf, v, j) == gf.mu.at(v, j));
            CHECK(model::cell_p_zero(gf, v, j) ==
                  doctest::Approx(dist::gauss_p_zero(gf.gauss_at(v, j))).epsilon(1e-12));
        }

    const auto nm = model::Model::init(small_config(model::Head::nb));
    const auto nf = nm.forward(sc.X, sc.F, sc.A);
    for (std::size_t v = 0; v < 5; ++v)
        CHECK(model::cell_mean(nf, v, 0) ==
              doctest::Approx(dist::nb_mean(nf.nb_at(v, 0))).epsilon(1e-12));
}

TEST_CASE("interval prediction brackets the point prediction sensibly") {
    const auto sc = make_scene(5, 5, 9);
    for (const auto head : {model::Head::zinb, model::Head::nb, model::Head::gauss}) {
        const auto m = model::Model::init(small_config(head));
        const auto fd = m.forward(sc.X, sc.F, sc.A);
        const auto [lo, hi] = model::predict_interval(fd, 0.90);
        const auto [lo2, hi2] = model::predict_interval(fd, 0.99);
        for (std::size_t i = 0; i < lo.size(); ++i) {
            CHECK(lo[i] <= hi[i]);
            CHECK(lo2[i] <= lo[i] + 1e-12);  // wider level nests
            CHECK(hi2[i] >= hi[i] - 1e-12);
        }
    }
    const auto m = model::Model::init(small_config());
    const auto fd = m.forward(sc.X, sc.F, sc.A);
    CHECK_THROWS_AS(model::predict_interval(fd, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(model::predict_interval(fd, 1.0), std::invalid_argument);
}

}
