#include "riskgraph/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "riskgraph/csv.hpp"
#include "riskgraph/rng.hpp"

namespace riskgraph::ingest {

namespace {

[[noreturn]] void fail_line(const std::string& path, std::size_t line_no, const std::string& msg) {
    throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + msg);
}

double parse_double_strict(const std::string& s, const std::string& path, std::size_t line_no,
                           const char* what) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) fail_line(path, line_no, std::string("bad ") + what + " '" + s + "'");
    return v;
}

long long parse_int_strict(const std::string& s, const std::string& path, std::size_t line_no,
                           const char* what) {
    long long v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) fail_line(path, line_no, std::string("bad ") + what + " '" + s + "'");
    return v;
}

std::vector<cal::Day> consecutive_days(cal::Day start, std::size_t n) {
    std::vector<cal::Day> days(n);
    for (std::size_t i = 0; i < n; ++i) days[i] = start + static_cast<cal::Day>(i);
    return days;
}

std::string padded_id(std::size_t i, std::size_t width) {
    std::string s = std::to_string(i);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return "r" + s;
}

}  // namespace

Severity parse_severity(const std::string& s) {
    if (s == "slight") return Severity::slight;
    if (s == "serious") return Severity::serious;
    if (s == "fatal") return Severity::fatal;
    throw std::invalid_argument("unknown severity '" + s + "'");
}

const char* severity_name(Severity s) {
    switch (s) {
        case Severity::slight: return "slight";
        case Severity::serious: return "serious";
        default: return "fatal";
    }
}

double RiskTensor::zero_fraction() const {
    if (values.empty()) return 0.0;
    std::size_t zeros = 0;
    for (long long v : values) zeros += (v == 0);
    return static_cast<double>(zeros) / static_cast<double>(values.size());
}

nn::Tensor assign_accidents(std::span<const AccidentRecord> records, const graph::RoadGraph& g,
                            const SeverityWeights& weights, std::span<const cal::Day> day_index) {
    if (day_index.empty()) throw std::invalid_argument("assign_accidents: empty day index");
    const std::size_t nv = g.num_nodes();
    const std::size_t nd = day_index.size();
    nn::Tensor base({nv, nd});
    const cal::Day day0 = day_index.front();

    for (const AccidentRecord& rec : records) {
        const cal::Day off = rec.date - day0;
        if (off < 0 || static_cast<std::size_t>(off) >= nd)
            throw std::invalid_argument("accident on " + cal::format_iso_date(rec.date) +
                                        " (line " + std::to_string(rec.line_no) +
                                        ") outside the study period");

        std::size_t node;
        if (rec.road_id.has_value()) {
            node = g.index_of(*rec.road_id);
        } else if (rec.location.has_value()) {
            if (!g.has_coords())
                throw std::invalid_argument("accident located by coordinates but graph has none");
            const auto& coords = g.coords();
            node = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < coords.size(); ++i) {
                const double dx = coords[i].x - rec.location->x;
                const double dy = coords[i].y - rec.location->y;
                const double d2 = dx * dx + dy * dy;
                if (d2 < best) {  // strict: ties keep the lowest index
                    best = d2;
                    node = i;
                }
            }
        } else {
            throw std::invalid_argument("accident record (line " + std::to_string(rec.line_no) +
                                        ") has neither road_id nor coordinates");
        }
        base.at(node, static_cast<std::size_t>(off)) += weights.of(rec.severity);
    }
    return base;
}

nn::Tensor spillover_base(const nn::Tensor& base, const graph::RoadGraph& g, double alpha1,
                          double alpha2) {
    const std::size_t nv = base.rows();
    const std::size_t nd = base.cols();
    if (nv != g.num_nodes()) throw std::invalid_argument("spillover: node count mismatch");

    std::vector<std::vector<std::size_t>> first(nv), second(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        first[i] = graph::neighbors_k(g, i, 1);
        second[i] = graph::neighbors_k(g, i, 2);
    }

    nn::Tensor out = base;
    for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t d = 0; d < nd; ++d) {
            const double w = base.at(i, d);
            if (w == 0.0) continue;
            for (std::size_t j : first[i]) out.at(j, d) += alpha1 * w;
            for (std::size_t j : second[i]) out.at(j, d) += alpha2 * w;
        }
    }
    return out;
}

RiskTensor apply_spillover(const nn::Tensor& base, const graph::RoadGraph& g, double alpha1,
                           double alpha2, std::vector<cal::Day> day_index) {
    if (!(alpha2 >= 0.0 && alpha1 >= alpha2 && alpha1 <= 1.0))
        throw std::invalid_argument("spillover requires 0 <= alpha2 <= alpha1 <= 1");
    if (day_index.size() != base.cols())
        throw std::invalid_argument("apply_spillover: day index length mismatch");

    const nn::Tensor sp = spillover_base(base, g, alpha1, alpha2);
    RiskTensor risk;
    risk.num_nodes = base.rows();
    risk.day_index = std::move(day_index);
    risk.values.resize(sp.size());
    for (std::size_t i = 0; i < sp.size(); ++i)
        risk.values[i] = std::llround(sp[i]);  // llround ties away from zero
    return risk;
}

FeatureTensor build_features(std::size_t num_nodes, std::vector<cal::Day> day_index) {
    FeatureTensor f;
    f.num_nodes = num_nodes;
    f.day_features.assign(day_index.size() * FeatureTensor::kDim, 0.0);
    for (std::size_t d = 0; d < day_index.size(); ++d) {
        const cal::Day day = day_index[d];
        f.day_features[d * FeatureTensor::kDim + static_cast<std::size_t>(cal::weekday_index(day))] = 1.0;
        f.day_features[d * FeatureTensor::kDim + 7] = cal::is_weekend(day) ? 1.0 : 0.0;
    }
    f.day_index = std::move(day_index);
    return f;
}

std::vector<WindowSample> make_windows(const RiskTensor& risk, const FeatureTensor& features,
                                       int T, int k, int stride) {
    if (T < 1 || k < 1 || stride < 1)
        throw std::invalid_argument("make_windows: T, k and stride must be >= 1");
    const std::size_t nv = risk.num_nodes;
    const std::size_t nd = risk.num_days();
    if (nd < static_cast<std::size_t>(T + k))
        throw std::invalid_argument("make_windows: need at least T + k = " + std::to_string(T + k) +
                                    " days, have " + std::to_string(nd));
    if (features.day_index != risk.day_index)
        throw std::invalid_argument("make_windows: feature and risk day indexes differ");

    const std::size_t ut = static_cast<std::size_t>(T);
    const std::size_t uk = static_cast<std::size_t>(k);
    const std::size_t count = (nd - ut - uk) / static_cast<std::size_t>(stride) + 1;

    std::vector<WindowSample> samples;
    samples.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t start = s * static_cast<std::size_t>(stride);
        WindowSample w;
        w.start_day = start;
        w.input_risk = nn::Tensor({nv, ut});
        w.input_features = nn::Tensor({nv, ut, FeatureTensor::kDim});
        w.target_risk = nn::Tensor({nv, uk});
        for (std::size_t v = 0; v < nv; ++v) {
            for (std::size_t t = 0; t < ut; ++t) {
                w.input_risk.at(v, t) = static_cast<double>(risk.at(v, start + t));
                const auto row = features.day_row(start + t);
                for (std::size_t c = 0; c < FeatureTensor::kDim; ++c)
                    w.input_features.at(v, t, c) = row[c];
            }
            for (std::size_t j = 0; j < uk; ++j)
                w.target_risk.at(v, j) = static_cast<double>(risk.at(v, start + ut + j));
        }
        samples.push_back(std::move(w));
    }
    return samples;
}

RiskTensor slice_days(const RiskTensor& risk, std::size_t d0, std::size_t d1) {
    if (d0 >= d1 || d1 > risk.num_days())
        throw std::invalid_argument("slice_days: invalid range");
    RiskTensor out;
    out.num_nodes = risk.num_nodes;
    out.day_index.assign(risk.day_index.begin() + static_cast<std::ptrdiff_t>(d0),
                         risk.day_index.begin() + static_cast<std::ptrdiff_t>(d1));
    out.values.resize(out.num_nodes * (d1 - d0));
    for (std::size_t v = 0; v < risk.num_nodes; ++v)
        for (std::size_t d = d0; d < d1; ++d) out.at(v, d - d0) = risk.at(v, d);
    return out;
}

SplitResult chronological_split(std::vector<WindowSample> samples, double train_frac,
                                double val_frac) {
    if (!(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0))
        throw std::invalid_argument("split fractions must be positive and sum below 1");
    const std::size_t n = samples.size();
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_frac));
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * val_frac));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
        throw std::invalid_argument("chronological_split: a split would be empty (" +
                                    std::to_string(n) + " samples)");

    SplitResult r;
    r.train.assign(std::make_move_iterator(samples.begin()),
                   std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train)));
    r.val.assign(std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train)),
                 std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train + n_val)));
    r.test.assign(std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train + n_val)),
                  std::make_move_iterator(samples.end()));
    return r;
}

graph::RoadGraph generate_synthetic_graph(std::size_t n_nodes, GraphModel model,
                                          std::uint64_t seed) {
    if (n_nodes < 1) throw std::invalid_argument("generate_synthetic_graph: n_nodes must be >= 1");

    const std::size_t width = std::to_string(n_nodes == 1 ? 1 : n_nodes - 1).size();
    std::vector<std::string> ids(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) ids[i] = padded_id(i, width);

    std::vector<graph::Coord> coords(n_nodes);
    std::vector<std::pair<std::string, std::string>> edges;

    if (model == GraphModel::grid) {
        const auto side = static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(n_nodes))));
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const std::size_t row = i / side;
            const std::size_t col = i % side;
            coords[i] = {static_cast<double>(col) * 100.0, static_cast<double>(row) * 100.0};
            if (col + 1 < side && i + 1 < n_nodes) edges.emplace_back(ids[i], ids[i + 1]);
            if (i + side < n_nodes) edges.emplace_back(ids[i], ids[i + side]);
        }
    } else {
        rng::Engine e(seed);
        const double box = 1000.0;
        for (auto& c : coords) {
            c.x = e.uniform(0.0, box);
            c.y = e.uniform(0.0, box);
        }
        // Mean degree ~4: (n-1) * pi r^2 / box^2 = 4.
        double radius = box;
        if (n_nodes > 1)
            radius = box * std::sqrt(4.0 / (3.14159265358979323846 *
                                            static_cast<double>(n_nodes - 1)));
        const double r2 = radius * radius;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            for (std::size_t j = i + 1; j < n_nodes; ++j) {
                const double dx = coords[i].x - coords[j].x;
                const double dy = coords[i].y - coords[j].y;
                if (dx * dx + dy * dy <= r2) edges.emplace_back(ids[i], ids[j]);
            }
        }
    }
    return graph::build_graph(std::move(ids), edges, std::move(coords));
}

long long nb_sample_inverse(double n, double p, double u) {
    double f = std::exp(n * std::log(p));  // pmf at 0
    double cdf = f;
    long long x = 0;
    while (cdf <= u) {
        f *= (static_cast<double>(x) + n) / (static_cast<double>(x) + 1.0) * (1.0 - p);
        ++x;
        cdf += f;
        if (f <= 0.0 || x >= 10000000) break;  // underflow guard
    }
    return x;
}

RiskTensor generate_zinb_series(const graph::RoadGraph& g, std::size_t n_days,
                                std::span<const dist::ZinbParams> params_per_node,
                                std::uint64_t seed, cal::Day start_day) {
    if (params_per_node.size() != g.num_nodes())
        throw std::invalid_argument("generate_zinb_series: one ZinbParams per node required");
    for (const auto& q : params_per_node) dist::validate(q);

    RiskTensor risk;
    risk.num_nodes = g.num_nodes();
    risk.day_index = consecutive_days(start_day, n_days);
    risk.values.assign(risk.num_nodes * n_days, 0);
    for (std::size_t v = 0; v < risk.num_nodes; ++v) {
        const auto& q = params_per_node[v];
        for (std::size_t d = 0; d < n_days; ++d) {
            rng::Engine e(rng::mix(seed, v, d));
            const double u1 = e.uniform();
            if (u1 < q.pi) continue;
            risk.at(v, d) = nb_sample_inverse(q.n, q.p, e.uniform());
        }
    }
    return risk;
}

RiskTensor generate_bursty_series(const graph::RoadGraph& g, std::size_t n_days,
                                  const BurstSpec& spec, std::uint64_t seed, cal::Day start_day) {
    dist::validate(spec.quiet);
    dist::validate(spec.burst);

    RiskTensor risk;
    risk.num_nodes = g.num_nodes();
    risk.day_index = consecutive_days(start_day, n_days);
    risk.values.assign(risk.num_nodes * n_days, 0);
    for (std::size_t v = 0; v < risk.num_nodes; ++v) {
        rng::Engine e(rng::mix(seed, v));
        bool burst = false;
        for (std::size_t d = 0; d < n_days; ++d) {
            const double flip = e.uniform();
            if (burst ? (flip < spec.p_exit) : (flip < spec.p_enter)) burst = !burst;
            const auto& q = burst ? spec.burst : spec.quiet;
            const double u1 = e.uniform();
            const double u2 = e.uniform();  // drawn unconditionally to keep streams aligned
            if (u1 >= q.pi) risk.at(v, d) = nb_sample_inverse(q.n, q.p, u2);
        }
    }
    return risk;
}

std::vector<AccidentRecord> load_accidents_csv(const std::string& path) {
    csv::Reader reader(path);
    reader.expect_header({"date", "road_id", "x", "y", "severity"});

    std::vector<AccidentRecord> records;
    csv::Row row;
    while (reader.next(row)) {
        if (row.fields.size() != 5)
            fail_line(path, row.line_no, "expected 5 fields, got " + std::to_string(row.fields.size()));
        AccidentRecord rec;
        rec.line_no = row.line_no;
        try {
            rec.date = cal::parse_iso_date(row.fields[0]);
        } catch (const std::exception& ex) {
            fail_line(path, row.line_no, ex.what());
        }
        const std::string& id = row.fields[1];
        const std::string& xs = row.fields[2];
        const std::string& ys = row.fields[3];
        if (!id.empty()) {
            if (!xs.empty() || !ys.empty())
                fail_line(path, row.line_no, "record has both road_id and coordinates");
            rec.road_id = id;
        } else {
            if (xs.empty() || ys.empty())
                fail_line(path, row.line_no, "record needs either road_id or both coordinates");
            rec.location = graph::Coord{parse_double_strict(xs, path, row.line_no, "x"),
                                        parse_double_strict(ys, path, row.line_no, "y")};
        }
        try {
            rec.severity = parse_severity(row.fields[4]);
        } catch (const std::exception& ex) {
            fail_line(path, row.line_no, ex.what());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void save_risk_csv(const RiskTensor& risk, const graph::RoadGraph& g, const std::string& path) {
    if (risk.num_nodes != g.num_nodes())
        throw std::invalid_argument("save_risk_csv: node count mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "road_id";
    for (cal::Day d : risk.day_index) out << ',' << cal::format_iso_date(d);
    out << '\n';
    for (std::size_t v = 0; v < risk.num_nodes; ++v) {
        out << g.node_id(v);
        for (std::size_t d = 0; d < risk.num_days(); ++d) out << ',' << risk.at(v, d);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

RiskTensor load_risk_csv(const std::string& path, const graph::RoadGraph& g) {
    csv::Reader reader(path);
    const auto& header = reader.header();
    if (header.empty() || header[0] != "road_id")
        throw std::runtime_error(path + ": first column must be road_id");

    RiskTensor risk;
    risk.num_nodes = g.num_nodes();
    risk.day_index.reserve(header.size() - 1);
    for (std::size_t c = 1; c < header.size(); ++c) {
        try {
            risk.day_index.push_back(cal::parse_iso_date(header[c]));
        } catch (const std::exception& ex) {
            fail_line(path, 1, ex.what());
        }
    }
    for (std::size_t c = 1; c < risk.day_index.size(); ++c)
        if (risk.day_index[c] != risk.day_index[c - 1] + 1)
            fail_line(path, 1, "day columns are not consecutive");

    risk.values.assign(risk.num_nodes * risk.num_days(), 0);
    std::vector<bool> seen(risk.num_nodes, false);
    csv::Row row;
    while (reader.next(row)) {
        if (row.fields.size() != header.size())
            fail_line(path, row.line_no, "expected " + std::to_string(header.size()) + " fields");
        std::size_t v;
        try {
            v = g.index_of(row.fields[0]);
        } catch (const std::exception&) {
            fail_line(path, row.line_no, "road_id '" + row.fields[0] + "' not in graph");
        }
        if (seen[v]) fail_line(path, row.line_no, "duplicate road_id '" + row.fields[0] + "'");
        seen[v] = true;
        for (std::size_t d = 0; d < risk.num_days(); ++d) {
            const long long x = parse_int_strict(row.fields[d + 1], path, row.line_no, "risk value");
            if (x < 0) fail_line(path, row.line_no, "negative risk value");
            risk.at(v, d) = x;
        }
    }
    for (std::size_t v = 0; v < risk.num_nodes; ++v)
        if (!seen[v]) throw std::runtime_error(path + ": missing row for road '" + g.node_id(v) + "'");
    return risk;
}

void save_params_csv(std::span<const dist::ZinbParams> params, const graph::RoadGraph& g,
                     const std::string& path) {
    if (params.size() != g.num_nodes())
        throw std::invalid_argument("save_params_csv: one ZinbParams per node required");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "road_id,pi,n,p\n";
    for (std::size_t v = 0; v < params.size(); ++v)
        out << g.node_id(v) << ',' << csv::format_double(params[v].pi) << ','
            << csv::format_double(params[v].n) << ',' << csv::format_double(params[v].p) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<dist::ZinbParams> load_params_csv(const std::string& path, const graph::RoadGraph& g) {
    csv::Reader reader(path);
    reader.expect_header({"road_id", "pi", "n", "p"});

    std::vector<dist::ZinbParams> params(g.num_nodes());
    std::vector<bool> seen(g.num_nodes(), false);
    csv::Row row;
    while (reader.next(row)) {
        if (row.fields.size() != 4) fail_line(path, row.line_no, "expected 4 fields");
        std::size_t v;
        try {
            v = g.index_of(row.fields[0]);
        } catch (const std::exception&) {
            fail_line(path, row.line_no, "road_id '" + row.fields[0] + "' not in graph");
        }
        if (seen[v]) fail_line(path, row.line_no, "duplicate road_id '" + row.fields[0] + "'");
        seen[v] = true;
        params[v].pi = parse_double_strict(row.fields[1], path, row.line_no, "pi");
        params[v].n = parse_double_strict(row.fields[2], path, row.line_no, "n");
        params[v].p = parse_double_strict(row.fields[3], path, row.line_no, "p");
        try {
            dist::validate(params[v]);
        } catch (const std::exception& ex) {
            fail_line(path, row.line_no, ex.what());
        }
    }
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
        if (!seen[v]) throw std::runtime_error(path + ": missing row for road '" + g.node_id(v) + "'");
    return params;
}

}  // namespace riskgraph::ingest
