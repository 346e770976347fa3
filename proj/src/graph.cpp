#include "riskgraph/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <stdexcept>

#include "riskgraph/csv.hpp"

namespace riskgraph::graph {

std::size_t RoadGraph::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end())
        throw std::invalid_argument("unknown node id: '" + id + "'");
    return it->second;
}

const std::vector<Coord>& RoadGraph::coords() const {
    if (!coords_)
        throw std::logic_error("graph has no coordinates");
    return *coords_;
}

std::uint64_t RoadGraph::node_order_hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& id : node_ids_) {
        for (const char c : id) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        h ^= static_cast<unsigned char>('\n');
        h *= 1099511628211ULL;
    }
    return h;
}

RoadGraph build_graph(std::vector<std::string> node_ids,
                      const std::vector<std::pair<std::string, std::string>>& edge_list,
                      std::optional<std::vector<Coord>> coords) {
    RoadGraph g;
    g.node_ids_ = std::move(node_ids);
    g.index_.reserve(g.node_ids_.size());
    for (std::size_t i = 0; i < g.node_ids_.size(); ++i) {
        const auto [it, inserted] = g.index_.emplace(g.node_ids_[i], i);
        if (!inserted)
            throw std::invalid_argument("duplicate node id: '" + g.node_ids_[i] + "'");
    }
    if (coords) {
        if (coords->size() != g.node_ids_.size())
            throw std::invalid_argument("coords size does not match node count");
        g.coords_ = std::move(coords);
    }

    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [a, b] : edge_list) {
        const std::size_t ia = g.index_of(a);
        const std::size_t ib = g.index_of(b);
        if (ia == ib)
            continue;  // self-loops are not stored
        const auto key = std::minmax(ia, ib);
        if (seen.insert(key).second)
            g.edges_.push_back(key);
    }

    g.adj_.assign(g.node_ids_.size(), {});
    for (const auto& [a, b] : g.edges_) {
        g.adj_[a].push_back(b);
        g.adj_[b].push_back(a);
    }
    for (auto& nbrs : g.adj_)
        std::sort(nbrs.begin(), nbrs.end());
    return g;
}

std::vector<std::size_t> neighbors_k(const RoadGraph& g, std::size_t node, int order) {
    if (node >= g.num_nodes())
        throw std::invalid_argument("node index out of range");
    if (order != 1 && order != 2)
        throw std::invalid_argument("neighbor order must be 1 or 2");

    const auto& adj = g.adjacency_lists();
    if (order == 1)
        return adj[node];

    std::set<std::size_t> second;
    for (const std::size_t n1 : adj[node])
        for (const std::size_t n2 : adj[n1])
            second.insert(n2);
    second.erase(node);
    for (const std::size_t n1 : adj[node])
        second.erase(n1);
    return {second.begin(), second.end()};
}

AdjacencyMatrix adjacency(const RoadGraph& g, bool self_loops) {
    AdjacencyMatrix m;
    m.n = g.num_nodes();
    m.self_loops = self_loops;
    m.values.assign(m.n * m.n, 0.0);
    for (const auto& [a, b] : g.edges()) {
        m.values[a * m.n + b] = 1.0;
        m.values[b * m.n + a] = 1.0;
    }
    if (self_loops)
        for (std::size_t i = 0; i < m.n; ++i)
            m.values[i * m.n + i] = 1.0;
    return m;
}

namespace {

double parse_coord_field(const csv::Reader& r, const csv::Row& row, std::size_t idx) {
    const std::string& s = row.fields[idx];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error(r.path() + ":" + std::to_string(row.line_no) +
                                 ": bad coordinate '" + s + "'");
    return v;
}

}  // namespace

RoadGraph load_graph(const std::string& nodes_csv, const std::string& edges_csv) {
    csv::Reader nodes(nodes_csv);
    nodes.expect_header({"road_id", "x", "y"});
    std::vector<std::string> ids;
    std::vector<Coord> coords;
    bool any_coords = false, all_coords = true;
    csv::Row row;
    while (nodes.next(row)) {
        if (row.fields.size() != 3)
            throw std::runtime_error(nodes_csv + ":" + std::to_string(row.line_no) +
                                     ": expected 3 fields");
        ids.push_back(row.fields[0]);
        if (row.fields[1].empty() && row.fields[2].empty()) {
            coords.push_back({0.0, 0.0});
            all_coords = false;
        } else {
            coords.push_back({parse_coord_field(nodes, row, 1), parse_coord_field(nodes, row, 2)});
            any_coords = true;
        }
    }
    if (any_coords && !all_coords)
        throw std::runtime_error(nodes_csv + ": coordinates must be given for all nodes or none");

    csv::Reader edges(edges_csv);
    edges.expect_header({"road_id_a", "road_id_b"});
    std::vector<std::pair<std::string, std::string>> edge_list;
    while (edges.next(row)) {
        if (row.fields.size() != 2)
            throw std::runtime_error(edges_csv + ":" + std::to_string(row.line_no) +
                                     ": expected 2 fields");
        edge_list.emplace_back(row.fields[0], row.fields[1]);
    }

    return build_graph(std::move(ids), edge_list,
                       any_coords ? std::optional(std::move(coords)) : std::nullopt);
}

void save_graph(const RoadGraph& g, const std::string& nodes_csv, const std::string& edges_csv) {
    std::ofstream nf(nodes_csv);
    if (!nf)
        throw std::runtime_error("cannot write " + nodes_csv);
    nf << "road_id,x,y\n";
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        nf << g.node_id(i) << ',';
        if (g.has_coords())
            nf << csv::format_double(g.coords()[i].x) << ',' << csv::format_double(g.coords()[i].y);
        else
            nf << ',';
        nf << '\n';
    }

    std::ofstream ef(edges_csv);
    if (!ef)
        throw std::runtime_error("cannot write " + edges_csv);
    ef << "road_id_a,road_id_b\n";
    for (const auto& [a, b] : g.edges())
        ef << g.node_id(a) << ',' << g.node_id(b) << '\n';
}

}  // namespace riskgraph::graph
