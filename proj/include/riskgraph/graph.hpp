#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace riskgraph::graph {

struct Coord {
    double x = 0.0;
    double y = 0.0;
};

/// Undirected road-segment graph. Node index order equals construction order
/// and is stable across save/load; no self-loops or duplicate edges are kept.
class RoadGraph {
public:
    std::size_t num_nodes() const { return node_ids_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    const std::vector<std::string>& node_ids() const { return node_ids_; }
    const std::string& node_id(std::size_t i) const { return node_ids_.at(i); }
    std::size_t index_of(const std::string& id) const;

    /// Unordered index pairs, stored with first < second, in insertion order.
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

    /// Sorted neighbor lists per node.
    const std::vector<std::vector<std::size_t>>& adjacency_lists() const { return adj_; }

    bool has_coords() const { return coords_.has_value(); }
    const std::vector<Coord>& coords() const;

    /// FNV-1a over the node id sequence; checkpoints carry it to reject
    /// evaluation against a differently-ordered graph.
    std::uint64_t node_order_hash() const;

    friend RoadGraph build_graph(std::vector<std::string> node_ids,
                                 const std::vector<std::pair<std::string, std::string>>& edge_list,
                                 std::optional<std::vector<Coord>> coords);

private:
    std::vector<std::string> node_ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::vector<std::vector<std::size_t>> adj_;
    std::optional<std::vector<Coord>> coords_;
};

/// Dense symmetric 0/1 matrix; diagonal all-ones iff self_loops.
struct AdjacencyMatrix {
    std::size_t n = 0;
    bool self_loops = false;
    std::vector<double> values;  // row-major n*n

    double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

/// Throws std::invalid_argument on duplicate node ids or unknown edge endpoints.
/// Self-loop and duplicate edges in the input are dropped.
RoadGraph build_graph(std::vector<std::string> node_ids,
                      const std::vector<std::pair<std::string, std::string>>& edge_list,
                      std::optional<std::vector<Coord>> coords = std::nullopt);

/// order=1: adjacent nodes; order=2: nodes at shortest-path distance exactly 2.
/// Returns a sorted index set. Throws on invalid node or order.
std::vector<std::size_t> neighbors_k(const RoadGraph& g, std::size_t node, int order);

AdjacencyMatrix adjacency(const RoadGraph& g, bool self_loops);

/// Node file: header `road_id,x,y` (x,y may be empty). Edge file: header
/// `road_id_a,road_id_b`.
RoadGraph load_graph(const std::string& nodes_csv, const std::string& edges_csv);
void save_graph(const RoadGraph& g, const std::string& nodes_csv, const std::string& edges_csv);

}  // namespace riskgraph::graph
